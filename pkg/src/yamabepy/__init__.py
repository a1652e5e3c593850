from yamabepy.soliton.classify import classify, rigidity_report
from yamabepy.soliton.ode import (
    IntegrationLimits,
    OriginStart,
    integrate,
    ode_rhs,
    series_origin,
)
from yamabepy.soliton.profile import ProfileState, SolitonParams, SolitonProfile
from yamabepy.tables.profile_io import read_profile, write_profile
from yamabepy.verify.catalog import run_suite
from yamabepy.warped.chart import build_chart
from yamabepy.warped.fibers import FiberGeometry

__all__ = [
    "FiberGeometry",
    "IntegrationLimits",
    "OriginStart",
    "ProfileState",
    "SolitonParams",
    "SolitonProfile",
    "build_chart",
    "classify",
    "integrate",
    "ode_rhs",
    "read_profile",
    "rigidity_report",
    "run_suite",
    "series_origin",
    "write_profile",
]
