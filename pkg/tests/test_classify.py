import logging

import numpy as np
import pandas as pd
import pytest

from yamabepy.errors import ProfileInputError
from yamabepy.soliton.classify import classify, rigidity_report
from yamabepy.soliton.ode import IntegrationLimits, OriginStart, integrate
from yamabepy.soliton.profile import (
    Classification,
    EndpointKind,
    ProfileDomain,
    ProfileState,
    SolitonParams,
    SolitonProfile,
)
from yamabepy.warped.fibers import FiberGeometry

EQUILIBRIUM = SolitonParams(n=3, rho=1.0, rbar=4.0)


def synthetic(r, phi, dphi, start_kind=EndpointKind.INTEGRATION_LIMIT, end_kind=None):
    samples = pd.DataFrame(
        {"r": r, "phi": phi, "dphi": dphi, "ddphi": 0.0, "f": 0.0, "R": 0.0}
    )
    domain = ProfileDomain(
        start=float(r[0]),
        end=float(r[-1]),
        start_kind=start_kind,
        end_kind=end_kind or EndpointKind.INTEGRATION_LIMIT,
    )
    return SolitonProfile(params=None, samples=samples, domain=domain)


def test_rotationally_symmetric():
    r = np.linspace(0.0, 5.0, 51)
    report = classify(synthetic(r, r, np.ones_like(r), start_kind=EndpointKind.CRITICAL_POINT))
    assert report.classification == Classification.ROTATIONALLY_SYMMETRIC
    assert report.critical_points == [0.0]
    assert not report.compact_inconsistency


def test_constant_phi_is_cylinder():
    r = np.linspace(-3.0, 3.0, 61)
    report = classify(synthetic(r, np.full_like(r, 2.0), np.zeros_like(r)))
    assert report.classification == Classification.CYLINDER_TYPE
    assert report.critical_points == []


def test_phi_heading_to_zero_is_undetermined():
    r = np.linspace(0.0, 10.0, 101)
    report = classify(synthetic(r, 2.0 - 0.1 * r, np.full_like(r, -0.1)))
    assert report.classification == Classification.UNDETERMINED
    assert report.notes


def test_interior_critical_point():
    r = np.linspace(0.0, 3.0, 31)
    report = classify(synthetic(r, r - 1.05, np.ones_like(r)))
    assert report.classification == Classification.UNDETERMINED
    assert report.critical_points == [pytest.approx(1.05)]


def test_two_critical_points_flagged(caplog):
    r = np.linspace(0.0, np.pi, 101)
    profile = synthetic(
        r,
        np.sin(r),
        np.cos(r),
        start_kind=EndpointKind.CRITICAL_POINT,
        end_kind=EndpointKind.CRITICAL_POINT,
    )
    with caplog.at_level(logging.WARNING, logger="yamabepy.soliton.classify"):
        report = classify(profile)
    assert report.classification == Classification.UNDETERMINED
    assert report.compact_inconsistency
    assert len(report.critical_points) == 2
    assert "compact soliton" in caplog.text


def test_report_to_dict():
    r = np.linspace(-1.0, 1.0, 5)
    out = classify(synthetic(r, np.ones_like(r), np.zeros_like(r))).to_dict()
    assert out["classification"] == "CylinderType"
    assert out["domain"]["start_kind"] == "integration-limit"
    assert set(out) == {"classification", "critical_points", "domain", "compact_inconsistency",
                        "notes"}


def test_empty_profile():
    with pytest.raises(ProfileInputError):
        classify(None)
    with pytest.raises(ProfileInputError):
        SolitonProfile(
            params=None,
            samples=pd.DataFrame(columns=["r", "phi", "dphi", "ddphi", "f", "R"]),
            domain=ProfileDomain(start=0.0, end=1.0),
        )


def test_rigidity_of_equilibrium_cylinder():
    profile = integrate(
        EQUILIBRIUM, ProfileState(r=0.0, phi=2.0, p=0.0), limits=IntegrationLimits(r_max=5.0)
    )
    report = rigidity_report(profile, FiberGeometry.round_sphere(2, kappa=2.0))
    assert report.classification == Classification.CYLINDER_TYPE
    assert report.ricci_nonnegative
    assert not report.ricci_positive
    assert report.scalar_nonnegative
    assert report.product_rigidity
    assert report.scalar_dichotomy
    assert report.locally_conformally_flat
    assert report.conformally_flat_class == "space-form-cylinder"
    assert report.to_dict()["classification"] == "CylinderType"


def test_rigidity_of_flat_expander():
    params = SolitonParams(n=4, rho=-1.0, rbar=6.0)
    profile = integrate(params, OriginStart(kappa=1.0), limits=IntegrationLimits(r_max=3.0))
    report = rigidity_report(profile, FiberGeometry.round_sphere(3))
    assert report.classification == Classification.ROTATIONALLY_SYMMETRIC
    assert report.conformally_flat_class == "rotationally-symmetric-Rn"
    assert report.ricci_nonnegative
    assert report.product_rigidity is None
    # flat space, R = 0
    assert report.scalar_nonnegative


def test_rigidity_with_abstract_fiber():
    profile = integrate(
        EQUILIBRIUM, ProfileState(r=0.0, phi=2.0, p=0.0), limits=IntegrationLimits(r_max=2.0)
    )
    report = rigidity_report(profile, FiberGeometry.abstract(2, 4.0))
    assert report.ricci_nonnegative is None
    assert report.ricci_positive is None
    assert not report.locally_conformally_flat
    assert report.notes


def test_rigidity_needs_params():
    r = np.linspace(0.0, 1.0, 3)
    with pytest.raises(ProfileInputError):
        rigidity_report(synthetic(r, np.ones_like(r), np.zeros_like(r)), FiberGeometry.flat(2))
