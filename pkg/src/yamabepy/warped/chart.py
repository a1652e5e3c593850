"""
Build explicit coordinate charts g = dr^2 + phi(r)^2 gbar(v) with potential f(r).

A chart is built from a ``WarpingFunction``: either analytic callables or the C^2 quintic
Hermite interpolant of a tabulated soliton profile (values, first and second derivatives at
each sample). In both cases f' = phi holds exactly on the chart, so the potential is the
quadrature of the warping function.
"""
from dataclasses import dataclass
from typing import Callable, Optional, Tuple

import numpy as np
from scipy.integrate import quad
from scipy.interpolate import BPoly

from yamabepy.errors import ConfigError, InsufficientFiberDataError, SingularWindowError
from yamabepy.soliton.profile import SolitonProfile
from yamabepy.tensor.core import MetricChart, ScalarFieldOnChart
from yamabepy.warped.fibers import FiberGeometry
from yamabepy.warped.geometry import WarpingSample

WINDOW_PROBES = 401


@dataclass(frozen=True)
class WarpingFunction:
    phi: Callable[[float], float]
    dphi: Callable[[float], float]
    ddphi: Callable[[float], float]
    potential: Optional[Callable[[float], float]] = None
    domain: Tuple[float, float] = (-np.inf, np.inf)

    @classmethod
    def analytic(cls, phi, dphi, ddphi, potential=None, domain=(-np.inf, np.inf)):
        return cls(phi=phi, dphi=dphi, ddphi=ddphi, potential=potential, domain=tuple(domain))

    @classmethod
    def from_profile(cls, profile: SolitonProfile) -> "WarpingFunction":
        "C^2 piecewise quintic through (phi, phi', phi'') at every profile sample"
        samples = profile.samples.drop_duplicates(subset="r").sort_values("r")
        r = samples["r"].to_numpy()
        if len(r) < 2:
            raise ConfigError("profile needs at least two samples to build a chart")
        derivs = samples[["phi", "dphi", "ddphi"]].to_numpy()
        poly = BPoly.from_derivatives(r, derivs)
        antiderivative = poly.antiderivative()
        offset = float(samples["f"].iloc[0])

        def potential(x):
            return float(antiderivative(x)) + offset

        return cls(
            phi=lambda x: float(poly(x)),
            dphi=lambda x: float(poly(x, 1)),
            ddphi=lambda x: float(poly(x, 2)),
            potential=potential,
            domain=(float(r[0]), float(r[-1])),
        )

    def sample(self, r: float) -> WarpingSample:
        return WarpingSample(r=r, phi=self.phi(r), dphi=self.dphi(r), ddphi=self.ddphi(r))

    def potential_from(self, r0: float) -> Callable[[float], float]:
        "f(r) with f' = phi; uses the given potential or quadrature from r0"
        if self.potential is not None:
            return self.potential

        def potential(r):
            value, _ = quad(self.phi, r0, r, epsabs=1e-14, epsrel=1e-13)
            return value

        return potential


def build_chart(source, fiber: FiberGeometry, window) -> Tuple[MetricChart, ScalarFieldOnChart]:
    """Chart (r, v) -> diag(1, phi(r)^2 gbar(v)) over ``window`` x fiber box, with potential f.

    ``source`` is a SolitonProfile or a WarpingFunction.
    """
    if isinstance(source, WarpingFunction):
        warping = source
    else:
        warping = WarpingFunction.from_profile(source)
    if not fiber.has_coordinates:
        raise InsufficientFiberDataError("chart construction needs fiber coordinates")
    r_lo, r_hi = (float(bound) for bound in window)
    if not r_lo < r_hi:
        raise ConfigError(f"empty r-window {window}")
    d_lo, d_hi = warping.domain
    if r_lo < d_lo or r_hi > d_hi:
        raise ConfigError(f"r-window {window} leaves the warping domain {warping.domain}")
    probes = np.array([warping.phi(r) for r in np.linspace(r_lo, r_hi, WINDOW_PROBES)])
    if np.any(probes <= 0):
        raise SingularWindowError(f"phi vanishes inside the r-window {window}")

    n = fiber.fiber_dim + 1
    box = np.vstack([[r_lo, r_hi], fiber.coordinate_box()])
    phi = warping.phi
    potential = warping.potential_from(r_lo)

    def metric_at(x):
        g = np.zeros((n, n))
        g[0, 0] = 1.0
        g[1:, 1:] = phi(x[0]) ** 2 * fiber.metric_at(x[1:])
        return g

    def value_at(x):
        return potential(x[0])

    return MetricChart(dim=n, metric_at=metric_at, domain_box=box), ScalarFieldOnChart(value_at)
