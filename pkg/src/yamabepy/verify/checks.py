"""
Residual checks of the soliton and level-set identities on explicit charts.

Every check works from finite-difference quantities of ``yamabepy.tensor`` only, except
``conformal_flatness_check`` and ``closed_vs_numeric`` which compare them with the closed forms
of ``yamabepy.warped``. Tensor norms are max-norms of components in a g-orthonormal frame.
Charts are assumed to put the coordinate normal to the level sets of f first (as
``build_chart`` does); level sets are located along that coordinate.
"""
import logging
from dataclasses import dataclass
from typing import Sequence, Tuple

import numpy as np
import scipy.linalg
from scipy.optimize import brentq

from yamabepy.errors import ConfigError, DomainError
from yamabepy.soliton.ode import ode_rhs_values
from yamabepy.soliton.profile import SolitonProfile
from yamabepy.tensor.core import (
    DEFAULT_STEP,
    frame_components,
    gradient_and_hessian,
    gradient_norm_squared,
    orthonormal_frame,
    riemann_ricci_scalar,
    weyl,
)
from yamabepy.utils import halton_fiber_points
from yamabepy.warped.chart import WarpingFunction, build_chart
from yamabepy.warped.fibers import FiberGeometry
from yamabepy.warped.geometry import (
    ricci_closed_form,
    riemann_closed_form,
    scalar_closed_form,
    weyl_closed_form,
)

logger = logging.getLogger(__name__)

LEVEL_QUANTITIES = ("grad_norm2", "R", "H")


@dataclass(frozen=True)
class LevelGrid:
    "Chart points grouped by level set of f"

    levels: Tuple[np.ndarray, ...]

    @property
    def points(self) -> np.ndarray:
        return np.vstack(self.levels)

    @property
    def sample_count(self) -> int:
        return sum(len(level) for level in self.levels)


def _points(grid) -> np.ndarray:
    return np.atleast_2d(grid.points if isinstance(grid, LevelGrid) else np.asarray(grid, float))


def _groups(grid):
    if isinstance(grid, LevelGrid):
        return grid.levels
    return (np.atleast_2d(np.asarray(grid, dtype=float)),)


def level_grid(chart, f, fiber: FiberGeometry, r_levels, count=20, fill=0.8, margin=0.0):
    """``count`` points on each level set of f through (r, 0) for r in ``r_levels``.

    Fiber coordinates come from a fixed Halton sequence; the first coordinate of each point is
    solved for (brentq) so that f takes the level value.
    """
    fiber_points = halton_fiber_points(fiber.fiber_dim, count, fiber.coordinate_half_width(), fill)
    r_lo, r_hi = chart.domain_box[0] + np.array([margin, -margin])
    levels = []
    for r0 in r_levels:
        if not r_lo < r0 < r_hi:
            raise DomainError(f"level r={r0} is outside the chart window [{r_lo}, {r_hi}]")
        value = f(np.concatenate([[r0], np.zeros(fiber.fiber_dim)]))
        points = []
        for v in fiber_points:

            def offset(r, v=v):
                return f(np.concatenate([[r], v])) - value

            r = brentq(offset, r_lo, r_hi, xtol=1e-14, rtol=4 * np.finfo(float).eps)
            points.append(np.concatenate([[r], v]))
        levels.append(np.array(points))
    return LevelGrid(levels=tuple(levels))


def default_levels(window, count=5) -> np.ndarray:
    "``count`` r-levels evenly inside ``window`` (ends excluded)"
    lo, hi = window
    return lo + (hi - lo) * np.arange(1, count + 1) / (count + 1)


# -- soliton identities ---------------------------------------------------------------------------


def soliton_residual(chart, f, rho: float, grid, h: float = DEFAULT_STEP) -> float:
    "max over the grid of |Hess f - (R - rho) g|"
    worst = 0.0
    for x in _points(grid):
        curv = riemann_ricci_scalar(chart, x, h)
        hess = gradient_and_hessian(chart, f, x, h).hessian
        defect = hess - (curv.scalar - rho) * curv.metric
        worst = max(worst, float(np.abs(frame_components(defect, curv.metric)).max()))
    return worst


def gradient_identity_residual(chart, f, rho: float, grid, h: float = DEFAULT_STEP) -> float:
    "max over the grid of |d(|grad f|^2) - 2 (R - rho) df|"
    n = chart.dim
    eye = np.eye(n) * h
    worst = 0.0
    for x in _points(grid):
        chart.check_point(x, 4.0 * h)
        curv = riemann_ricci_scalar(chart, x, h)
        dnorm = np.array(
            [
                (
                    gradient_norm_squared(chart, f, x + eye[k], h)
                    - gradient_norm_squared(chart, f, x - eye[k], h)
                )
                / (2.0 * h)
                for k in range(n)
            ]
        )
        df = gradient_and_hessian(chart, f, x, h).differential
        defect = dnorm - 2.0 * (curv.scalar - rho) * df
        worst = max(worst, float(np.abs(frame_components(defect, curv.metric)).max()))
    return worst


def _level_quantity(chart, f, x, quantity, h):
    if quantity == "R":
        return riemann_ricci_scalar(chart, x, h).scalar
    gh = gradient_and_hessian(chart, f, x, h)
    if quantity == "grad_norm2":
        return gh.norm_squared
    # H = trace of the Weingarten map = (Laplacian f - Hess f(nu, nu)) / |grad f|
    g = chart.metric(x)
    norm = np.sqrt(gh.norm_squared)
    nu = gh.gradient / norm
    laplacian = float(np.sum(np.linalg.inv(g) * gh.hessian))
    return (laplacian - float(nu @ gh.hessian @ nu)) / norm


def level_set_constancy(chart, f, quantity: str, grid, h: float = DEFAULT_STEP) -> float:
    "Largest spread (max - min) of |grad f|^2, R or H over the points of any one level set"
    if quantity not in LEVEL_QUANTITIES:
        raise ConfigError(f"unknown level-set quantity {quantity!r}, expected {LEVEL_QUANTITIES}")
    worst = 0.0
    for level in _groups(grid):
        values = [_level_quantity(chart, f, x, quantity, h) for x in level]
        worst = max(worst, float(np.ptp(values)))
    return worst


def umbilicity_residual(chart, f, rho: float, grid, h: float = DEFAULT_STEP) -> float:
    "max |h_ab - ((R - rho)/|grad f|) g_ab| over directions tangent to the level sets"
    worst = 0.0
    for x in _points(grid):
        curv = riemann_ricci_scalar(chart, x, h)
        gh = gradient_and_hessian(chart, f, x, h)
        norm = np.sqrt(gh.norm_squared)
        # h_ab = Hess f / |grad f| restricted to the tangent space
        defect = (gh.hessian - (curv.scalar - rho) * curv.metric) / norm
        frame = orthonormal_frame(curv.metric)
        unit_normal = np.linalg.solve(frame, gh.gradient / norm)
        tangent = np.eye(chart.dim) - np.outer(unit_normal, unit_normal)
        projected = tangent @ frame_components(defect, curv.metric) @ tangent
        worst = max(worst, float(np.abs(projected).max()))
    return worst


# -- closed forms -------------------------------------------------------------------------------


@dataclass(frozen=True)
class ConformalFlatnessResult:
    closed_form_max: float
    numeric_max: float
    expect_flat: bool
    radial_max: float

    def passed(self, tolerance: float) -> bool:
        if self.expect_flat:
            return self.closed_form_max < tolerance and self.numeric_max < tolerance
        return self.closed_form_max > tolerance and self.numeric_max > tolerance


def _warping(source) -> WarpingFunction:
    if isinstance(source, SolitonProfile):
        return WarpingFunction.from_profile(source)
    return source


def _warped_metric(phi, fiber, v):
    n = fiber.fiber_dim + 1
    g = np.zeros((n, n))
    g[0, 0] = 1.0
    g[1:, 1:] = phi**2 * fiber.metric_at(v)
    return g


def conformal_flatness_check(source, fiber: FiberGeometry, window, grid, h=DEFAULT_STEP):
    "Closed-form and finite-difference max |W| (and closed-form max |W_1a1b|) over the grid"
    warping = _warping(source)
    chart, _ = build_chart(warping, fiber, window)
    n = fiber.fiber_dim + 1
    closed = numeric = radial = 0.0
    for x in _points(grid):
        s = warping.sample(x[0])
        form = weyl_closed_form(s, fiber, n)
        g = _warped_metric(s.phi, fiber, x[1:])
        closed = max(closed, float(np.abs(frame_components(form.tensor_at(x[1:]), g)).max()))
        radial = max(radial, float(np.abs(form.radial_at(x[1:])).max()))
        curv = riemann_ricci_scalar(chart, x, h)
        numeric = max(numeric, float(np.abs(frame_components(weyl(curv), curv.metric)).max()))
    return ConformalFlatnessResult(
        closed_form_max=closed,
        numeric_max=numeric,
        expect_flat=fiber.is_space_form,
        radial_max=radial,
    )


@dataclass(frozen=True)
class EinsteinFiberResult:
    eigenvalue_spread: float
    radial_variation: float


def einstein_fiber_check(chart, grid, h: float = DEFAULT_STEP) -> EinsteinFiberResult:
    """Spread of the Ricci eigenvalues restricted to the level sets, and variation of the radial
    eigenvalue R_11 along each level set."""
    spread = variation = 0.0
    for level in _groups(grid):
        radial = []
        for x in level:
            curv = riemann_ricci_scalar(chart, x, h)
            ric, g = curv.ricci, curv.metric
            values = scipy.linalg.eigh(ric[1:, 1:], g[1:, 1:], eigvals_only=True)
            spread = max(spread, float(values[-1] - values[0]))
            radial.append(ric[0, 0] / g[0, 0])
        variation = max(variation, float(np.ptp(radial)))
    return EinsteinFiberResult(eigenvalue_spread=spread, radial_variation=variation)


def closed_vs_numeric(source, fiber: FiberGeometry, n: int, window, grid, h=DEFAULT_STEP) -> dict:
    "Componentwise max discrepancy of closed-form Riemann, Ricci, scalar and Weyl vs the chart"
    warping = _warping(source)
    chart, _ = build_chart(warping, fiber, window)
    out = {"riemann": 0.0, "ricci": 0.0, "scalar": 0.0, "weyl": 0.0}
    for x in _points(grid):
        s = warping.sample(x[0])
        v = x[1:]
        curv = riemann_ricci_scalar(chart, x, h)
        g = curv.metric
        pairs = {
            "riemann": (riemann_closed_form(s, fiber).tensor_at(v), curv.riemann),
            "ricci": (ricci_closed_form(s, fiber, n).tensor_at(v), curv.ricci),
            "weyl": (weyl_closed_form(s, fiber, n).tensor_at(v), weyl(curv)),
        }
        for name, (closed, numeric) in pairs.items():
            diff = float(np.abs(frame_components(closed - numeric, g)).max())
            out[name] = max(out[name], diff)
        scalar = scalar_closed_form(s, fiber.scalar_curvature, n)
        out["scalar"] = max(out["scalar"], abs(scalar - curv.scalar))
    return out


def halving_ratio(check, h: float = DEFAULT_STEP):
    "(residual at h, residual at h/2, ratio) for a callable check(h) -> float"
    coarse = check(h)
    fine = check(h / 2.0)
    ratio = coarse / fine if fine > 0 else np.inf
    logger.debug("h-halving: %.3e -> %.3e, ratio %.3f", coarse, fine, ratio)
    return coarse, fine, ratio


# -- profiles -----------------------------------------------------------------------------------


def profile_consistency(profile: SolitonProfile, phi_min: float = 1.0e-8) -> dict:
    """Residuals of R - rho - phi' and phi'' - ode_rhs over the samples, and the largest decrease
    of f between consecutive samples where phi > 0 (0 for a monotone potential)."""
    params = profile.params
    if params is None:
        raise ConfigError("profile consistency needs the soliton parameters")
    samples = profile.samples.sort_values("r")
    phi = samples["phi"].to_numpy()
    dphi = samples["dphi"].to_numpy()
    regular = np.abs(phi) > phi_min
    scalar = float(np.abs(samples["R"].to_numpy() - params.rho - dphi).max())
    rhs = ode_rhs_values(params, phi[regular], dphi[regular])
    ode = float(np.abs(samples["ddphi"].to_numpy()[regular] - rhs).max(initial=0.0))
    f = samples["f"].to_numpy()
    positive = (phi[:-1] > 0) & (phi[1:] > 0)
    decrease = float(np.maximum(f[:-1] - f[1:], 0.0)[positive].max(initial=0.0))
    return {"scalar_relation": scalar, "ode_rhs": ode, "potential_decrease": decrease}


def sampled_grid(fiber: FiberGeometry, r_values: Sequence[float], count=20, fill=0.8):
    "Points (r, v) on the product of r-values and Halton fiber points, grouped by r"
    fiber_points = halton_fiber_points(fiber.fiber_dim, count, fiber.coordinate_half_width(), fill)
    return LevelGrid(
        levels=tuple(
            np.column_stack([np.full(len(fiber_points), r), fiber_points]) for r in r_values
        )
    )
