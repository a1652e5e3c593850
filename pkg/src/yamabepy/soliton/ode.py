"""
Profile ODE of a gradient Yamabe soliton written as dr^2 + phi(r)^2 gbar with phi = f'.

Combining R - rho = f'' with the warped-product scalar curvature relation gives

    2 (n-1) phi phi'' = Rbar - phi^2 (phi' + rho) - (n-1)(n-2) phi'^2,

which is integrated here with an adaptive embedded Runge-Kutta pair (DOP853, dense output) and
terminal events for critical points (phi -> 0), blow-up, and the requested r-limits. The singular
start at a critical point of f uses a matched odd power series.
"""
import logging
import math
import warnings
from dataclasses import dataclass
from enum import Enum
from typing import Optional, Union

import numpy as np
import pandas as pd
from numpy.polynomial import Polynomial
from scipy.integrate import solve_ivp

from yamabepy.errors import (
    ConfigError,
    IntegrationError,
    NoSmoothClosingError,
    SingularStateError,
    StiffnessError,
)
from yamabepy.soliton.profile import (
    SAMPLE_COLUMNS,
    EndpointKind,
    ProfileDomain,
    ProfileState,
    SolitonParams,
    SolitonProfile,
)

logger = logging.getLogger(__name__)

DEFAULT_SERIES_ORDER = 7


class Direction(str, Enum):
    FORWARD = "forward"
    BACKWARD = "backward"
    BOTH = "both"


@dataclass(frozen=True)
class OriginStart:
    "Start at a critical point of f, closing smoothly over a round fiber of curvature kappa"

    kappa: float = 1.0
    order: int = DEFAULT_SERIES_ORDER


@dataclass(frozen=True)
class IntegrationLimits:
    """Stopping rules and tolerances.

    The forward leg stops at r_max, the backward leg at r_min (default -r_max).
    """

    r_max: float = 10.0
    r_min: Optional[float] = None
    phi_min: float = 1.0e-8
    phi_max: float = 1.0e8
    p_max: float = 1.0e8
    rtol: float = 1.0e-10
    atol: float = 1.0e-12
    sample_step: float = 0.01
    max_step: float = np.inf

    def __post_init__(self):
        positive = {
            "phi_min": self.phi_min,
            "rtol": self.rtol,
            "atol": self.atol,
            "sample_step": self.sample_step,
            "max_step": self.max_step,
        }
        for name, value in positive.items():
            if not value > 0:
                raise ConfigError(f"{name} must be positive, got {value}")
        if not self.phi_max > self.phi_min:
            raise ConfigError("phi_max must exceed phi_min")
        if not self.p_max > 0:
            raise ConfigError(f"p_max must be positive, got {self.p_max}")
        if not np.isfinite(self.r_max):
            raise ConfigError(f"r_max must be finite, got {self.r_max}")
        if self.r_min is not None and not self.r_min < self.r_max:
            raise ConfigError(f"r_min ({self.r_min}) must be below r_max ({self.r_max})")

    @property
    def backward_limit(self) -> float:
        return -self.r_max if self.r_min is None else self.r_min


def _rhs(n, rho, rbar, phi, p):
    return (rbar - phi * phi * (p + rho) - (n - 1) * (n - 2) * p * p) / (2.0 * (n - 1) * phi)


def ode_rhs_values(params: SolitonParams, phi, p):
    "Vectorized ode_rhs over arrays of states (phi nonzero)"
    return _rhs(params.n, params.rho, params.rbar, np.asarray(phi), np.asarray(p))


def ode_rhs(params: SolitonParams, s: ProfileState) -> float:
    "phi'' from the rearranged scalar curvature relation; phi must be nonzero"
    if s.phi == 0:
        raise SingularStateError(f"phi vanishes at r={s.r}; start from the origin series instead")
    return _rhs(params.n, params.rho, params.rbar, s.phi, s.p)


def concavity_certificate(params: SolitonParams, s: ProfileState) -> bool:
    """True iff the sign implication (Rbar <= 0 and p + rho >= 0) => phi'' <= 0 holds at s.

    States outside the hypothesis hold vacuously.
    """
    if not s.phi > 0:
        raise SingularStateError(f"concavity needs phi > 0, got {s.phi}")
    if params.rbar <= 0 and s.p + params.rho >= 0:
        return ode_rhs(params, s) <= 0
    return True


# -- origin series ------------------------------------------------------------------------------


def _coefficient(poly: Polynomial, k: int) -> float:
    return float(poly.coef[k]) if k < len(poly.coef) else 0.0


def _series_residual(params: SolitonParams, poly: Polynomial) -> Polynomial:
    n = params.n
    dpoly = poly.deriv()
    ddpoly = poly.deriv(2)
    return (
        2 * (n - 1) * poly * ddpoly
        + poly * poly * dpoly
        + params.rho * poly * poly
        + (n - 1) * (n - 2) * dpoly * dpoly
        - params.rbar
    )


def series_origin(params: SolitonParams, kappa: float, order: int = DEFAULT_SERIES_ORDER):
    """Coefficients (power basis, index = power) of the odd series
    phi(r) = a1 r + a3 r^3 + ... through r^order.

    a1 = sqrt(kappa) closes the metric smoothly over the round fiber; each later odd coefficient
    is fixed by the r^(k-1) term of the profile equation, whose a_k dependence is linear with
    coefficient 2 (n-1) a1 k (k + n - 3).
    """
    if kappa <= 0:
        raise NoSmoothClosingError(f"smooth closing needs a round fiber, kappa > 0 (got {kappa})")
    if order < 3:
        raise ConfigError(f"series order must be >= 3, got {order}")
    n = params.n
    expected = kappa * (n - 1) * (n - 2)
    if not math.isclose(params.rbar, expected, rel_tol=1e-12, abs_tol=1e-12):
        raise ConfigError(
            f"Rbar={params.rbar} is not the scalar curvature {expected} of the round fiber "
            f"with kappa={kappa}"
        )
    a1 = math.sqrt(kappa)
    coef = np.zeros(order + 1)
    coef[1] = a1
    for k in range(3, order + 1, 2):
        residual = _series_residual(params, Polynomial(coef))
        coef[k] = -_coefficient(residual, k - 1) / (2.0 * (n - 1) * a1 * k * (k + n - 3))
    return coef


def seed_radius(coef, tol: float, order: int) -> float:
    "Start radius tol^(1/order), shrunk to the series' root-test radius estimate when below 1"
    a1 = coef[1]
    estimates = [
        abs(a1 / coef[k]) ** (1.0 / (k - 1)) for k in range(3, len(coef), 2) if coef[k] != 0
    ]
    radius = min(estimates, default=np.inf)
    return tol ** (1.0 / order) * min(1.0, radius)


# -- integration --------------------------------------------------------------------------------


def _system(params):
    n, rho, rbar = params.n, params.rho, params.rbar

    def fun(r, y):
        phi, p, _ = y
        return [p, _rhs(n, rho, rbar, phi, p), phi]

    return fun


def _events(limits: IntegrationLimits):
    def critical(r, y):
        return abs(y[0]) - limits.phi_min

    critical.terminal = True
    critical.direction = -1

    def blow_up(r, y):
        return y[0] - limits.phi_max

    blow_up.terminal = True
    blow_up.direction = 1

    def steep(r, y):
        return abs(y[1]) - limits.p_max

    steep.terminal = True
    steep.direction = 1

    return [critical, blow_up, steep], [
        EndpointKind.CRITICAL_POINT,
        EndpointKind.BLOW_UP,
        EndpointKind.BLOW_UP,
    ]


@dataclass(frozen=True)
class _Leg:
    dense: object
    start: float
    end: float
    end_kind: EndpointKind


def _integrate_leg(params, y0, r0, r_end, limits) -> _Leg:
    events, kinds = _events(limits)
    logger.debug("integrating %s from r=%g to r=%g, y0=%s", params, r0, r_end, y0)
    sol = solve_ivp(
        _system(params),
        (r0, r_end),
        y0,
        method="DOP853",
        rtol=limits.rtol,
        atol=limits.atol,
        dense_output=True,
        events=events,
        max_step=limits.max_step,
    )
    if sol.status == -1:
        if "step size" in sol.message.lower():
            raise StiffnessError(f"integration stalled near r={sol.t[-1]:g}: {sol.message}")
        raise IntegrationError(sol.message)
    end_kind = EndpointKind.INTEGRATION_LIMIT
    if sol.status == 1:
        for kind, hits in zip(kinds, sol.t_events):
            if len(hits):
                end_kind = kind
                break
        logger.info("event %s at r=%.12g", end_kind.value, sol.t[-1])
    return _Leg(dense=sol.sol, start=r0, end=float(sol.t[-1]), end_kind=end_kind)


def _grid(start, end, step):
    span = end - start
    count = int(math.floor(abs(span) / step + 1e-9))
    grid = start + math.copysign(step, span) * np.arange(count + 1)
    if abs(grid[-1] - end) > 1e-9 * step:
        grid = np.append(grid, end)
    return grid


def _frame(params, r, phi, p, f, ddphi=None):
    if ddphi is None:
        ddphi = _rhs(params.n, params.rho, params.rbar, phi, p)
    return pd.DataFrame(
        {"r": r, "phi": phi, "dphi": p, "ddphi": ddphi, "f": f, "R": p + params.rho},
        columns=SAMPLE_COLUMNS,
    )


def _leg_samples(params, leg: _Leg, step, include_start=True):
    grid = _grid(leg.start, leg.end, step)
    if not include_start:
        grid = grid[1:]
    y = leg.dense(grid)
    return _frame(params, grid, y[0], y[1], y[2])


def _integrate_from_origin(params, start: OriginStart, limits):
    coef = series_origin(params, start.kappa, start.order)
    # two more terms only to estimate the series' radius of convergence
    radius_coef = series_origin(params, start.kappa, start.order + 2)
    eps = seed_radius(radius_coef, limits.rtol, start.order)
    if not eps < limits.r_max:
        raise ConfigError(f"r_max={limits.r_max} is inside the series seed radius {eps:g}")
    series = Polynomial(coef)
    dseries, ddseries, fseries = series.deriv(), series.deriv(2), series.integ()
    logger.info("origin seed at r=%.6g from order-%d series %s", eps, start.order, coef)

    seed = [series(eps), dseries(eps), fseries(eps)]
    leg = _integrate_leg(params, seed, eps, limits.r_max, limits)

    grid = _grid(0.0, leg.end, limits.sample_step)
    inner = grid[grid < eps]
    outer = grid[grid >= eps]
    phi_in = series(inner)
    p_in = dseries(inner)
    dd_in = np.where(
        inner > 0,
        _rhs(params.n, params.rho, params.rbar, np.where(inner > 0, phi_in, 1.0), p_in),
        ddseries(inner),
    )
    y = leg.dense(outer)
    samples = pd.concat(
        [
            _frame(params, inner, phi_in, p_in, fseries(inner), dd_in),
            _frame(params, outer, y[0], y[1], y[2]),
        ],
        ignore_index=True,
    )
    domain = ProfileDomain(
        start=0.0, end=leg.end, start_kind=EndpointKind.CRITICAL_POINT, end_kind=leg.end_kind
    )
    return samples, domain, (f"origin seed radius {eps:.6g}",)


def _integrate_from_state(params, init: ProfileState, direction: Direction, limits, f0=0.0):
    if init.phi == 0:
        raise SingularStateError("initial phi is zero; use an origin start")
    y0 = [init.phi, init.p, f0]
    notes = []
    pieces = []
    start = end = init.r
    start_kind = end_kind = EndpointKind.INTEGRATION_LIMIT

    if direction in (Direction.BACKWARD, Direction.BOTH):
        r_min = limits.backward_limit
        if not r_min < init.r:
            raise ConfigError(f"backward limit {r_min} must lie below the start r={init.r}")
        if params.rho > 0:
            message = "backward integration of a shrinking soliton is anti-damped"
            warnings.warn(message)
            notes.append(message)
        back = _integrate_leg(params, y0, init.r, r_min, limits)
        pieces.append(_leg_samples(params, back, limits.sample_step).iloc[::-1])
        start, start_kind = back.end, back.end_kind

    if direction in (Direction.FORWARD, Direction.BOTH):
        if not limits.r_max > init.r:
            raise ConfigError(f"r_max={limits.r_max} must exceed the start r={init.r}")
        fwd = _integrate_leg(params, y0, init.r, limits.r_max, limits)
        pieces.append(_leg_samples(params, fwd, limits.sample_step, include_start=not pieces))
        end, end_kind = fwd.end, fwd.end_kind

    samples = pd.concat(pieces, ignore_index=True)
    domain = ProfileDomain(start=start, end=end, start_kind=start_kind, end_kind=end_kind)
    return samples, domain, tuple(notes)


def integrate(
    params: SolitonParams,
    init: Union[ProfileState, OriginStart],
    direction: Union[Direction, str] = Direction.FORWARD,
    limits: Optional[IntegrationLimits] = None,
) -> SolitonProfile:
    """Integrate the profile ODE and return a classified SolitonProfile.

    Initial states with phi < 0 are integrated in the reflected coordinate r -> -r, where the
    state becomes (-phi, p); the returned profile is flagged ``reflected``.
    """
    from yamabepy.soliton.classify import classify

    limits = limits or IntegrationLimits()
    direction = Direction(direction)
    reflected = False
    if isinstance(init, OriginStart):
        if direction != Direction.FORWARD:
            raise ConfigError("an origin start can only be integrated forward")
        samples, domain, notes = _integrate_from_origin(params, init, limits)
    else:
        if init.phi < 0:
            init = ProfileState(r=-init.r, phi=-init.phi, p=init.p)
            reflected = True
            logger.info("phi < 0 at the start, integrating in the reflected coordinate")
        samples, domain, notes = _integrate_from_state(params, init, direction, limits)

    profile = SolitonProfile(
        params=params, samples=samples, domain=domain, reflected=reflected, notes=notes
    )
    report = classify(profile, phi_min=limits.phi_min)
    logger.info(
        "profile on [%.6g, %.6g] (%s, %s): %s",
        domain.start,
        domain.end,
        domain.start_kind.value,
        domain.end_kind.value,
        report.classification.value,
    )
    return profile.with_classification(report.classification)


def fixed_step_oracle(params: SolitonParams, state: ProfileState, r_end: float, h: float):
    "Classical fourth-order Runge-Kutta with a fixed step (last step trimmed to land on r_end)"
    if h <= 0:
        raise ConfigError(f"oracle step must be positive, got {h}")
    n, rho, rbar = params.n, params.rho, params.rbar
    steps = max(1, math.ceil(abs(r_end - state.r) / h - 1e-9))
    dr = (r_end - state.r) / steps
    phi, p = state.phi, state.p
    for _ in range(steps):
        k1p, k1v = p, _rhs(n, rho, rbar, phi, p)
        k2p = p + 0.5 * dr * k1v
        k2v = _rhs(n, rho, rbar, phi + 0.5 * dr * k1p, k2p)
        k3p = p + 0.5 * dr * k2v
        k3v = _rhs(n, rho, rbar, phi + 0.5 * dr * k2p, k3p)
        k4p = p + dr * k3v
        k4v = _rhs(n, rho, rbar, phi + dr * k3p, k4p)
        phi += dr * (k1p + 2.0 * k2p + 2.0 * k3p + k4p) / 6.0
        p += dr * (k1v + 2.0 * k2v + 2.0 * k3v + k4v) / 6.0
    return ProfileState(r=r_end, phi=phi, p=p)


def origin_seed_state(params: SolitonParams, start: OriginStart, tol: float) -> ProfileState:
    "The state at which ``integrate`` hands an origin start over to the integrator"
    coef = series_origin(params, start.kappa, start.order)
    eps = seed_radius(series_origin(params, start.kappa, start.order + 2), tol, start.order)
    series = Polynomial(coef)
    return ProfileState(r=eps, phi=float(series(eps)), p=float(series.deriv()(eps)))


# -- product equilibrium ------------------------------------------------------------------------


@dataclass(frozen=True)
class EquilibriumLinearization:
    """delta'' + damping delta' + stiffness delta = 0 about phi0 = sqrt(Rbar/rho)"""

    phi0: float
    damping: float
    stiffness: float
    roots: np.ndarray

    @property
    def forward_stable(self) -> bool:
        return bool(np.all(self.roots.real < 0))


def equilibrium_linearization(params: SolitonParams) -> EquilibriumLinearization:
    if not (params.rho > 0 and params.rbar > 0):
        raise ConfigError("the product equilibrium needs rho > 0 and Rbar > 0")
    n = params.n
    phi0 = math.sqrt(params.rbar / params.rho)
    damping = phi0 / (2.0 * (n - 1))
    stiffness = params.rho / (n - 1)
    return EquilibriumLinearization(
        phi0=phi0, damping=damping, stiffness=stiffness, roots=np.roots([1.0, damping, stiffness])
    )


def perturb_equilibrium(
    params: SolitonParams, amplitude: float, limits: Optional[IntegrationLimits] = None
) -> SolitonProfile:
    """Integrate both ways from (phi0 + amplitude, p = 0) at r = 0.

    Exploratory only: nothing is claimed about completeness of the resulting metrics.
    """
    phi0 = equilibrium_linearization(params).phi0
    start = ProfileState(r=0.0, phi=phi0 + amplitude, p=0.0)
    return integrate(params, start, Direction.BOTH, limits)
