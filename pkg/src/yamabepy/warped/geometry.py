"""
Closed-form geometry of the warped product g = dr^2 + phi(r)^2 gbar.

Coordinates are (x^1, ..., x^n) = (r, theta^2, ..., theta^n); fiber indices a, b, c, d run over
the last n-1 coordinates. Tensors returned by ``tensor_at`` are coordinate components in the
same chart that ``yamabepy.warped.chart.build_chart`` produces, so they can be compared directly
with the finite-difference engine.
"""
from dataclasses import dataclass

import numpy as np

from yamabepy.errors import DimensionError, InsufficientFiberDataError, SingularSampleError
from yamabepy.tensor.core import kulkarni_nomizu
from yamabepy.warped.fibers import FiberGeometry


@dataclass(frozen=True)
class WarpingSample:
    "Warping function and its first two derivatives at r"

    r: float
    phi: float
    dphi: float
    ddphi: float


def _require_nonsingular(s: WarpingSample):
    if s.phi == 0:
        raise SingularSampleError(f"phi vanishes at r={s.r}")


def _check_dim(fiber: FiberGeometry, n: int):
    if n != fiber.fiber_dim + 1:
        raise DimensionError(f"n={n} does not match fiber dimension {fiber.fiber_dim}")


def _embed_fiber(block, n):
    "Place a fiber tensor (all indices a, b, ...) into the n-dimensional index range"
    out = np.zeros((n,) * block.ndim)
    out[(slice(1, None),) * block.ndim] = block
    return out


@dataclass(frozen=True)
class RiemannClosedForm:
    """R_1a1b = radial * gbar_ab, R_1abc = 0,
    R_abcd = fiber_scale * Rbar_abcd + fiber_shift * (gbar_ac gbar_bd - gbar_ad gbar_bc)"""

    radial: float
    fiber_scale: float
    fiber_shift: float
    fiber: FiberGeometry

    @property
    def space_form_coefficient(self) -> float:
        "For space-form fibers R_abcd = c (gbar_ac gbar_bd - gbar_ad gbar_bc); returns c"
        if not self.fiber.is_space_form:
            raise InsufficientFiberDataError("fiber is not a space form")
        return self.fiber_scale * self.fiber.sectional_curvature + self.fiber_shift

    def tensor_at(self, v) -> np.ndarray:
        fiber = self.fiber
        n = fiber.fiber_dim + 1
        gbar = fiber.metric_at(v)
        abcd = self.fiber_scale * fiber.riemann_at(v) + 0.5 * self.fiber_shift * kulkarni_nomizu(
            gbar, gbar
        )
        rm = _embed_fiber(abcd, n)
        radial = self.radial * gbar
        rm[0, 1:, 0, 1:] = radial
        rm[1:, 0, 1:, 0] = radial
        rm[0, 1:, 1:, 0] = -radial.T
        rm[1:, 0, 0, 1:] = -radial.T
        return rm


def riemann_closed_form(s: WarpingSample, fiber: FiberGeometry) -> RiemannClosedForm:
    if not fiber.has_coordinates:
        raise InsufficientFiberDataError(
            "Riemann tensor needs the fiber curvature tensor, not only its scalar curvature"
        )
    return RiemannClosedForm(
        radial=-s.phi * s.ddphi,
        fiber_scale=s.phi**2,
        fiber_shift=-((s.phi * s.dphi) ** 2),
        fiber=fiber,
    )


@dataclass(frozen=True)
class RicciClosedForm:
    "R_11, R_1a = 0 and R_ab = Rbar_ab - shift * gbar_ab"

    r11: float
    shift: float
    fiber: FiberGeometry
    phi: float

    def tensor_at(self, v) -> np.ndarray:
        fiber = self.fiber
        if not fiber.has_coordinates:
            raise InsufficientFiberDataError("fiber Ricci tensor is not available")
        n = fiber.fiber_dim + 1
        ric = _embed_fiber(fiber.ricci_at(v) - self.shift * fiber.metric_at(v), n)
        ric[0, 0] = self.r11
        return ric

    def fiber_eigenvalues(self) -> np.ndarray:
        "Eigenvalues of R^a_b restricted to the level set {r} x N"
        lambdas = self.fiber.ricci_eigenvalues()
        if lambdas is None:
            raise InsufficientFiberDataError("fiber Ricci eigenvalues are not available")
        return (lambdas - self.shift) / self.phi**2


def ricci_closed_form(s: WarpingSample, fiber: FiberGeometry, n: int) -> RicciClosedForm:
    _check_dim(fiber, n)
    _require_nonsingular(s)
    return RicciClosedForm(
        r11=-(n - 1) * s.ddphi / s.phi,
        shift=(n - 2) * s.dphi**2 + s.phi * s.ddphi,
        fiber=fiber,
        phi=s.phi,
    )


def scalar_closed_form(s: WarpingSample, rbar: float, n: int) -> float:
    "R = Rbar / phi^2 - (n-1)(n-2) (phi'/phi)^2 - 2 (n-1) phi''/phi"
    _require_nonsingular(s)
    ratio = s.dphi / s.phi
    return rbar / s.phi**2 - (n - 1) * (n - 2) * ratio**2 - 2.0 * (n - 1) * s.ddphi / s.phi


@dataclass(frozen=True)
class WeylClosedForm:
    """W_1a1b (independent of phi), W_1abc = 0 and W_abcd.

    For Einstein fibers W_abcd = phi^2 Wbar_abcd. In general the trace-free fiber Ricci tensor
    E contributes phi^2 (E o gbar)_abcd / ((n-2)(n-3)) on top of that.
    """

    fiber: FiberGeometry
    n: int
    phi: float

    @property
    def is_identically_zero(self) -> bool:
        return self.fiber.is_space_form

    def radial_at(self, v) -> np.ndarray:
        "W_1a1b as a fiber matrix"
        fiber, n = self.fiber, self.n
        m = fiber.fiber_dim
        if fiber.einstein_constant is not None:
            return np.zeros((m, m))
        gbar = fiber.metric_at(v)
        return fiber.scalar_curvature * gbar / ((n - 1) * (n - 2)) - fiber.ricci_at(v) / (n - 2)

    def fiber_part_at(self, v) -> np.ndarray:
        "W_abcd"
        fiber, n = self.fiber, self.n
        m = fiber.fiber_dim
        if fiber.is_space_form or m < 2:
            return np.zeros((m,) * 4)
        part = fiber.weyl_at(v)
        if fiber.einstein_constant is None:
            gbar = fiber.metric_at(v)
            traceless = fiber.ricci_at(v) - fiber.scalar_curvature * gbar / m
            part = part + kulkarni_nomizu(traceless, gbar) / ((n - 2) * (n - 3))
        return self.phi**2 * part

    def tensor_at(self, v) -> np.ndarray:
        n = self.n
        if self.is_identically_zero:
            return np.zeros((n,) * 4)
        w = _embed_fiber(self.fiber_part_at(v), n)
        radial = self.radial_at(v)
        w[0, 1:, 0, 1:] = radial
        w[1:, 0, 1:, 0] = radial
        w[0, 1:, 1:, 0] = -radial.T
        w[1:, 0, 0, 1:] = -radial.T
        return w


def weyl_closed_form(s: WarpingSample, fiber: FiberGeometry, n: int) -> WeylClosedForm:
    _check_dim(fiber, n)
    if n < 3:
        raise DimensionError(f"Weyl tensor needs n >= 3, got {n}")
    if not fiber.has_coordinates:
        raise InsufficientFiberDataError("Weyl tensor needs the fiber curvature tensor")
    return WeylClosedForm(fiber=fiber, n=n, phi=s.phi)


@dataclass(frozen=True)
class SecondFundamentalForm:
    "h_ab = coefficient * g_ab on the level set {r}, mean curvature H"

    coefficient: float
    mean_curvature: float


def second_fundamental_form(s: WarpingSample, n: int) -> SecondFundamentalForm:
    _require_nonsingular(s)
    coefficient = s.dphi / s.phi
    return SecondFundamentalForm(coefficient=coefficient, mean_curvature=(n - 1) * coefficient)


def einstein_ode_residual(s: WarpingSample, lam: float, lam_bar: float, n: int) -> float:
    "phi'^2 + lam phi^2 / (n-1) - lam_bar / (n-2); zero iff the warped product is Einstein"
    return s.dphi**2 + lam * s.phi**2 / (n - 1) - lam_bar / (n - 2)
