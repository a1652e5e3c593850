"""
Catalog of (n-1)-dimensional fibers (N, gbar) with closed-form curvature.

Round spheres and hyperbolic spaces use normalized conformal charts,

    gbar_ab(v) = delta_ab / (1 + kappa |v|^2 / 4)^2,

which is the stereographic chart 4 kappa^-1 delta / (1 + |u|^2)^2 rescaled by v = 2 u / sqrt(kappa)
so that gbar = identity at the chart center. The coordinate box is the cube inscribed in the
ball |u| <= 1/2, away from the chart's singular set.
"""
from dataclasses import dataclass
from enum import Enum
from typing import Optional, Tuple

import numpy as np

from yamabepy.errors import ConfigError, InsufficientFiberDataError
from yamabepy.tensor.core import kulkarni_nomizu, weyl_from_tensors


class FiberKind(str, Enum):
    ROUND_SPHERE = "RoundSphere"
    HYPERBOLIC = "Hyperbolic"
    FLAT = "Flat"
    PRODUCT_OF_ROUND_SPHERES = "ProductOfRoundSpheres"
    ABSTRACT_CONSTANT_SCALAR = "AbstractConstantScalar"


@dataclass(frozen=True)
class FiberGeometry:
    """Fiber of a warped product, with constant scalar curvature ``scalar_curvature``.

    ``einstein_constant`` is set iff Ric(gbar) = lambda gbar. ``factors`` lists (dim, radius) of
    round sphere factors for ProductOfRoundSpheres; ``sectional_curvature`` is set for space forms.
    """

    fiber_dim: int
    kind: FiberKind
    scalar_curvature: float
    einstein_constant: Optional[float]
    is_space_form: bool
    sectional_curvature: Optional[float] = None
    factors: Tuple[Tuple[int, float], ...] = ()

    # -- constructors -------------------------------------------------------------------------

    @classmethod
    def round_sphere(cls, fiber_dim: int, kappa: float = 1.0) -> "FiberGeometry":
        if kappa <= 0:
            raise ConfigError(f"round sphere needs kappa > 0, got {kappa}")
        return cls._space_form(fiber_dim, FiberKind.ROUND_SPHERE, kappa)

    @classmethod
    def hyperbolic(cls, fiber_dim: int, kappa: float = -1.0) -> "FiberGeometry":
        if kappa >= 0:
            raise ConfigError(f"hyperbolic fiber needs kappa < 0, got {kappa}")
        return cls._space_form(fiber_dim, FiberKind.HYPERBOLIC, kappa)

    @classmethod
    def flat(cls, fiber_dim: int) -> "FiberGeometry":
        return cls._space_form(fiber_dim, FiberKind.FLAT, 0.0)

    @classmethod
    def _space_form(cls, fiber_dim, kind, kappa):
        _check_fiber_dim(fiber_dim)
        return cls(
            fiber_dim=fiber_dim,
            kind=kind,
            scalar_curvature=kappa * fiber_dim * (fiber_dim - 1),
            einstein_constant=kappa * (fiber_dim - 1),
            is_space_form=True,
            sectional_curvature=float(kappa),
        )

    @classmethod
    def product_of_round_spheres(cls, factors) -> "FiberGeometry":
        factors = tuple((int(dim), float(radius)) for dim, radius in factors)
        if not factors:
            raise ConfigError("product fiber needs at least one factor")
        for dim, radius in factors:
            if dim < 1 or radius <= 0:
                raise ConfigError(f"invalid sphere factor (dim={dim}, radius={radius})")
        fiber_dim = sum(dim for dim, _ in factors)
        _check_fiber_dim(fiber_dim)
        scalar = sum(dim * (dim - 1) / radius**2 for dim, radius in factors)
        lambdas = {(dim - 1) / radius**2 for dim, radius in factors}
        einstein = lambdas.pop() if len(lambdas) == 1 else None
        single = len(factors) == 1
        return cls(
            fiber_dim=fiber_dim,
            kind=FiberKind.PRODUCT_OF_ROUND_SPHERES,
            scalar_curvature=scalar,
            einstein_constant=einstein,
            is_space_form=single,
            sectional_curvature=1.0 / factors[0][1] ** 2 if single else None,
            factors=factors,
        )

    @classmethod
    def abstract(cls, fiber_dim: int, scalar_curvature: float) -> "FiberGeometry":
        "Fiber known only through its constant scalar curvature (enough for the profile ODE)"
        _check_fiber_dim(fiber_dim)
        return cls(
            fiber_dim=fiber_dim,
            kind=FiberKind.ABSTRACT_CONSTANT_SCALAR,
            scalar_curvature=float(scalar_curvature),
            einstein_constant=None,
            is_space_form=False,
        )

    # -- coordinate data ----------------------------------------------------------------------

    @property
    def has_coordinates(self) -> bool:
        return self.kind != FiberKind.ABSTRACT_CONSTANT_SCALAR

    def _require_coordinates(self):
        if not self.has_coordinates:
            raise InsufficientFiberDataError(
                f"{self.kind.value} fiber carries only its scalar curvature"
            )

    def _blocks(self):
        "(start index, dim, kappa) for each constant-curvature block of the fiber chart"
        if self.kind == FiberKind.PRODUCT_OF_ROUND_SPHERES:
            start = 0
            blocks = []
            for dim, radius in self.factors:
                blocks.append((start, dim, 1.0 / radius**2))
                start += dim
            return blocks
        return [(0, self.fiber_dim, self.sectional_curvature)]

    def coordinate_half_width(self) -> np.ndarray:
        "Per-coordinate half width of the fiber coordinate box"
        self._require_coordinates()
        widths = np.empty(self.fiber_dim)
        for start, dim, kappa in self._blocks():
            # |u| <= 1/2 in the unnormalized chart <=> |v| <= 1/sqrt(|kappa|)
            radius = 1.0 / np.sqrt(abs(kappa)) if kappa != 0 else 1.0
            widths[start : start + dim] = radius / np.sqrt(dim)
        return widths

    def coordinate_box(self) -> np.ndarray:
        half = self.coordinate_half_width()
        return np.column_stack([-half, half])

    def metric_at(self, v) -> np.ndarray:
        "gbar_ab at fiber coordinates v"
        self._require_coordinates()
        v = np.asarray(v, dtype=float)
        gbar = np.zeros((self.fiber_dim, self.fiber_dim))
        for start, dim, kappa in self._blocks():
            block = v[start : start + dim]
            conformal = 1.0 / (1.0 + 0.25 * kappa * float(block @ block)) ** 2
            idx = slice(start, start + dim)
            gbar[idx, idx] = conformal * np.eye(dim)
        return gbar

    def riemann_at(self, v) -> np.ndarray:
        "Closed-form Rbar_abcd = sum over blocks of kappa (g_ac g_bd - g_ad g_bc)"
        gbar = self.metric_at(v)
        m = self.fiber_dim
        rbar = np.zeros((m, m, m, m))
        for start, dim, kappa in self._blocks():
            block = np.zeros_like(gbar)
            idx = slice(start, start + dim)
            block[idx, idx] = gbar[idx, idx]
            rbar += 0.5 * kappa * kulkarni_nomizu(block, block)
        return rbar

    def ricci_at(self, v) -> np.ndarray:
        gbar = self.metric_at(v)
        ric = np.zeros_like(gbar)
        for start, dim, kappa in self._blocks():
            idx = slice(start, start + dim)
            ric[idx, idx] = kappa * (dim - 1) * gbar[idx, idx]
        return ric

    def ricci_eigenvalues(self) -> Optional[np.ndarray]:
        "Eigenvalues of Rbar^a_b (constant over the fiber); None for abstract fibers"
        if not self.has_coordinates:
            return None
        return np.concatenate(
            [np.full(dim, kappa * (dim - 1)) for _, dim, kappa in self._blocks()]
        )

    def weyl_at(self, v) -> np.ndarray:
        "Weyl tensor of the fiber itself (zero when fiber_dim < 3)"
        gbar = self.metric_at(v)
        m = self.fiber_dim
        if m < 3 or self.is_space_form:
            return np.zeros((m, m, m, m))
        return weyl_from_tensors(
            self.riemann_at(v), self.ricci_at(v), self.scalar_curvature, gbar
        )

    def describe(self) -> dict:
        "Plain-data description for reports"
        out = {
            "kind": self.kind.value,
            "fiber_dim": self.fiber_dim,
            "scalar_curvature": self.scalar_curvature,
            "einstein_constant": self.einstein_constant,
            "is_space_form": self.is_space_form,
        }
        if self.sectional_curvature is not None:
            out["sectional_curvature"] = self.sectional_curvature
        if self.factors:
            out["factors"] = [list(factor) for factor in self.factors]
        return out


def _check_fiber_dim(fiber_dim):
    if fiber_dim < 2:
        raise ConfigError(f"fiber dimension must be >= 2, got {fiber_dim}")


def fiber_from_name(name: str, fiber_dim: int, kappa=None, factors=None, scalar_curvature=None):
    "Build a catalog fiber from a short name (sphere, hyperbolic, flat, product, abstract)"
    name = name.lower()
    if name == "sphere":
        return FiberGeometry.round_sphere(fiber_dim, 1.0 if kappa is None else kappa)
    if name == "hyperbolic":
        return FiberGeometry.hyperbolic(fiber_dim, -1.0 if kappa is None else kappa)
    if name == "flat":
        return FiberGeometry.flat(fiber_dim)
    if name == "product":
        if not factors:
            raise ConfigError("product fiber needs --factors dim:radius,...")
        fiber = FiberGeometry.product_of_round_spheres(factors)
        if fiber.fiber_dim != fiber_dim:
            raise ConfigError(
                f"product factors give fiber dimension {fiber.fiber_dim}, expected {fiber_dim}"
            )
        return fiber
    if name == "abstract":
        if scalar_curvature is None:
            raise ConfigError("abstract fiber needs its scalar curvature")
        return FiberGeometry.abstract(fiber_dim, scalar_curvature)
    raise ConfigError(f"unknown fiber {name!r}")
