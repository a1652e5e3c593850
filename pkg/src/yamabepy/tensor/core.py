"""
Finite-difference differential geometry on a single coordinate chart.

Given an evaluable metric g_ij(x) (and optionally a scalar field), compute Christoffel symbols,
the fully covariant Riemann tensor, Ricci, scalar curvature, Weyl tensor, gradient and Hessian
at a point using second-order central differences with one global step ``h``.

Sign convention: R_ijkl = g(R(d_i, d_j) d_l, d_k), so a space of constant sectional curvature K
has R_ijkl = K (g_ik g_jl - g_il g_jk), Ric_jl = g^ik R_ijkl and the unit round sphere has
positive scalar curvature (R = 2 for the unit 2-sphere).

All functions are pure; nothing here holds state.
"""
from dataclasses import dataclass
from typing import Callable, Optional

import numpy as np
import scipy.linalg

from yamabepy.errors import BoundaryMarginError, DegenerateMetricError, DimensionError

DEFAULT_STEP = 1.0e-3


@dataclass(frozen=True)
class MetricChart:
    """Coordinate metric on an n-dimensional box.

    ``metric_at`` maps a point (n reals) to the symmetric n x n matrix g_ij, ``domain_box`` is an
    (n, 2) array of closed intervals on which evaluation is valid.
    """

    dim: int
    metric_at: Callable[[np.ndarray], np.ndarray]
    domain_box: np.ndarray

    def __post_init__(self):
        box = np.asarray(self.domain_box, dtype=float)
        if self.dim < 2:
            raise DimensionError(f"chart dimension must be >= 2, got {self.dim}")
        if box.shape != (self.dim, 2) or np.any(box[:, 0] >= box[:, 1]):
            raise DimensionError(f"domain_box must be ({self.dim}, 2) with lo < hi, got {box}")
        object.__setattr__(self, "domain_box", box)

    def metric(self, x) -> np.ndarray:
        "Evaluate g_ij at x as a float array"
        return np.asarray(self.metric_at(np.asarray(x, dtype=float)), dtype=float)

    def check_point(self, x, margin: float) -> np.ndarray:
        "Return x as an array, raising if it is not ``margin`` inside the domain box"
        x = np.asarray(x, dtype=float)
        if x.shape != (self.dim,):
            raise DimensionError(f"point must have {self.dim} coordinates, got shape {x.shape}")
        lo, hi = self.domain_box[:, 0], self.domain_box[:, 1]
        if np.any(x - lo < margin) or np.any(hi - x < margin):
            raise BoundaryMarginError(
                f"point {x} lies within {margin:g} of the chart boundary {self.domain_box.tolist()}"
            )
        return x

    def is_positive_definite_on(self, points) -> bool:
        "Cholesky-style check of g on a set of sample points"
        for x in np.atleast_2d(points):
            try:
                _factor(self.metric(x))
            except DegenerateMetricError:
                return False
        return True


@dataclass(frozen=True)
class ScalarFieldOnChart:
    "A smooth scalar (e.g. the soliton potential f) given as a function of chart coordinates"

    value_at: Callable[[np.ndarray], float]

    def __call__(self, x) -> float:
        return float(self.value_at(np.asarray(x, dtype=float)))


@dataclass(frozen=True)
class CurvatureAtPoint:
    christoffel: np.ndarray
    riemann: np.ndarray
    ricci: np.ndarray
    scalar: float
    metric: np.ndarray
    weyl: Optional[np.ndarray] = None


@dataclass(frozen=True)
class GradientHessian:
    """First and second covariant derivatives of a scalar field at one point.

    ``differential`` is df (covector), ``gradient`` the raised vector g^ij d_j f.
    """

    differential: np.ndarray
    gradient: np.ndarray
    norm_squared: float
    hessian: np.ndarray


def _factor(g):
    g = np.asarray(g, dtype=float)
    if not np.allclose(g, g.T, rtol=0.0, atol=1e-12 * max(1.0, np.abs(g).max())):
        raise DegenerateMetricError("metric matrix is not symmetric")
    try:
        return scipy.linalg.cho_factor(g, lower=True)
    except np.linalg.LinAlgError as err:
        raise DegenerateMetricError(f"metric is not positive definite: {err}") from err


def inverse_metric(g) -> np.ndarray:
    "Invert g by Cholesky factorization; fails (no regularization) if g is not positive definite"
    factor = _factor(g)
    return scipy.linalg.cho_solve(factor, np.eye(len(g)))


def orthonormal_frame(g) -> np.ndarray:
    "Columns form a g-orthonormal frame, E^T g E = I"
    lower = np.linalg.cholesky(np.asarray(g, dtype=float))
    return np.linalg.inv(lower).T


def frame_components(tensor, g) -> np.ndarray:
    "Components of a covariant tensor of any rank in a g-orthonormal frame"
    frame = orthonormal_frame(g)
    out = np.asarray(tensor, dtype=float)
    for axis in range(out.ndim):
        out = np.moveaxis(np.tensordot(out, frame, axes=([axis], [0])), -1, axis)
    return out


def _metric_derivatives(chart: MetricChart, x, h, second=True):
    """g, dg[k, i, j] = d_k g_ij and optionally ddg[a, b, i, j] = d_a d_b g_ij at x"""
    n = chart.dim
    eye = np.eye(n) * h
    g0 = chart.metric(x)
    plus = [chart.metric(x + eye[k]) for k in range(n)]
    minus = [chart.metric(x - eye[k]) for k in range(n)]
    dg = np.array([(plus[k] - minus[k]) / (2.0 * h) for k in range(n)])
    if not second:
        return g0, dg, None

    ddg = np.empty((n, n, n, n))
    for a in range(n):
        ddg[a, a] = (plus[a] - 2.0 * g0 + minus[a]) / (h * h)
        for b in range(a + 1, n):
            mixed = (
                chart.metric(x + eye[a] + eye[b])
                - chart.metric(x + eye[a] - eye[b])
                - chart.metric(x - eye[a] + eye[b])
                + chart.metric(x - eye[a] - eye[b])
            ) / (4.0 * h * h)
            ddg[a, b] = mixed
            ddg[b, a] = mixed
    return g0, dg, ddg


def _christoffel_from(ginv, dg):
    # first kind: Gamma_lij = 1/2 (d_i g_jl + d_j g_il - d_l g_ij)
    first = 0.5 * (
        np.einsum("ijl->lij", dg) + np.einsum("jil->lij", dg) - dg
    )
    return np.einsum("kl,lij->kij", ginv, first)


def christoffel(chart: MetricChart, x, h: float = DEFAULT_STEP) -> np.ndarray:
    """Christoffel symbols Gamma^k_ij (array index [k, i, j]) at x.

    Requires x at least 2h inside the domain box.
    """
    if h <= 0:
        raise ValueError(f"step size must be positive, got {h}")
    x = chart.check_point(x, 2.0 * h)
    g0, dg, _ = _metric_derivatives(chart, x, h, second=False)
    return _christoffel_from(inverse_metric(g0), dg)


def riemann_ricci_scalar(chart: MetricChart, x, h: float = DEFAULT_STEP) -> CurvatureAtPoint:
    """Riemann, Ricci and scalar curvature at x.

    R_ijkl = 1/2 (d_j d_k g_il + d_i d_l g_jk - d_i d_k g_jl - d_j d_l g_ik)
             + g_pq (Gamma^p_jk Gamma^q_il - Gamma^p_jl Gamma^q_ik)

    The second-derivative stencil is symmetric in its two directions, so the algebraic
    symmetries of R_ijkl and the first Bianchi identity hold to round-off.
    """
    if h <= 0:
        raise ValueError(f"step size must be positive, got {h}")
    x = chart.check_point(x, 4.0 * h)
    g0, dg, ddg = _metric_derivatives(chart, x, h)
    ginv = inverse_metric(g0)
    gamma = _christoffel_from(ginv, dg)

    second = 0.5 * (
        np.einsum("jkil->ijkl", ddg)
        + np.einsum("iljk->ijkl", ddg)
        - np.einsum("ikjl->ijkl", ddg)
        - np.einsum("jlik->ijkl", ddg)
    )
    quadratic = np.einsum("pq,pjk,qil->ijkl", g0, gamma, gamma) - np.einsum(
        "pq,pjl,qik->ijkl", g0, gamma, gamma
    )
    riemann = second + quadratic
    ricci = np.einsum("ik,ijkl->jl", ginv, riemann)
    ricci = 0.5 * (ricci + ricci.T)
    scalar = float(np.einsum("jl,jl->", ginv, ricci))
    return CurvatureAtPoint(
        christoffel=gamma, riemann=riemann, ricci=ricci, scalar=scalar, metric=g0
    )


def kulkarni_nomizu(a, b) -> np.ndarray:
    "(a o b)_ijkl = a_ik b_jl + a_jl b_ik - a_il b_jk - a_jk b_il"
    return (
        np.einsum("ik,jl->ijkl", a, b)
        + np.einsum("jl,ik->ijkl", a, b)
        - np.einsum("il,jk->ijkl", a, b)
        - np.einsum("jk,il->ijkl", a, b)
    )


def weyl_from_tensors(riemann, ricci, scalar, g) -> np.ndarray:
    "W = Rm - Ric o g / (n-2) + R g o g / (2 (n-1)(n-2))"
    n = len(g)
    if n < 3:
        raise DimensionError(f"Weyl tensor needs dimension >= 3, got {n}")
    return (
        np.asarray(riemann)
        - kulkarni_nomizu(ricci, g) / (n - 2)
        + scalar * kulkarni_nomizu(g, g) / (2.0 * (n - 1) * (n - 2))
    )


def weyl(curv: CurvatureAtPoint, g=None) -> np.ndarray:
    "Weyl tensor W_ijkl from a populated CurvatureAtPoint"
    g = curv.metric if g is None else np.asarray(g, dtype=float)
    return weyl_from_tensors(curv.riemann, curv.ricci, curv.scalar, g)


def with_weyl(curv: CurvatureAtPoint) -> CurvatureAtPoint:
    "Copy of ``curv`` with its weyl field filled in"
    return CurvatureAtPoint(
        christoffel=curv.christoffel,
        riemann=curv.riemann,
        ricci=curv.ricci,
        scalar=curv.scalar,
        metric=curv.metric,
        weyl=weyl(curv),
    )


def gradient_and_hessian(
    chart: MetricChart, field: ScalarFieldOnChart, x, h: float = DEFAULT_STEP
) -> GradientHessian:
    "df, grad f, |grad f|^2 and Hess_ij = d_i d_j f - Gamma^k_ij d_k f at x"
    if h <= 0:
        raise ValueError(f"step size must be positive, got {h}")
    x = chart.check_point(x, 2.0 * h)
    n = chart.dim
    eye = np.eye(n) * h
    f0 = field(x)
    plus = np.array([field(x + eye[k]) for k in range(n)])
    minus = np.array([field(x - eye[k]) for k in range(n)])
    df = (plus - minus) / (2.0 * h)

    ddf = np.empty((n, n))
    for a in range(n):
        ddf[a, a] = (plus[a] - 2.0 * f0 + minus[a]) / (h * h)
        for b in range(a + 1, n):
            mixed = (
                field(x + eye[a] + eye[b])
                - field(x + eye[a] - eye[b])
                - field(x - eye[a] + eye[b])
                + field(x - eye[a] - eye[b])
            ) / (4.0 * h * h)
            ddf[a, b] = mixed
            ddf[b, a] = mixed

    g0, dg, _ = _metric_derivatives(chart, x, h, second=False)
    ginv = inverse_metric(g0)
    gamma = _christoffel_from(ginv, dg)
    hessian = ddf - np.einsum("kij,k->ij", gamma, df)
    gradient = ginv @ df
    return GradientHessian(
        differential=df,
        gradient=gradient,
        norm_squared=float(df @ gradient),
        hessian=hessian,
    )


def gradient_norm_squared(chart: MetricChart, field: ScalarFieldOnChart, x, h=DEFAULT_STEP):
    "|grad f|^2 = g^ij d_i f d_j f from first differences only"
    x = chart.check_point(x, h)
    n = chart.dim
    eye = np.eye(n) * h
    df = np.array([(field(x + eye[k]) - field(x - eye[k])) / (2.0 * h) for k in range(n)])
    return float(df @ inverse_metric(chart.metric(x)) @ df)


def riemann_symmetry_residuals(riemann) -> dict:
    "Max-norm violations of the algebraic symmetries of a covariant Riemann tensor"
    rm = np.asarray(riemann)
    bianchi = rm + np.einsum("iklj->ijkl", rm) + np.einsum("iljk->ijkl", rm)
    return {
        "antisymmetry_ij": float(np.abs(rm + np.einsum("jikl->ijkl", rm)).max()),
        "antisymmetry_kl": float(np.abs(rm + np.einsum("ijlk->ijkl", rm)).max()),
        "pair_symmetry": float(np.abs(rm - np.einsum("klij->ijkl", rm)).max()),
        "first_bianchi": float(np.abs(bianchi).max()),
    }


def weyl_trace_residual(weyl_tensor, g) -> float:
    "Largest single contraction of W with the inverse metric over any index pair"
    w = np.asarray(weyl_tensor)
    ginv = inverse_metric(g)
    worst = 0.0
    letters = "ijkl"
    for p in range(4):
        for q in range(p + 1, 4):
            rest = "".join(c for idx, c in enumerate(letters) if idx not in (p, q))
            subscripts = f"{letters[p]}{letters[q]},{letters}->{rest}"
            worst = max(worst, float(np.abs(np.einsum(subscripts, ginv, w)).max()))
    return worst
