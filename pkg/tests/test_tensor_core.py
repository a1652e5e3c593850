import numpy as np
import pytest

from yamabepy.errors import BoundaryMarginError, DegenerateMetricError, DimensionError
from yamabepy.tensor import core
from yamabepy.verify.checks import halving_ratio


def sphere_chart(dim, kappa=1.0):
    def metric_at(x):
        return np.eye(dim) / (1.0 + 0.25 * kappa * float(x @ x)) ** 2

    return core.MetricChart(dim=dim, metric_at=metric_at, domain_box=np.tile([-0.5, 0.5], (dim, 1)))


def polar_chart():
    def metric_at(x):
        return np.diag([1.0, x[0] ** 2])

    return core.MetricChart(dim=2, metric_at=metric_at, domain_box=[[0.5, 2.0], [-1.0, 1.0]])


def two_block_chart():
    "S^2(1) x S^2(2) in conformal coordinates, not conformally flat"

    def metric_at(x):
        c1 = 1.0 / (1.0 + 0.25 * float(x[:2] @ x[:2])) ** 2
        c2 = 1.0 / (1.0 + 0.0625 * float(x[2:] @ x[2:])) ** 2
        return np.diag([c1, c1, c2, c2])

    return core.MetricChart(dim=4, metric_at=metric_at, domain_box=np.tile([-0.5, 0.5], (4, 1)))


def test_sphere_constant_curvature():
    chart = sphere_chart(3, kappa=1.0)
    x = np.array([0.1, -0.2, 0.15])
    curv = core.riemann_ricci_scalar(chart, x)
    g = curv.metric
    expected = 0.5 * core.kulkarni_nomizu(g, g)
    np.testing.assert_allclose(curv.riemann, expected, atol=1e-5)
    np.testing.assert_allclose(curv.ricci, 2.0 * g, atol=1e-5)
    assert curv.scalar == pytest.approx(6.0, abs=1e-5)


def test_sphere_scalar_scales_with_kappa():
    chart = sphere_chart(2, kappa=4.0)
    curv = core.riemann_ricci_scalar(chart, [0.05, 0.1])
    assert curv.scalar == pytest.approx(8.0, abs=1e-4)


def test_polar_christoffel_and_flatness():
    chart = polar_chart()
    x = np.array([1.2, 0.3])
    gamma = core.christoffel(chart, x)
    assert gamma[0, 1, 1] == pytest.approx(-1.2, abs=1e-8)
    assert gamma[1, 0, 1] == pytest.approx(1 / 1.2, abs=1e-8)
    assert gamma[1, 1, 0] == pytest.approx(1 / 1.2, abs=1e-8)
    assert gamma[0, 0, 0] == pytest.approx(0.0, abs=1e-8)
    curv = core.riemann_ricci_scalar(chart, x)
    assert np.abs(curv.riemann).max() < 1e-6
    assert abs(curv.scalar) < 1e-6


def test_hessian_of_half_radius_squared_is_metric():
    chart = polar_chart()
    field = core.ScalarFieldOnChart(lambda x: 0.5 * x[0] ** 2)
    x = np.array([1.5, -0.4])
    out = core.gradient_and_hessian(chart, field, x)
    np.testing.assert_allclose(out.hessian, chart.metric(x), atol=1e-7)
    np.testing.assert_allclose(out.gradient, [1.5, 0.0], atol=1e-8)
    assert out.norm_squared == pytest.approx(2.25, abs=1e-8)
    assert core.gradient_norm_squared(chart, field, x) == pytest.approx(2.25, abs=1e-8)


def test_riemann_symmetries_hold_to_roundoff():
    curv = core.riemann_ricci_scalar(two_block_chart(), [0.1, -0.2, 0.3, 0.05])
    residuals = core.riemann_symmetry_residuals(curv.riemann)
    assert set(residuals) == {
        "antisymmetry_ij",
        "antisymmetry_kl",
        "pair_symmetry",
        "first_bianchi",
    }
    assert max(residuals.values()) < 1e-9


def test_weyl_trace_free_and_nonzero_on_product():
    curv = core.with_weyl(core.riemann_ricci_scalar(two_block_chart(), [0.1, -0.2, 0.3, 0.05]))
    assert core.weyl_trace_residual(curv.weyl, curv.metric) < 1e-8
    assert np.abs(core.frame_components(curv.weyl, curv.metric)).max() > 1e-2


def test_weyl_vanishes_on_sphere():
    curv = core.riemann_ricci_scalar(sphere_chart(4), [0.1, 0.0, -0.1, 0.2])
    w = core.weyl(curv)
    assert np.abs(core.frame_components(w, curv.metric)).max() < 1e-5


def test_frame_components_of_metric_is_identity():
    g = np.array([[2.0, 0.3], [0.3, 1.0]])
    np.testing.assert_allclose(core.frame_components(g, g), np.eye(2), atol=1e-14)
    np.testing.assert_allclose(core.inverse_metric(g) @ g, np.eye(2), atol=1e-14)


def test_boundary_margin():
    chart = sphere_chart(2)
    # 3h inside is enough for Christoffel symbols but not for curvature
    x = [0.5 - 3e-3, 0.0]
    core.christoffel(chart, x)
    with pytest.raises(BoundaryMarginError):
        core.riemann_ricci_scalar(chart, x)


def test_degenerate_metric():
    with pytest.raises(DegenerateMetricError):
        core.inverse_metric(np.diag([1.0, -1.0]))
    chart = core.MetricChart(
        dim=2, metric_at=lambda x: np.diag([1.0, 0.0]), domain_box=[[0.0, 1.0]] * 2
    )
    assert not chart.is_positive_definite_on([[0.5, 0.5]])
    with pytest.raises(DegenerateMetricError):
        core.christoffel(chart, [0.5, 0.5])


def test_dimension_errors():
    with pytest.raises(DimensionError):
        core.MetricChart(dim=1, metric_at=lambda x: np.eye(1), domain_box=[[0.0, 1.0]])
    with pytest.raises(DimensionError):
        core.MetricChart(dim=2, metric_at=lambda x: np.eye(2), domain_box=[[1.0, 0.0], [0.0, 1.0]])
    with pytest.raises(DimensionError):
        core.weyl_from_tensors(np.zeros((2,) * 4), np.zeros((2, 2)), 0.0, np.eye(2))
    with pytest.raises(DimensionError):
        sphere_chart(2).check_point([0.0, 0.0, 0.0], 1e-3)


def test_nonpositive_step():
    with pytest.raises(ValueError):
        core.riemann_ricci_scalar(sphere_chart(2), [0.0, 0.0], h=0.0)


def sphere_christoffel(x, kappa=1.0):
    "Exact Gamma^k_ij of the conformally flat sphere metric exp(2u) delta"
    x = np.asarray(x, dtype=float)
    du = -0.5 * kappa * x / (1.0 + 0.25 * kappa * float(x @ x))
    eye = np.eye(len(x))
    return (
        np.einsum("ki,j->kij", eye, du)
        + np.einsum("kj,i->kij", eye, du)
        - np.einsum("ij,k->kij", eye, du)
    )


def random_chart(seed, dim=3):
    "Smooth metric delta + 0.1 A(x) with bounded trigonometric entries"
    rng = np.random.default_rng(seed)
    waves = rng.normal(size=(dim, dim, dim))
    phases = rng.uniform(0.0, 2.0 * np.pi, size=(dim, dim))

    def metric_at(x):
        entries = 0.1 * np.sin(waves @ x + phases)
        return np.eye(dim) + 0.5 * (entries + entries.T)

    return core.MetricChart(dim=dim, metric_at=metric_at, domain_box=np.tile([-1.0, 1.0], (dim, 1)))


SPHERE_POINT = np.array([0.1, -0.2, 0.15])
EXPONENTIAL = core.ScalarFieldOnChart(lambda x: np.exp(0.5 * x[0]) + x[1] * x[2])


def exponential_hessian(x):
    gamma = sphere_christoffel(x)
    df = np.array([0.5 * np.exp(0.5 * x[0]), x[2], x[1]])
    ddf = np.array([[0.25 * np.exp(0.5 * x[0]), 0, 0], [0, 0, 1.0], [0, 1.0, 0]])
    return ddf - np.einsum("kij,k->ij", gamma, df)


def test_christoffel_second_order():
    chart = sphere_chart(3)
    expected = sphere_christoffel(SPHERE_POINT)

    def error(h):
        return np.abs(core.christoffel(chart, SPHERE_POINT, h) - expected).max()

    coarse, _, ratio = halving_ratio(error, 1e-2)
    assert coarse > 1e-9
    assert 3.5 <= ratio <= 4.5


def test_riemann_second_order():
    chart = sphere_chart(3)
    g = chart.metric(SPHERE_POINT)
    expected = 0.5 * core.kulkarni_nomizu(g, g)

    def error(h):
        curv = core.riemann_ricci_scalar(chart, SPHERE_POINT, h)
        return np.abs(curv.riemann - expected).max()

    coarse, _, ratio = halving_ratio(error, 1e-2)
    assert coarse > 1e-9
    assert 3.5 <= ratio <= 4.5


def test_hessian_second_order():
    chart = sphere_chart(3)
    expected = exponential_hessian(SPHERE_POINT)

    def error(h):
        out = core.gradient_and_hessian(chart, EXPONENTIAL, SPHERE_POINT, h)
        return np.abs(out.hessian - expected).max()

    coarse, _, ratio = halving_ratio(error, 1e-2)
    assert coarse > 1e-9
    assert 3.5 <= ratio <= 4.5


def test_tensor_ops_are_deterministic():
    chart = sphere_chart(3)
    first = core.riemann_ricci_scalar(chart, SPHERE_POINT)
    second = core.riemann_ricci_scalar(chart, SPHERE_POINT)
    for name in ("christoffel", "riemann", "ricci", "metric"):
        assert np.array_equal(getattr(first, name), getattr(second, name))
    assert first.scalar == second.scalar
    assert np.array_equal(
        core.christoffel(chart, SPHERE_POINT), core.christoffel(chart, SPHERE_POINT)
    )
    one = core.gradient_and_hessian(chart, EXPONENTIAL, SPHERE_POINT)
    two = core.gradient_and_hessian(chart, EXPONENTIAL, SPHERE_POINT)
    assert np.array_equal(one.hessian, two.hessian)
    assert np.array_equal(one.gradient, two.gradient)


@pytest.mark.parametrize("seed", [0, 1, 2])
def test_weyl_vanishes_in_dimension_three(seed):
    chart = random_chart(seed)
    x = np.array([0.2, -0.3, 0.1])
    curv = core.riemann_ricci_scalar(chart, x)
    # a generic metric, so the curvature itself is far from zero
    assert np.abs(curv.riemann).max() > 1e-3
    assert np.abs(core.frame_components(core.weyl(curv), curv.metric)).max() < 1e-7


def test_weyl_on_product_matches_exact_tensors():
    "S^2(1) x S^2(2): Rm = 1/2 g1 o g1 + 1/8 g2 o g2, Ric = g1 + g2 / 4, R = 5/2"
    chart = two_block_chart()
    x = np.array([0.1, -0.2, 0.3, 0.05])
    g = chart.metric(x)
    g1, g2 = np.zeros_like(g), np.zeros_like(g)
    g1[:2, :2], g2[2:, 2:] = g[:2, :2], g[2:, 2:]
    riemann = 0.5 * core.kulkarni_nomizu(g1, g1) + 0.125 * core.kulkarni_nomizu(g2, g2)
    expected = core.weyl_from_tensors(riemann, g1 + 0.25 * g2, 2.5, g)
    curv = core.with_weyl(core.riemann_ricci_scalar(chart, x))
    assert curv.scalar == pytest.approx(2.5, abs=1e-5)
    np.testing.assert_allclose(curv.weyl, expected, atol=1e-5)
    assert np.abs(expected).max() > 1e-2
