import numpy as np
import pytest

from harmball.chart import EuclideanChart, WarpedChart
from harmball.ks import distance_oracle, hs_density, ks_density, ks_energy, region_quadrature
from harmball.warping import GeometryError, hyperbolic, sine

A = np.array([[1.0, 2.0], [-0.5, 0.3]])


def _smooth(x):
    x = np.asarray(x, float)
    return np.stack([np.sin(x[..., 0]) * np.cosh(0.5 * x[..., 1]), x[..., 0] * x[..., 1]], axis=-1)


def _smooth_energy(radius, m=400):
    # int |du|^2 over the disk by a fine polar rule on the analytic Jacobian
    pts, wts = region_quadrature(radius, m // 10, m)
    x, y = pts[:, 0], pts[:, 1]
    du2 = (np.cos(x) * np.cosh(0.5 * y)) ** 2 + (0.5 * np.sin(x) * np.sinh(0.5 * y)) ** 2 + y**2 + x**2
    return float(np.dot(wts, du2))


@pytest.mark.parametrize("eps", [0.2, 0.1, 0.01])
def test_linear_density_is_exact(eps):
    val = ks_density(lambda x: np.asarray(x) @ A.T, EuclideanChart(2), np.array([0.1, -0.2]), eps, quadrature=8)
    assert val == pytest.approx(np.sum(A**2), abs=1e-10)


def test_constant_map():
    for chart in (EuclideanChart(2), WarpedChart(sine(), 2)):
        c = lambda x: np.broadcast_to([0.3, 0.2], np.shape(x))  # noqa: E731
        assert ks_density(c, chart, np.zeros(2), 0.1) == 0.0
        assert ks_energy(c, chart, 0.1, quadrature=8, radial=4, angular=8).value == 0.0


def test_quadratic_map_converges_at_order_two():
    u = lambda x: np.stack([np.asarray(x)[..., 0] ** 2, 0 * np.asarray(x)[..., 0]], axis=-1)  # noqa: E731
    err = [abs(ks_density(u, EuclideanChart(2), np.array([0.5, 0.0]), e, quadrature=64, domain_radius=1.0) - 1.0)
           for e in (0.1, 0.05, 0.025)]
    orders = np.log2(np.array(err[:-1]) / np.array(err[1:]))
    assert np.all(orders >= 1.99)


def test_linear_energy_over_offset_disk():
    est = ks_energy(lambda x: np.asarray(x) @ A.T, EuclideanChart(2), 0.05, margin=0.2)
    assert est.value == pytest.approx(np.sum(A**2) * np.pi * 0.8**2, rel=1e-12)
    assert est.nodes == 16 * 32 and est.circle_nodes == 64


def test_smooth_map_energy_converges():
    exact = _smooth_energy(0.8)
    err = [abs(ks_energy(_smooth, EuclideanChart(2), e, margin=0.2).value - exact) for e in (0.1, 0.05, 0.025)]
    assert err[0] > err[1] > err[2]
    assert np.log2(err[1] / err[2]) >= 1


def test_curved_target_density_approaches_hs_density():
    chart = WarpedChart(sine(), 2)
    u = lambda x: 0.5 * np.asarray(x) + 0.1 * np.stack([np.asarray(x)[..., 1] ** 2, 0 * np.asarray(x)[..., 0]], -1)  # noqa: E731
    x = np.array([0.2, 0.3])
    ref = hs_density(u, chart, x)
    err = [abs(ks_density(u, chart, x, e, quadrature=32) - ref) for e in (0.04, 0.02)]
    assert err[1] < err[0] and err[1] < 1e-3 * ref


def test_hs_density_with_jacobian():
    chart = WarpedChart(hyperbolic(1.0), 2)
    u = lambda x: 0.4 * np.asarray(x)  # noqa: E731
    x = np.array([0.3, 0.1])
    assert hs_density(u, chart, x) == pytest.approx(hs_density(u, chart, x, jacobian=lambda _: 0.4 * np.eye(2)), rel=1e-8)


def test_distance_oracle_kinds():
    assert distance_oracle(EuclideanChart(2))([0, 0], [3, 4]) == 5.0
    d = distance_oracle(WarpedChart(sine(), 2))
    assert d([1.0, 0.0], [-1.0, 0.0]) == pytest.approx(2.0)


def test_ks_errors():
    u = lambda x: np.asarray(x)  # noqa: E731
    with pytest.raises(GeometryError):
        ks_density(u, EuclideanChart(2), np.array([0.95, 0.0]), 0.1)
    with pytest.raises(GeometryError):
        ks_density(u, EuclideanChart(2), np.zeros(2), 0.0)
    with pytest.raises(GeometryError):
        ks_energy(u, EuclideanChart(2), 0.3, margin=0.2)


def test_region_quadrature_area():
    _, w = region_quadrature(0.7, 8, 16)
    assert w.sum() == pytest.approx(np.pi * 0.49, rel=1e-14)
