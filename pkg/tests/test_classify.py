import numpy as np
import pytest

from harmball.chart import EuclideanChart, WarpedChart
from harmball.classify import classify_ball, hkw_quadratic_form, riemann_tensor, sampled_sectional_curvature
from harmball.polar import PolarMetric
from harmball.warping import GeometryError, hyperbolic, linear, sine, spliced


def _general(sigma, n=2):
    base = PolarMetric.from_warping(sigma, n)
    return PolarMetric(n, base.tangential, base.tangential_dt, radius=base.radius)


def test_examples():
    sph = classify_ball(sine(), np.pi / 3)
    assert sph.regular and sph.convex
    assert sph.curvature_bound == pytest.approx(1.0, abs=1e-12)
    assert sph.condition_a == "not evaluated"

    spl = classify_ball(spliced(), 10.0)
    assert not spl.regular and spl.convex
    assert spl.curvature_bound >= 1.0
    assert spl.condition_a == "satisfied"

    flat = classify_ball(linear(), 123.0)
    assert flat.regular and flat.convex and flat.curvature_bound == 0


def test_hemisphere_is_not_convex():
    rep = classify_ball(sine(), 2.0)
    assert not rep.convex and not rep.regular
    assert rep.witnesses["min_sigma_prime"] < 0


def test_regularity_monotone_in_radius():
    flags = [classify_ball(spliced(), r).regular for r in np.linspace(0.1, 10, 40)]
    # once lost, never regained
    assert flags == sorted(flags, reverse=True)
    assert flags[0] and not flags[-1]


@pytest.mark.parametrize("sigma", [linear(), sine(), hyperbolic(1.0), hyperbolic(4.0), spliced()],
                         ids=lambda s: s.spec)
def test_regular_implies_convex(sigma):
    top = min(sigma.domain_radius, 12.0)
    for r in np.linspace(0.1, top, 25):
        rep = classify_ball(sigma, r)
        if rep.regular:
            assert rep.convex


def test_radius_errors():
    with pytest.raises(GeometryError):
        classify_ball(sine(), 0.0)
    with pytest.raises(GeometryError):
        classify_ball(sine(), 4.0)


def test_sampled_curvature_constant_models():
    x = np.array([[0.3, 0.2], [-0.5, 0.4]])
    for sigma, kappa in ((sine(), 1.0), (hyperbolic(4.0), -4.0)):
        k = sampled_sectional_curvature(WarpedChart(sigma, 2), x, [(np.eye(2)[0], np.eye(2)[1])])
        assert np.allclose(k, kappa, rtol=1e-6)
    x3 = np.array([[0.3, 0.2, -0.1]])
    planes = [(np.array([1.0, 0, 0]), np.array([0, 1.0, 0])), (np.array([1.0, 1.0, 0]), np.array([0, 0.5, 2.0]))]
    assert np.allclose(sampled_sectional_curvature(WarpedChart(sine(), 3), x3, planes), 1.0, rtol=1e-6)


def test_riemann_symmetries(rng):
    r = riemann_tensor(WarpedChart(spliced(), 3), rng.uniform(-0.5, 0.5, (2, 3)))
    assert np.allclose(r, -np.swapaxes(r, -3, -2), atol=1e-7)
    # first Bianchi identity
    bian = r + np.einsum("...lijk->...ljki", r) + np.einsum("...lijk->...lkij", r)
    assert np.abs(bian).max() < 1e-7


def test_general_polar_path_agrees():
    a = classify_ball(_general(sine()), np.pi / 3)
    assert a.method == "sampled" and a.regular and a.convex
    assert a.curvature_max == pytest.approx(1.0, rel=1e-6)
    b = classify_ball(_general(sine()), 1.8)
    assert not b.convex and not b.regular
    c = classify_ball(_general(spliced()), 10.0, grid=24)
    assert not c.regular and c.convex


def test_report_text():
    text = classify_ball(sine(), np.pi / 3).to_text()
    assert "regular = yes" in text and "convex = yes" in text
    assert f"radius = {np.pi / 3:.17g}" in text


def test_quadratic_form_examples(rng):
    v = rng.standard_normal((3, 2))
    assert hkw_quadratic_form(EuclideanChart(2), np.array([0.4, 0.1]), v).value == pytest.approx(np.sum(v**2))
    ch = WarpedChart(sine(), 2)
    assert hkw_quadratic_form(ch, np.zeros(2), v).value == pytest.approx(np.sum(v**2), rel=1e-14)


def test_quadratic_form_nonnegative_in_regular_ball(rng):
    ch = WarpedChart(sine(), 2)
    vals = []
    for _ in range(200):
        y = rng.standard_normal(2)
        y *= rng.uniform(0, 1) / np.linalg.norm(y)
        vals.append(hkw_quadratic_form(ch, y, rng.standard_normal((2, 2))).value)
    assert min(vals) >= 0


def test_quadratic_form_is_quadratic(rng):
    ch = WarpedChart(hyperbolic(1.0), 3)
    y, v = rng.uniform(-1, 1, 3), rng.standard_normal((2, 3))
    base = hkw_quadratic_form(ch, y, v).value
    assert hkw_quadratic_form(ch, y, 2.5 * v).value == pytest.approx(6.25 * base, rel=1e-13)
