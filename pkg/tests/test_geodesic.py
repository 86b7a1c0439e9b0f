import numpy as np
import pytest

from harmball.chart import EuclideanChart, WarpedChart
from harmball.geodesic import ModelDistance, geodesic_bvp, geodesic_distance, shoot
from harmball.warping import hyperbolic, sine, spliced


def test_euclidean_bvp_is_straight():
    ch = EuclideanChart(2)
    v0, path = geodesic_bvp(ch, [0.1, 0.2], [1.0, -1.0], s_eval=[0.0, 0.5, 1.0])
    assert np.allclose(v0, [0.9, -1.2])
    assert np.allclose(path[1], [0.55, -0.4])


def test_radial_shot_is_linear():
    ch = WarpedChart(sine(), 2)
    s = np.linspace(0, 1, 11)
    path = shoot(ch, [0.0, 0.0], [0.6, 0.8], s_eval=s)
    assert np.allclose(path, s[:, None] * [0.6, 0.8], atol=1e-12)


@pytest.mark.parametrize("sigma", [sine(), hyperbolic(1.0), hyperbolic(4.0)], ids=lambda s: s.spec)
def test_closed_form_distance_matches_shooting(sigma, rng):
    md = ModelDistance(WarpedChart(sigma, 2))
    shooter = WarpedChart(sigma, 2)
    for _ in range(4):
        a = rng.uniform(-0.7, 0.7, 2)
        b = rng.uniform(-0.7, 0.7, 2)
        assert md(a, b) == pytest.approx(geodesic_distance(shooter, a, b), rel=1e-9, abs=1e-12)


def test_sphere_distance_examples():
    md = ModelDistance(WarpedChart(sine(), 2))
    a = np.array([np.pi / 2, 0.0])
    b = np.array([0.0, np.pi / 2])
    assert md(a, b) == pytest.approx(np.pi / 2, abs=1e-14)
    assert md([0.3, 0.0], [0.0, 0.0]) == pytest.approx(0.3)
    assert md([0.3, 0.0], [0.5, 0.0]) == pytest.approx(0.2)


def test_memoized_shooting_in_slice():
    sigma = spliced()
    md = ModelDistance(WarpedChart(sigma, 3))
    a, b = np.array([0.5, 0.1, 0.0]), np.array([0.0, 0.4, 0.3])
    first = md(a, b)
    assert md(a, b) == first
    assert len(md._cache) == 1
    direct = geodesic_distance(WarpedChart(sigma, 3), a, b)
    assert first == pytest.approx(direct, rel=1e-9)
    # rotation invariance
    q = np.linalg.qr(np.random.default_rng(1).standard_normal((3, 3)))[0]
    assert md(q @ a, q @ b) == pytest.approx(first, rel=1e-9)


def test_distance_is_a_metric_on_samples(rng):
    md = ModelDistance(WarpedChart(hyperbolic(2.0), 2))
    pts = rng.uniform(-1, 1, (6, 2))
    for a in pts:
        for b in pts:
            assert md(a, b) == pytest.approx(md(b, a), abs=1e-12)
            for c in pts:
                assert md(a, c) <= md(a, b) + md(b, c) + 1e-12
