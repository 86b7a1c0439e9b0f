import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from harmball.warping import (
    GeometryError,
    custom,
    first_critical_radius,
    flat_cap,
    from_preset,
    hessian_r_squared,
    hyperbolic,
    linear,
    sectional_curvatures,
    sine,
    spliced,
    verify_admissible,
)

PRESETS = [linear(), sine(), hyperbolic(1.0), hyperbolic(4.0), spliced(), flat_cap(1.0, 0.05)]


@pytest.mark.parametrize("sigma", PRESETS, ids=lambda s: s.spec)
def test_presets_are_admissible(sigma):
    report = verify_admissible(sigma)
    assert report.passed, report.checks
    delta = 1e-6
    assert abs(float(sigma.eval(np.array(delta))) / delta - 1) < 1e-6


@pytest.mark.parametrize("sigma", PRESETS, ids=lambda s: s.spec)
def test_derivatives_match_finite_differences(sigma):
    top = min(sigma.domain_radius, 6.0) * 0.95
    t = np.linspace(0.05, top, 37)
    h = 1e-5
    d1 = (sigma.eval(t + h) - sigma.eval(t - h)) / (2 * h)
    d2 = (sigma.deriv1(t + h) - sigma.deriv1(t - h)) / (2 * h)
    assert np.allclose(sigma.deriv1(t), d1, rtol=1e-6, atol=1e-8)
    assert np.allclose(sigma.deriv2(t), d2, rtol=1e-6, atol=1e-8)


def test_sectional_curvature_examples():
    assert np.allclose(sectional_curvatures(sine(), np.pi / 4), (1.0, 1.0), atol=1e-14)
    assert np.allclose(sectional_curvatures(linear(), 3.7), (0.0, 0.0), atol=0)
    rad, tg = sectional_curvatures(hyperbolic(4.0), 1.0)
    assert rad == pytest.approx(-4.0, abs=1e-12)
    assert tg == pytest.approx(-4.0, abs=1e-12)


def test_hessian_r_squared_examples():
    assert np.allclose(hessian_r_squared(linear(), 1.0), (2.0, 2.0))
    rad, tg = hessian_r_squared(sine(), np.pi / 2)
    assert rad == 2.0 and abs(tg) < 1e-15
    rad, tg = hessian_r_squared(hyperbolic(1.0), 1.0)
    assert tg == pytest.approx(2 * np.cosh(1) * np.sinh(1), rel=1e-14)
    assert tg == pytest.approx(3.62686, abs=1e-5)


def test_radius_outside_domain_is_rejected():
    with pytest.raises(GeometryError):
        sectional_curvatures(sine(), 0.0)
    with pytest.raises(GeometryError):
        sectional_curvatures(sine(), np.pi)
    with pytest.raises(GeometryError):
        hessian_r_squared(linear(), -1.0)


def test_inadmissible_warping_reports_failures():
    report = verify_admissible(custom(lambda t: t + t**2))
    assert not report.passed
    assert not report.checks["sigma''(0)=0"]
    assert report.witnesses["sigma''(0)"] == pytest.approx(2.0, rel=1e-3)
    bad_slope = verify_admissible(custom(lambda t: 2 * t))
    assert not bad_slope.checks["sigma'(0)=1"]


def test_custom_derivatives_track_closed_form():
    sig = custom(lambda t: np.sinh(t))
    t = np.linspace(0.1, 3, 20)
    assert np.allclose(sig.deriv1(t), np.cosh(t), rtol=1e-8)
    assert np.allclose(sig.deriv2(t), np.sinh(t), rtol=1e-5)


def test_spliced_shape():
    sig = spliced()
    r0 = np.pi / 4
    t = np.linspace(0.01, r0, 50)
    assert np.allclose(sig.eval(t), np.sin(t), atol=1e-14)
    far = np.linspace(5, 50, 10)
    assert np.allclose(sig.deriv2(far), 0.0, atol=1e-14)
    slopes = sig.deriv1(far)
    assert np.ptp(slopes) < 1e-14 and slopes[0] > 0
    grid = np.linspace(0.01, 20, 4001)
    assert np.all(sig.deriv2(grid) <= 1e-14)
    assert np.all(sig.deriv1(grid) > 0)


def test_flat_cap_has_single_critical_radius():
    sig = flat_cap(1.0, 0.05)
    a0 = first_critical_radius(sig)
    assert a0 == pytest.approx(1.0, abs=1e-10)
    assert first_critical_radius(sine()) == pytest.approx(np.pi / 2, abs=1e-12)
    assert first_critical_radius(linear()) is None


@pytest.mark.parametrize("spec,kind", [
    ("sine", "sine"), ("sphere", "sine"), ("euclidean", "linear"),
    ("hyperbolic:k=4", "hyperbolic"), ("spliced:r0=0.7853981633974483", "spliced"),
])
def test_preset_catalog(spec, kind):
    sig = from_preset(spec)
    assert sig.kind == kind
    again = from_preset(sig.spec)
    t = np.linspace(0.1, 1.4, 9)
    assert np.array_equal(again.eval(t), sig.eval(t))


@pytest.mark.parametrize("spec", ["torus", "hyperbolic:k=abc", "hyperbolic:k=-1", "sine:x=1"])
def test_bad_presets(spec):
    with pytest.raises(GeometryError):
        from_preset(spec)


@settings(max_examples=40, deadline=None)
@given(st.floats(0.05, 9.0), st.floats(0.05, 3.0))
def test_hyperbolic_curvature_is_constant(k, t):
    rad, tg = sectional_curvatures(hyperbolic(k), t)
    assert rad == pytest.approx(-k, rel=1e-10)
    assert tg == pytest.approx(-k, rel=1e-8, abs=1e-8)
