import numpy as np
import pytest

from harmball.smooth import CumulativeIntegral, smooth_step


def test_step_values():
    x = np.array([-1.0, 0.0, 0.5, 1.0, 2.0])
    assert np.array_equal(smooth_step(x), [0.0, 0.0, 0.5, 1.0, 1.0])
    assert np.all(np.diff(smooth_step(np.linspace(0, 1, 101))) >= 0)
    inner = np.linspace(0.1, 0.9, 81)
    assert np.all(np.diff(smooth_step(inner)) > 0)


def test_step_symmetry():
    x = np.linspace(-0.2, 1.2, 57)
    assert np.allclose(smooth_step(x) + smooth_step(1 - x), 1.0, atol=1e-15)


@pytest.mark.parametrize("order", [1, 2])
def test_step_derivatives(order):
    x = np.linspace(0.02, 0.98, 49)
    h = 1e-6
    fd = (smooth_step(x + h, order - 1) - smooth_step(x - h, order - 1)) / (2 * h)
    assert np.allclose(smooth_step(x, order), fd, rtol=1e-6, atol=1e-7)
    ends = np.array([0.0, 1.0, -3.0, 4.0])
    assert np.all(smooth_step(ends, order) == 0)


def test_step_rejects_order():
    with pytest.raises(ValueError):
        smooth_step(0.3, 3)


def test_cumulative_integral():
    F = CumulativeIntegral(np.cos, 0.0, 3.0, panels=16)
    t = np.linspace(0, 3, 31)
    assert np.allclose(F(t), np.sin(t), atol=1e-14)
    assert F.total == pytest.approx(np.sin(3.0), abs=1e-14)
    assert F(5.0) == pytest.approx(np.sin(3.0), abs=1e-14)
    with pytest.raises(ValueError):
        CumulativeIntegral(np.cos, 1.0, 1.0)
