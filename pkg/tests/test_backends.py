"""The numba kernels and the numpy fallback must agree."""

import numpy as np
import pytest

from harmball._accel import HAS_NUMBA, use_numba
from harmball.energy import _metric, energy_and_gradient, evaluation_points
from harmball.kernels import (
    _density_nb,
    _density_np,
    _gradient_nb,
    _gradient_np,
    assemble_gradient,
    cell_density,
)
from harmball.mesh import make_disk_mesh, make_interval_mesh


def test_flag_selects_backend(backend):
    assert use_numba() == (backend == "numba" and HAS_NUMBA)


def test_energy_gradient_independent_of_backend(backend, sphere_chart, disk3, rng):
    u = 0.5 * disk3.vertices + 0.05 * rng.standard_normal((disk3.n_vertices, 2))
    e, g = energy_and_gradient(disk3, sphere_chart, u, 3.0)
    # reference values from the pure numpy path
    H, dH = _metric(sphere_chart, evaluation_points(disk3, u), True)
    G = _density_np(disk3.cells, disk3.grads, disk3.ginv, u, H)
    ref = _gradient_np(disk3.cells, disk3.grads, disk3.ginv, disk3.weights, u, H, dH, 3.0)
    ref[disk3.boundary] = 0
    assert np.allclose(g, ref, rtol=1e-13, atol=1e-14)
    assert e == pytest.approx(np.dot(disk3.weights, G**1.5) / 3, rel=1e-13)


@pytest.mark.skipif(not HAS_NUMBA, reason="numba not installed")
@pytest.mark.parametrize("p", [2.0, 4.0])
@pytest.mark.parametrize("domain", [make_disk_mesh(1.0, 2), make_interval_mesh(12)], ids=["disk", "interval"])
def test_kernels_agree(domain, p, rng):
    n = 3
    u = rng.standard_normal((domain.n_vertices, n))
    a = rng.standard_normal((domain.n_cells, n, n))
    H = np.einsum("tij,tkj->tik", a, a) + np.eye(n)
    dH = rng.standard_normal((domain.n_cells, n, n, n))
    dH = 0.5 * (dH + np.swapaxes(dH, -1, -2))
    args = (domain.cells, domain.grads, domain.ginv)
    assert np.allclose(_density_nb(*args, u, H), _density_np(*args, u, H), rtol=1e-13)
    gw = (domain.cells, domain.grads, domain.ginv, domain.weights, u, H, dH, p)
    assert np.allclose(_gradient_nb(*gw), _gradient_np(*gw), rtol=1e-12, atol=1e-12)


def test_dispatch_matches(backend, rng):
    d = make_disk_mesh(1.0, 1)
    u = rng.standard_normal((d.n_vertices, 2))
    H = np.broadcast_to(np.eye(2), (d.n_cells, 2, 2)).copy()
    dH = np.zeros((d.n_cells, 2, 2, 2))
    G = cell_density(d.cells, d.grads, d.ginv, u, H)
    assert np.allclose(G, _density_np(d.cells, d.grads, d.ginv, u, H))
    g = assemble_gradient(d.cells, d.grads, d.ginv, d.weights, u, H, dH)
    assert np.allclose(g, _gradient_np(d.cells, d.grads, d.ginv, d.weights, u, H, dH, 2.0))
