import numpy as np
import pytest

from harmball.chart import EuclideanChart, WarpedChart
from harmball.energy import FieldError, dirichlet_energy
from harmball.geodesic import geodesic_bvp, shoot
from harmball.mesh import BoundaryTrace, make_disk_mesh, make_interval_mesh
from harmball.solver import SolverConfig, harmonic_extension, minimize
from harmball.warping import sine


def _poly_trace(domain):
    return BoundaryTrace.from_function(domain, lambda x: np.array([x[0] ** 2 - x[1] ** 2, x[0] * x[1] + 0.3 * x[0]]))


def test_config_validation():
    for kw in ({"p": 1.5}, {"gtol": 0}, {"armijo": 1.0}, {"backtrack": 0.0}, {"r5": -1.0}):
        with pytest.raises(ValueError):
            SolverConfig(**kw)
    assert SolverConfig().projection_radius(EuclideanChart(2)) is None
    assert SolverConfig(r5=3.0).projection_radius(EuclideanChart(2)) == 3.0


def test_flat_target_recovers_linear_solution(disk3, flat_chart, rng):
    trace = _poly_trace(disk3)
    ref = harmonic_extension(disk3, trace)
    start = ref + 0.1 * rng.standard_normal(ref.shape)
    u, rep = minimize(disk3, flat_chart, trace, SolverConfig(gtol=1e-11), initial=start)
    assert rep.converged
    assert np.abs(u - ref).max() <= 1e-8
    assert np.array_equal(u[trace.indices], trace.values)


def test_history_is_monotone(disk3, sphere_chart, rng):
    trace = BoundaryTrace.from_function(disk3, lambda x: 0.7 * x)
    start = 0.7 * disk3.vertices + 0.2 * rng.standard_normal((disk3.n_vertices, 2))
    u, rep = minimize(disk3, sphere_chart, trace, initial=start)
    assert rep.converged
    e = rep.history[:, 1]
    assert np.all(np.diff(e) <= 0)
    assert rep.history[-1, 1] == pytest.approx(dirichlet_energy(disk3, sphere_chart, u), rel=1e-14)
    assert rep.history.shape[1] == len(rep.HISTORY_COLUMNS)


def test_projection_keeps_field_in_ball(disk3, sphere_chart, sphere_glued, rng):
    trace = BoundaryTrace.from_function(disk3, lambda x: 0.5 * x)
    r5 = 1.5 * sphere_glued.params.r4
    wild = 3 * r5 * rng.standard_normal((disk3.n_vertices, 2))
    u, rep = minimize(disk3, sphere_chart, trace, initial=wild)
    assert rep.projection_radius == pytest.approx(r5)
    assert rep.converged and rep.max_radius <= 0.5 + rep.max_principle_tol
    assert np.all(np.diff(rep.history[:, 1]) <= 0)


def test_trace_outside_projection_ball(disk3, sphere_chart):
    trace = BoundaryTrace.from_function(disk3, lambda x: 100.0 * x)
    with pytest.raises(FieldError):
        minimize(disk3, sphere_chart, trace)
    flat = BoundaryTrace.from_function(disk3, lambda x: np.r_[x, 0.0])
    with pytest.raises(FieldError):
        minimize(disk3, EuclideanChart(2), flat)


def test_interval_solution_is_radial_geodesic(sphere_chart, rng):
    d = make_interval_mesh(32)
    e = np.array([0.6, 0.8])
    trace = BoundaryTrace([0, 32], [0.1 * e, 0.9 * e])
    start = np.outer(d.vertices[:, 0], 0.8 * e) + 0.1 * e + 0.05 * rng.standard_normal((33, 2))
    u, rep = minimize(d, sphere_chart, trace, initial=start)
    s = d.vertices[:, 0]
    path = shoot(sphere_chart, 0.1 * e, 0.8 * e, s_eval=s)
    assert np.abs(u - path).max() < 1e-6
    assert np.abs(np.linalg.norm(u, axis=1) - (0.1 + 0.8 * s)).max() < 1e-6


def test_nonradial_interval_matches_shooting():
    chart = WarpedChart(sine(), 2)
    d = make_interval_mesh(128)
    a, b = np.array([0.5, 0.0]), np.array([0.0, 0.6])
    u, rep = minimize(d, chart, BoundaryTrace([0, 128], [a, b]))
    _, path = geodesic_bvp(chart, a, b, s_eval=d.vertices[:, 0])
    # O(h^2) discretization error
    assert np.abs(u - path).max() < 1e-4


def test_deterministic(disk3, sphere_chart):
    trace = BoundaryTrace.from_function(disk3, lambda x: 0.8 * x * (1 + 0.2 * x[0]))
    u1, r1 = minimize(disk3, sphere_chart, trace)
    u2, r2 = minimize(disk3, sphere_chart, trace)
    assert np.array_equal(u1, u2) and np.array_equal(r1.history, r2.history)
