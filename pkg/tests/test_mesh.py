import numpy as np
import pytest

from harmball.mesh import (
    BoundaryTrace,
    IntervalDomain,
    MeshError,
    TriangulatedDomain,
    load_mesh,
    lumped_mass,
    make_disk_mesh,
    make_interval_mesh,
    make_square_mesh,
    p1_gradient,
    serialize_mesh,
    stiffness_matrix,
)

SQUARE_OFF = """OFF
# unit square, two triangles
4 2 0
0 0 0
1 0 0
1 1 0
0 1 0
3 0 1 2
3 0 2 3
"""


@pytest.mark.parametrize("level", range(5))
def test_disk_mesh_topology(level):
    d = make_disk_mesh(1.0, level)
    assert d.euler_characteristic() == 1
    assert d.nonobtuse
    rings = 2**level
    assert d.boundary.sum() == 6 * rings
    assert np.allclose(np.linalg.norm(d.vertices[d.boundary], axis=1), 1.0)
    polygon = 0.5 * 6 * rings * np.sin(2 * np.pi / (6 * rings))
    assert d.area.sum() == pytest.approx(polygon, rel=1e-14)


def test_disk_area_converges_quadratically():
    err = [abs(make_disk_mesh(1.0, lv).area.sum() - np.pi) for lv in (2, 3, 4)]
    hs = [make_disk_mesh(1.0, lv).h for lv in (2, 3, 4)]
    rates = [np.log(err[i] / err[i + 1]) / np.log(hs[i] / hs[i + 1]) for i in range(2)]
    assert min(rates) > 1.8


def test_square_mesh():
    d = make_square_mesh(2.0, 4)
    assert d.nonobtuse and d.euler_characteristic() == 1
    assert d.area.sum() == pytest.approx(4.0)
    assert d.boundary.sum() == 16


def test_off_roundtrip():
    d = make_disk_mesh(1.0, 2)
    back = load_mesh(serialize_mesh(d))
    assert np.array_equal(back.vertices, d.vertices)
    assert np.array_equal(back.cells, d.cells)
    assert np.array_equal(back.boundary, d.boundary)


def test_load_square():
    d = load_mesh(SQUARE_OFF)
    assert d.n_vertices == 4 and d.n_cells == 2
    assert d.boundary.all()
    assert d.boundary_edges.shape == (4, 2)


@pytest.mark.parametrize("text,message", [
    ("OFX\n1 0 0\n0 0 0\n", "malformed header at line 1"),
    ("OFF\nfour two\n", "malformed counts at line 2"),
    (SQUARE_OFF.replace("3 0 2 3", "4 0 1 2 3"), "non-triangle face at line 9"),
    (SQUARE_OFF.replace("3 0 2 3", "3 0 3 2"), "inverted or degenerate triangle at line 9"),
    (SQUARE_OFF.replace("3 0 2 3", "3 0 2 7"), "missing vertex"),
    (SQUARE_OFF.replace("1 1 0", "1 1 0.5"), "nonzero third coordinate"),
    (SQUARE_OFF.replace("3 0 2 3\n", ""), "expected 4 vertices and 2 faces"),
])
def test_off_errors(text, message):
    with pytest.raises(MeshError, match=message):
        load_mesh(text)


def test_non_manifold_edge():
    verts = [[0, 0], [1, 0], [0, 1], [0, -1], [1, 1]]
    tris = [[0, 1, 2], [1, 0, 3], [0, 1, 4]]
    with pytest.raises(MeshError):
        TriangulatedDomain(verts, tris)


def test_p1_gradient_exact_for_affine(rng):
    d = make_disk_mesh(1.0, 2)
    A = rng.standard_normal((3, 2))
    b = rng.standard_normal(3)
    u = d.vertices @ A.T + b
    for cell in range(0, d.n_cells, 7):
        G = p1_gradient(d, cell)
        assert G.shape == (2, 3)
        du = (G @ u[d.cells[cell]]).T
        assert np.allclose(du, A, atol=1e-12)
    with pytest.raises(MeshError):
        p1_gradient(d, d.n_cells)


def test_stiffness_and_mass():
    d = make_disk_mesh(1.0, 3)
    K = stiffness_matrix(d)
    assert abs(K - K.T).max() < 1e-13
    assert np.allclose(K @ np.ones(d.n_vertices), 0, atol=1e-12)
    # int |grad x|^2 = area
    x = d.vertices[:, 0]
    assert x @ K @ x == pytest.approx(d.area.sum(), rel=1e-12)
    assert lumped_mass(d).sum() == pytest.approx(d.area.sum(), rel=1e-14)


def test_reference_metric_scales_weights():
    base = make_square_mesh(1.0, 2)
    g = np.diag([4.0, 1.0])
    d = TriangulatedDomain(base.vertices, base.cells, metric=g)
    assert np.allclose(d.weights, 2 * base.area)
    with pytest.raises(MeshError):
        TriangulatedDomain(base.vertices, base.cells, metric=np.diag([1.0, -1.0]))


def test_interval_mesh():
    d = make_interval_mesh(8)
    assert d.boundary_indices.tolist() == [0, 8]
    assert d.weights.sum() == pytest.approx(1.0)
    s = d.vertices[:, 0]
    K = stiffness_matrix(d)
    assert s @ K @ s == pytest.approx(1.0)
    for bad in ([0.0], [0.0, 0.5, 0.5]):
        with pytest.raises(MeshError):
            IntervalDomain(bad)
    with pytest.raises(MeshError):
        make_interval_mesh(0)


def test_boundary_trace_roundtrip():
    d = make_disk_mesh(1.0, 2)
    tr = BoundaryTrace.from_function(d, lambda x: 0.5 * x)
    tr.validate(d)
    assert tr.max_radius() == pytest.approx(0.5)
    assert tr.lipschitz_estimate(d) == pytest.approx(0.5)
    back = BoundaryTrace.from_csv(tr.to_csv())
    assert np.array_equal(back.indices, tr.indices)
    assert np.array_equal(back.values, tr.values)
    with pytest.raises(ValueError):
        tr.values[0, 0] = 1.0


def test_boundary_trace_errors():
    d = make_disk_mesh(1.0, 1)
    with pytest.raises(MeshError):
        BoundaryTrace([1, 1], [[0.0, 0.0], [1.0, 1.0]])
    with pytest.raises(MeshError):
        BoundaryTrace([1], [[np.nan, 0.0]])
    with pytest.raises(MeshError):
        BoundaryTrace([1, 2], [[0.0, 0.0]])
    partial = BoundaryTrace(d.boundary_indices[:-1], np.zeros((d.boundary.sum() - 1, 2)))
    with pytest.raises(MeshError):
        partial.validate(d)
    with pytest.raises(MeshError):
        BoundaryTrace.from_csv("vertex,u0\n")
