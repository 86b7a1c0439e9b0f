"""Discrete domains: triangulated 2-D domains and 1-D interval chains.

Both share a simplex layout used by the energy kernels:

* ``vertices``  ``(V, m)`` coordinates
* ``cells``     ``(F, m+1)`` vertex indices
* ``grads``     ``(F, m+1, m)`` gradients of the P1 hat functions per cell
* ``weights``   ``(F,)`` reference volume ``sqrt(det g) * |cell|``
* ``ginv``      ``(F, m, m)`` inverse reference metric per cell
"""

from __future__ import annotations

import csv
import io as _io
from dataclasses import dataclass

import numpy as np
from scipy import sparse

__all__ = [
    "MeshError",
    "SimplexDomain",
    "TriangulatedDomain",
    "IntervalDomain",
    "BoundaryTrace",
    "make_disk_mesh",
    "make_square_mesh",
    "make_interval_mesh",
    "load_mesh",
    "serialize_mesh",
    "p1_gradient",
    "stiffness_matrix",
    "lumped_mass",
]

MIN_AREA = 1e-12


class MeshError(ValueError):
    """Invalid mesh, OFF text or trace."""


class SimplexDomain:
    """Common read-only simplex data; see module docstring."""

    vertices: np.ndarray
    cells: np.ndarray
    boundary: np.ndarray
    grads: np.ndarray
    weights: np.ndarray
    ginv: np.ndarray

    @property
    def dim(self):
        return self.vertices.shape[1]

    @property
    def n_vertices(self):
        return self.vertices.shape[0]

    @property
    def n_cells(self):
        return self.cells.shape[0]

    @property
    def boundary_indices(self):
        return np.flatnonzero(self.boundary)

    @property
    def interior_indices(self):
        return np.flatnonzero(~self.boundary)

    def edges(self):
        """Unique undirected edges ``(E, 2)`` with ``i < j``."""
        k = self.cells.shape[1]
        pairs = np.concatenate([self.cells[:, [a, b]] for a in range(k) for b in range(a + 1, k)])
        return np.unique(np.sort(pairs, axis=1), axis=0)

    @property
    def h(self):
        """Maximum edge length."""
        e = self.edges()
        return float(np.linalg.norm(self.vertices[e[:, 1]] - self.vertices[e[:, 0]], axis=1).max())

    def _freeze(self):
        for name in ("vertices", "cells", "boundary", "grads", "weights", "ginv"):
            getattr(self, name).setflags(write=False)


def _tri_geometry(vertices, triangles):
    p = vertices[triangles]
    e1, e2 = p[:, 1] - p[:, 0], p[:, 2] - p[:, 0]
    area = 0.5 * (e1[:, 0] * e2[:, 1] - e1[:, 1] * e2[:, 0])
    return p, e1, e2, area


def _tri_grads(e1, e2, area):
    # rows of E^{-1} with E = [e1 e2] give the gradients of lambda1, lambda2
    inv = np.empty((e1.shape[0], 2, 2))
    inv[:, 0, 0], inv[:, 0, 1] = e2[:, 1], -e2[:, 0]
    inv[:, 1, 0], inv[:, 1, 1] = -e1[:, 1], e1[:, 0]
    inv /= (2.0 * area)[:, None, None]
    grads = np.empty((e1.shape[0], 3, 2))
    grads[:, 1:] = inv
    grads[:, 0] = -inv.sum(axis=1)
    return grads


def _boundary_from_edges(n_vertices, triangles, start_line=None):
    half = np.concatenate([triangles[:, [0, 1]], triangles[:, [1, 2]], triangles[:, [2, 0]]])
    key = np.sort(half, axis=1)
    uniq, counts = np.unique(key, axis=0, return_counts=True)
    if np.any(counts > 2):
        bad = uniq[np.argmax(counts > 2)]
        raise MeshError(f"non-manifold edge {tuple(int(v) for v in bad)} shared by more than two triangles")
    flags = np.zeros(n_vertices, dtype=bool)
    flags[uniq[counts == 1].ravel()] = True
    return flags, uniq, uniq[counts == 1]


class TriangulatedDomain(SimplexDomain):
    """Triangulated planar domain with a per-triangle constant reference metric."""

    def __init__(self, vertices, triangles, metric=None, boundary=None):
        v = np.array(vertices, dtype=float)
        t = np.array(triangles, dtype=np.int64)
        if v.ndim != 2 or v.shape[1] != 2:
            raise MeshError("vertices must have shape (V, 2)")
        if t.ndim != 2 or t.shape[1] != 3:
            raise MeshError("triangles must have shape (F, 3)")
        if t.size and (t.min() < 0 or t.max() >= v.shape[0]):
            raise MeshError("triangle references a missing vertex")
        if not np.all(np.isfinite(v)):
            raise MeshError("vertex coordinates must be finite")
        _, e1, e2, area = _tri_geometry(v, t)
        bad = np.flatnonzero(area < MIN_AREA)
        if bad.size:
            raise MeshError(f"triangle {int(bad[0])} is inverted or degenerate (signed area {area[bad[0]]:.3g})")
        flags, edges, bedges = _boundary_from_edges(v.shape[0], t)
        if boundary is not None and not np.array_equal(np.asarray(boundary, bool), flags):
            raise MeshError("boundary flags do not match the topological boundary")
        if metric is None:
            g = np.broadcast_to(np.eye(2), (t.shape[0], 2, 2)).copy()
        else:
            g = np.array(metric, dtype=float)
            if g.shape == (2, 2):
                g = np.broadcast_to(g, (t.shape[0], 2, 2)).copy()
            if g.shape != (t.shape[0], 2, 2):
                raise MeshError("reference metric must be (2, 2) or (F, 2, 2)")
            if not np.allclose(g, np.swapaxes(g, 1, 2)) or np.any(np.linalg.eigvalsh(g)[:, 0] <= 0):
                raise MeshError("reference metric must be symmetric positive definite")
        self.vertices = v
        self.cells = t
        self.boundary = flags
        self.metric = g
        self.area = area
        self.weights = np.sqrt(np.linalg.det(g)) * area
        self.ginv = np.linalg.inv(g)
        self.grads = _tri_grads(e1, e2, area)
        self._edges = edges
        self.boundary_edges = bedges
        self._freeze()

    @property
    def triangles(self):
        return self.cells

    def edges(self):
        return self._edges

    def euler_characteristic(self):
        return self.n_vertices - self._edges.shape[0] + self.n_cells

    def angles(self):
        """Interior angles ``(F, 3)``, angle ``a`` opposite to the edge not touching vertex ``a``."""
        p = self.vertices[self.cells]
        out = np.empty(self.cells.shape)
        for a in range(3):
            u = p[:, (a + 1) % 3] - p[:, a]
            w = p[:, (a + 2) % 3] - p[:, a]
            cross = u[:, 0] * w[:, 1] - u[:, 1] * w[:, 0]
            out[:, a] = np.arctan2(np.abs(cross), np.einsum("ij,ij->i", u, w))
        return out

    @property
    def nonobtuse(self):
        """True when no angle exceeds a right angle (up to 1e-12 rad)."""
        return bool(self.angles().max() <= np.pi / 2 + 1e-12)

    def __repr__(self):
        return f"TriangulatedDomain(V={self.n_vertices}, F={self.n_cells}, boundary={int(self.boundary.sum())})"


class IntervalDomain(SimplexDomain):
    """Chain ``0 = s_0 < ... < s_K = 1`` with both endpoints on the boundary."""

    def __init__(self, params):
        s = np.array(params, dtype=float).ravel()
        if s.size < 2:
            raise MeshError("an interval needs at least two vertices")
        if not np.all(np.diff(s) > 0):
            raise MeshError("interval parameters must be strictly increasing")
        k = s.size - 1
        length = np.diff(s)
        self.params = s
        self.vertices = s[:, None].copy()
        self.cells = np.stack([np.arange(k), np.arange(1, k + 1)], axis=1).astype(np.int64)
        self.boundary = np.zeros(k + 1, dtype=bool)
        self.boundary[[0, k]] = True
        self.weights = length.copy()
        self.ginv = np.ones((k, 1, 1))
        g = np.empty((k, 2, 1))
        g[:, 0, 0], g[:, 1, 0] = -1.0 / length, 1.0 / length
        self.grads = g
        self._freeze()

    def __repr__(self):
        return f"IntervalDomain(K={self.n_cells})"


# ---------------------------------------------------------------- generators


def make_disk_mesh(radius=1.0, level=0) -> TriangulatedDomain:
    """Concentric-ring triangulation of the disk.

    Level ``L`` uses ``J = 2**L`` rings; ring ``j`` carries ``6 j`` vertices
    equispaced on the circle of radius ``radius * j / J``, so the boundary
    vertex count doubles per level.
    """
    if level < 0:
        raise MeshError("refinement level must be >= 0")
    rings = 2 ** int(level)
    verts = [np.zeros(2)]
    start = [0]
    for j in range(1, rings + 1):
        start.append(len(verts))
        ang = 2 * np.pi * np.arange(6 * j) / (6 * j)
        r = radius * j / rings
        verts.extend(np.stack([r * np.cos(ang), r * np.sin(ang)], axis=1))

    def idx(j, i):
        if j == 0:
            return 0
        return start[j] + i % (6 * j)

    tris = []
    for j in range(1, rings + 1):
        for s in range(6):
            for i in range(j):
                tris.append((idx(j, s * j + i), idx(j, s * j + i + 1), idx(j - 1, s * (j - 1) + i)))
                if i < j - 1:
                    tris.append((idx(j - 1, s * (j - 1) + i), idx(j, s * j + i + 1), idx(j - 1, s * (j - 1) + i + 1)))
    return TriangulatedDomain(np.array(verts), np.array(tris))


def make_square_mesh(size=1.0, cells=4, center=True) -> TriangulatedDomain:
    """Right-triangle grid of the square (nonobtuse); centered at the origin by default."""
    ax = np.linspace(0.0, size, cells + 1) - (size / 2 if center else 0.0)
    x, y = np.meshgrid(ax, ax, indexing="xy")
    verts = np.stack([x.ravel(), y.ravel()], axis=1)
    tris = []
    w = cells + 1
    for r in range(cells):
        for c in range(cells):
            a, b, d, e = r * w + c, r * w + c + 1, (r + 1) * w + c, (r + 1) * w + c + 1
            tris.append((a, b, e))
            tris.append((a, e, d))
    return TriangulatedDomain(verts, np.array(tris))


def make_interval_mesh(k) -> IntervalDomain:
    if k < 1:
        raise MeshError("interval mesh needs K >= 1")
    return IntervalDomain(np.linspace(0.0, 1.0, int(k) + 1))


# ---------------------------------------------------------------- OFF I/O


def load_mesh(text) -> TriangulatedDomain:
    """Parse OFF text (planar: third coordinate 0, triangles only)."""
    lines = [(no, ln.split("#", 1)[0].strip()) for no, ln in enumerate(text.splitlines(), start=1)]
    lines = [(no, ln) for no, ln in lines if ln]
    if not lines or lines[0][1] != "OFF":
        raise MeshError(f"malformed header at line {lines[0][0] if lines else 1}: expected 'OFF'")
    if len(lines) < 2:
        raise MeshError("missing counts line")
    no, cnt = lines[1]
    parts = cnt.split()
    try:
        nv, nf = int(parts[0]), int(parts[1])
        if len(parts) > 3 or nv < 0 or nf < 0:
            raise ValueError
    except (ValueError, IndexError):
        raise MeshError(f"malformed counts at line {no}") from None
    body = lines[2:]
    if len(body) < nv + nf:
        raise MeshError(f"expected {nv} vertices and {nf} faces, file ends at line {lines[-1][0]}")
    if len(body) > nv + nf:
        raise MeshError(f"unexpected content at line {body[nv + nf][0]}")
    verts = np.empty((nv, 2))
    for i, (no, ln) in enumerate(body[:nv]):
        try:
            xyz = [float(v) for v in ln.split()]
        except ValueError:
            raise MeshError(f"malformed vertex at line {no}") from None
        if len(xyz) != 3:
            raise MeshError(f"vertex at line {no} must have 3 coordinates")
        if xyz[2] != 0.0:
            raise MeshError(f"vertex at line {no} has nonzero third coordinate")
        verts[i] = xyz[:2]
    tris = np.empty((nf, 3), dtype=np.int64)
    for i, (no, ln) in enumerate(body[nv:]):
        try:
            ids = [int(v) for v in ln.split()]
        except ValueError:
            raise MeshError(f"malformed face at line {no}") from None
        if not ids or ids[0] != 3 or len(ids) < 4:
            raise MeshError(f"non-triangle face at line {no}")
        if len(ids) != 4:
            raise MeshError(f"malformed face at line {no}")
        if min(ids[1:]) < 0 or max(ids[1:]) >= nv:
            raise MeshError(f"face at line {no} references a missing vertex")
        tris[i] = ids[1:]
        _, e1, e2, area = _tri_geometry(verts, tris[i : i + 1])
        if area[0] < MIN_AREA:
            raise MeshError(f"inverted or degenerate triangle at line {no}")
    return TriangulatedDomain(verts, tris)


def serialize_mesh(domain: TriangulatedDomain) -> str:
    out = ["OFF", f"{domain.n_vertices} {domain.n_cells} {domain.edges().shape[0]}"]
    out += [f"{x:.17g} {y:.17g} 0" for x, y in domain.vertices]
    out += [f"3 {a} {b} {c}" for a, b, c in domain.cells]
    return "\n".join(out) + "\n"


# ---------------------------------------------------------------- operators


def p1_gradient(domain: SimplexDomain, cell) -> np.ndarray:
    """Matrix ``(m, m+1)`` mapping the cell's vertex values to its constant gradient."""
    cell = int(cell)
    if not 0 <= cell < domain.n_cells:
        raise MeshError(f"cell index {cell} out of range")
    g = domain.grads[cell]
    if not np.all(np.isfinite(g)):
        raise MeshError(f"cell {cell} is degenerate")
    return g.T.copy()


def stiffness_matrix(domain: SimplexDomain):
    """P1 stiffness ``K_ab = sum_T w_T grad phi_a . g^{-1} grad phi_b`` (cotangent weights for m=2)."""
    loc = np.einsum("t,tae,tef,tbf->tab", domain.weights, domain.grads, domain.ginv, domain.grads)
    k = domain.cells.shape[1]
    rows = np.repeat(domain.cells, k, axis=1).ravel()
    cols = np.tile(domain.cells, (1, k)).ravel()
    n = domain.n_vertices
    return sparse.csr_matrix((loc.ravel(), (rows, cols)), shape=(n, n))


def lumped_mass(domain: SimplexDomain):
    k = domain.cells.shape[1]
    return np.bincount(domain.cells.ravel(), np.repeat(domain.weights / k, k), minlength=domain.n_vertices)


# ---------------------------------------------------------------- traces


@dataclass(frozen=True)
class BoundaryTrace:
    """Fixed target points on boundary vertices (Cartesian normal coordinates)."""

    indices: np.ndarray
    values: np.ndarray

    def __post_init__(self):
        idx = np.asarray(self.indices, dtype=np.int64).ravel()
        val = np.asarray(self.values, dtype=float)
        if val.ndim != 2 or val.shape[0] != idx.size:
            raise MeshError("trace values must have shape (len(indices), n)")
        if not np.all(np.isfinite(val)):
            raise MeshError("trace values must be finite")
        order = np.argsort(idx, kind="stable")
        idx, val = idx[order], val[order]
        if np.any(np.diff(idx) == 0):
            raise MeshError("duplicate vertex in trace")
        idx.setflags(write=False)
        val.setflags(write=False)
        object.__setattr__(self, "indices", idx)
        object.__setattr__(self, "values", val)

    @property
    def target_dim(self):
        return self.values.shape[1]

    @classmethod
    def from_function(cls, domain: SimplexDomain, f):
        idx = domain.boundary_indices
        return cls(idx, np.array([np.asarray(f(domain.vertices[i]), float) for i in idx]))

    def validate(self, domain: SimplexDomain):
        if not np.array_equal(self.indices, domain.boundary_indices):
            raise MeshError("trace must be defined on all boundary vertices and only there")
        return self

    def max_radius(self):
        return float(np.linalg.norm(self.values, axis=1).max())

    def lipschitz_estimate(self, domain: SimplexDomain):
        """Max over boundary edges of ``|f(a) - f(b)| / |a - b|`` (endpoints for intervals)."""
        self.validate(domain)
        pos = {int(v): i for i, v in enumerate(self.indices)}
        if isinstance(domain, TriangulatedDomain):
            edges = domain.boundary_edges
        else:
            edges = np.array([[self.indices[0], self.indices[-1]]])
        a = np.array([pos[int(v)] for v in edges[:, 0]])
        b = np.array([pos[int(v)] for v in edges[:, 1]])
        num = np.linalg.norm(self.values[a] - self.values[b], axis=1)
        den = np.linalg.norm(domain.vertices[edges[:, 0]] - domain.vertices[edges[:, 1]], axis=1)
        return float((num / den).max())

    def to_csv(self) -> str:
        buf = _io.StringIO()
        w = csv.writer(buf, lineterminator="\n")
        w.writerow(["vertex"] + [f"u{i}" for i in range(self.target_dim)])
        for i, row in zip(self.indices, self.values):
            w.writerow([int(i)] + [f"{x:.17g}" for x in row])
        return buf.getvalue()

    @classmethod
    def from_csv(cls, text):
        rows = [r for r in csv.reader(_io.StringIO(text)) if r and not r[0].lstrip().startswith("#")]
        if rows and not rows[0][0].strip().lstrip("-").isdigit():
            rows = rows[1:]
        if not rows:
            raise MeshError("empty trace file")
        try:
            idx = [int(r[0]) for r in rows]
            val = [[float(x) for x in r[1:]] for r in rows]
        except ValueError as exc:
            raise MeshError(f"malformed trace row: {exc}") from None
        if len({len(v) for v in val}) != 1 or not val[0]:
            raise MeshError("trace rows must all have the same number of coordinates")
        return cls(np.array(idx), np.array(val))
