"""Discrete Dirichlet p-energy of P1 maps into a normal chart, and diagnostics.

A map field is a ``(V, n)`` array of target points in Cartesian normal
coordinates. On each cell the target metric is evaluated once, at the
vertex average ``u_bar_T`` of the cell.
"""

from __future__ import annotations

import numpy as np

from .chart import NormalChart
from .kernels import assemble_gradient, cell_density, energy_from_density
from .mesh import SimplexDomain, lumped_mass, stiffness_matrix

__all__ = [
    "FieldError",
    "check_field",
    "evaluation_points",
    "dirichlet_energy",
    "energy_gradient",
    "energy_and_gradient",
    "radial_projection",
    "harmonic_residual",
    "max_principle_check",
    "fuchs_check",
]


class FieldError(ValueError):
    """Map field with wrong shape or non-finite entries."""


def check_field(domain: SimplexDomain, chart: NormalChart, u):
    u = np.asarray(u, dtype=float)
    if u.ndim != 2 or u.shape != (domain.n_vertices, chart.n):
        raise FieldError(f"field must have shape ({domain.n_vertices}, {chart.n}), got {u.shape}")
    if not np.all(np.isfinite(u)):
        raise FieldError("field has non-finite entries")
    return u


def evaluation_points(domain: SimplexDomain, u):
    return u[domain.cells].mean(axis=1)


def _metric(chart, pts, deriv):
    """``h`` (and ``dh``) at ``pts``; exactly ``I`` / ``0`` past the chart's Euclidean radius."""
    n = chart.n
    t = np.linalg.norm(pts, axis=1)
    flat = t >= chart.euclidean_radius
    H = np.broadcast_to(np.eye(n), (pts.shape[0], n, n)).copy()
    dH = np.zeros((pts.shape[0], n, n, n)) if deriv else None
    live = ~flat
    if np.any(live):
        if deriv:
            H[live], dH[live] = chart.metric_and_deriv(pts[live])
        else:
            H[live] = chart.metric_at(pts[live])
    return H, dH


def dirichlet_energy(domain: SimplexDomain, chart: NormalChart, u, p=2.0):
    """``(1/p) sum_T w_T (g^{ab} Du^i_a Du^j_b h_ij(u_bar_T))^{p/2}``."""
    u = check_field(domain, chart, u)
    H, _ = _metric(chart, evaluation_points(domain, u), False)
    G = cell_density(domain.cells, domain.grads, domain.ginv, u, H)
    return energy_from_density(domain.weights, G, p)


def energy_and_gradient(domain: SimplexDomain, chart: NormalChart, u, p=2.0):
    """Energy and its exact gradient; boundary rows of the gradient are zero."""
    u = check_field(domain, chart, u)
    H, dH = _metric(chart, evaluation_points(domain, u), True)
    G = cell_density(domain.cells, domain.grads, domain.ginv, u, H)
    e = energy_from_density(domain.weights, G, p)
    grad = assemble_gradient(domain.cells, domain.grads, domain.ginv, domain.weights, u, H, dH, p)
    grad[domain.boundary] = 0.0
    return e, grad


def energy_gradient(domain: SimplexDomain, chart: NormalChart, u, p=2.0):
    return energy_and_gradient(domain, chart, u, p)[1]


def radial_projection(u, radius):
    """Nearest-point map onto the closed Euclidean ball of ``radius``; rows inside are returned untouched."""
    if radius <= 0:
        raise ValueError("projection radius must be positive")
    u = np.array(u, dtype=float)
    r = np.linalg.norm(u, axis=-1)
    out = r >= radius
    if np.any(out):
        u[out] = radius * u[out] / r[out, None]
    return u


def _laplacian(domain, values):
    """Lumped-mass discrete Laplace-Beltrami ``-M^{-1} K values``."""
    K = stiffness_matrix(domain)
    M = lumped_mass(domain)
    lap = -(K @ values)
    return lap / (M[:, None] if lap.ndim == 2 else M)


def harmonic_residual(domain: SimplexDomain, chart: NormalChart, u):
    """``Delta u^A + Gamma^A_ij(u) <du^i, du^j>`` at interior vertices, ``(I, n)``.

    The contraction ``g^{ab} Du^i_a Du^j_b`` is the lumped-mass average of the
    per-cell values around each vertex; ``Gamma`` is evaluated at the vertex.
    """
    u = check_field(domain, chart, u)
    lap = _laplacian(domain, u)
    du = np.einsum("tbi,tba->tia", u[domain.cells], domain.grads)
    cont = np.einsum("tab,tia,tjb->tij", domain.ginv, du, du)
    k = domain.cells.shape[1]
    acc = np.zeros((domain.n_vertices, chart.n, chart.n))
    np.add.at(acc, domain.cells.ravel(), np.repeat((domain.weights / k)[:, None, None] * cont, k, axis=0))
    acc /= lumped_mass(domain)[:, None, None]
    inner = domain.interior_indices
    pts = u[inner]
    gam = np.zeros((inner.size, chart.n, chart.n, chart.n))
    live = np.linalg.norm(pts, axis=1) < chart.euclidean_radius
    if np.any(live):
        gam[live] = chart.christoffel_at(pts[live])
    return lap[inner] + np.einsum("vkij,vij->vk", gam, acc[inner])


def max_principle_check(chart: NormalChart, u, r1, domain: SimplexDomain, tol=None):
    """Discrete maximum-principle verification for ``rho(u) = t(u)^2``.

    Returns ``(flag, max_radius, defect, tol)`` where ``defect`` is the
    minimum over interior vertices of the discrete Laplacian of ``rho(u)``
    and ``tol`` defaults to ``10 h^2``.
    """
    u = np.asarray(u, dtype=float)
    if tol is None:
        tol = 10.0 * domain.h**2
    rad = np.linalg.norm(u, axis=1)
    inner, bnd = domain.interior_indices, domain.boundary_indices
    max_r = float(rad.max())
    max_in = float(rad[inner].max()) if inner.size else -np.inf
    flag = bool(max_in <= rad[bnd].max() + tol and max_r <= r1 + tol)
    lap = _laplacian(domain, rad**2)
    defect = float(lap[inner].min()) if inner.size else 0.0
    return flag, max_r, defect, tol


def fuchs_check(domain: SimplexDomain, chart: NormalChart, u, radius, p=2.0):
    """``sum_T w_T |du|^{p-2} |grad(rho o u)|_g^2`` over cells touching ``{rho(u) >= R^2}``."""
    u = check_field(domain, chart, u)
    rho = np.einsum("vi,vi->v", u, u)
    hit = np.any(rho[domain.cells] >= radius**2, axis=1)
    if not np.any(hit):
        return 0.0
    cells = domain.cells[hit]
    grads, ginv, w = domain.grads[hit], domain.ginv[hit], domain.weights[hit]
    drho = np.einsum("tb,tba->ta", rho[cells], grads)
    q = np.einsum("ta,tab,tb->t", drho, ginv, drho)
    if p != 2:
        H, _ = _metric(chart, u[cells].mean(axis=1), False)
        G = np.maximum(cell_density(cells, grads, ginv, u, H), 0.0)
        q = q * G ** (0.5 * (p - 2))
    return float(np.dot(w, q))
