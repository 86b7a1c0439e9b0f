"""Per-cell energy and gradient assembly.

Inputs share the simplex layout of :mod:`harmball.mesh`; ``H`` and ``dH``
are the target metric and its derivatives at each cell's evaluation point
(``dH[T, c, i, j] = d_c h_ij``). Cell energy density is

    G_T = g^{ab} Du^i_a Du^j_b h_ij,    E = (1/p) sum_T w_T G_T^{p/2}.

Vertex accumulation runs in cell order in both backends, so results are
deterministic.
"""

import numpy as np

from ._accel import njit, use_numba

__all__ = ["cell_density", "energy_from_density", "assemble_gradient"]


@njit(cache=True)
def _density_nb(cells, grads, ginv, u, H):
    nc, k = cells.shape
    m = grads.shape[2]
    n = u.shape[1]
    out = np.empty(nc)
    du = np.empty((n, m))
    for t in range(nc):
        for i in range(n):
            for a in range(m):
                s = 0.0
                for b in range(k):
                    s += u[cells[t, b], i] * grads[t, b, a]
                du[i, a] = s
        g = 0.0
        for i in range(n):
            for j in range(n):
                hij = H[t, i, j]
                if hij == 0.0:
                    continue
                for a in range(m):
                    for b in range(m):
                        g += ginv[t, a, b] * du[i, a] * du[j, b] * hij
        out[t] = g
    return out


def _du_np(cells, grads, u):
    return np.einsum("tbi,tba->tia", u[cells], grads)


def _density_np(cells, grads, ginv, u, H):
    du = _du_np(cells, grads, u)
    return np.einsum("tab,tia,tjb,tij->t", ginv, du, du, H)


def cell_density(cells, grads, ginv, u, H):
    """``G_T`` per cell."""
    if use_numba():
        return _density_nb(cells, grads, ginv, u, H)
    return _density_np(cells, grads, ginv, u, H)


def energy_from_density(weights, G, p):
    if p == 2:
        return 0.5 * float(np.dot(weights, G))
    return float(np.dot(weights, np.maximum(G, 0.0) ** (0.5 * p))) / p


@njit(cache=True)
def _gradient_nb(cells, grads, ginv, weights, u, H, dH, p):
    nc, k = cells.shape
    m = grads.shape[2]
    n = u.shape[1]
    out = np.zeros(u.shape)
    du = np.empty((n, m))
    gdu = np.empty((n, m))
    hgdu = np.empty((n, m))
    for t in range(nc):
        for i in range(n):
            for a in range(m):
                s = 0.0
                for b in range(k):
                    s += u[cells[t, b], i] * grads[t, b, a]
                du[i, a] = s
        # gdu = Du g^{-1}
        for i in range(n):
            for a in range(m):
                s = 0.0
                for b in range(m):
                    s += du[i, b] * ginv[t, b, a]
                gdu[i, a] = s
        g = 0.0
        for i in range(n):
            for a in range(m):
                s = 0.0
                for j in range(n):
                    s += H[t, i, j] * gdu[j, a]
                hgdu[i, a] = s
                g += du[i, a] * s
        if p == 2.0:
            fac = 0.5 * weights[t]
        elif g <= 0.0:
            fac = 0.0
        else:
            fac = 0.5 * weights[t] * g ** (0.5 * p - 1.0)
        if fac == 0.0:
            continue
        # metric-derivative term, shared by all vertices of the cell
        for c in range(n):
            s = 0.0
            for i in range(n):
                for j in range(n):
                    d = dH[t, c, i, j]
                    if d == 0.0:
                        continue
                    for a in range(m):
                        s += gdu[i, a] * du[j, a] * d
            s = fac * s / k
            for b in range(k):
                v = cells[t, b]
                acc = s
                for a in range(m):
                    acc += 2.0 * fac * hgdu[c, a] * grads[t, b, a]
                out[v, c] += acc
    return out


def _gradient_np(cells, grads, ginv, weights, u, H, dH, p):
    k = cells.shape[1]
    du = _du_np(cells, grads, u)
    gdu = np.einsum("tib,tba->tia", du, ginv)
    hgdu = np.einsum("tij,tja->tia", H, gdu)
    g = np.einsum("tia,tia->t", du, hgdu)
    if p == 2:
        fac = 0.5 * weights
    else:
        fac = 0.5 * weights * np.where(g > 0, np.maximum(g, 0.0) ** (0.5 * p - 1.0), 0.0)
    shared = fac[:, None] * np.einsum("tia,tja,tcij->tc", gdu, du, dH) / k
    local = 2.0 * fac[:, None, None] * np.einsum("tca,tba->tbc", hgdu, grads)
    local += shared[:, None, :]
    out = np.zeros(u.shape)
    np.add.at(out, cells.ravel(), local.reshape(-1, u.shape[1]))
    return out


def assemble_gradient(cells, grads, ginv, weights, u, H, dH, p=2.0):
    """Gradient of ``E`` with respect to every vertex value, ``(V, n)``."""
    p = float(p)
    if use_numba():
        return _gradient_nb(cells, grads, ginv, weights, u, H, dH, p)
    return _gradient_np(cells, grads, ginv, weights, u, H, dH, p)
