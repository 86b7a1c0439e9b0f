"""Rotationally symmetric reduction for equivariant maps ``u(x) = (rho(|x|), x/|x|)``.

The energy of such a map from the unit ball of R^n into a model with warping
``sigma`` reduces to

    E[rho] = 1/2 int_0^1 (rho'^2 + (n-1) sigma(rho)^2 / r^2) r^{n-1} dr,

discretized on ``r_i = i/K`` with per-cell differences for ``rho'`` and the
trapezoid rule for both weights.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np
from scipy import linalg

from .warping import GeometryError, WarpingFunction, first_critical_radius

__all__ = [
    "tachikawa_threshold",
    "symmetric_energy",
    "symmetric_energy_gradient",
    "EquatorReport",
    "equator_experiment",
]


def tachikawa_threshold(n):
    """``(n-2)^2 / (4(n-1))``."""
    return (n - 2) ** 2 / (4 * (n - 1))


def _weights(k, n):
    r = np.linspace(0.0, 1.0, k + 1)
    dr = 1.0 / k
    rn1 = r ** (n - 1)
    cell = 0.5 * (rn1[:-1] + rn1[1:])  # trapezoid of r^{n-1} per cell
    node = np.full(k + 1, dr)
    node[[0, -1]] *= 0.5
    pot = node * (n - 1) * r ** (n - 3)
    return dr, cell, pot


def _check(rho, n):
    if n < 3:
        raise GeometryError("the symmetric reduction needs n >= 3")
    rho = np.asarray(rho, dtype=float)
    if rho.ndim != 1 or rho.size < 2:
        raise GeometryError("profile needs at least two values")
    return rho


def symmetric_energy(rho, sigma: WarpingFunction, n, p=2):
    """Discrete reduced energy of the profile ``rho`` (values at ``r_i = i/K``)."""
    if p != 2:
        raise NotImplementedError("the symmetric reduction is implemented for p = 2")
    rho = _check(rho, n)
    dr, cell, pot = _weights(rho.size - 1, n)
    slope = np.diff(rho) / dr
    return 0.5 * (np.dot(cell * dr, slope**2) + np.dot(pot, sigma.eval(rho) ** 2))


def symmetric_energy_gradient(rho, sigma: WarpingFunction, n):
    """Exact gradient of :func:`symmetric_energy` with respect to every node value."""
    rho = _check(rho, n)
    dr, cell, pot = _weights(rho.size - 1, n)
    flux = cell * np.diff(rho) / dr
    grad = np.zeros_like(rho)
    grad[:-1] -= flux
    grad[1:] += flux
    grad += pot * sigma.eval(rho) * sigma.deriv1(rho)
    return grad


def _hessian_bands(rho, sigma, n):
    """Upper banded storage of the (tridiagonal) Hessian over the free nodes ``0..K-1``."""
    dr, cell, pot = _weights(rho.size - 1, n)
    c = cell / dr
    diag = np.zeros(rho.size)
    diag[:-1] += c
    diag[1:] += c
    s, s1, s2 = sigma.eval(rho), sigma.deriv1(rho), sigma.deriv2(rho)
    curv = pot * (s1 * s1 + s * s2)
    free = rho.size - 1
    bands = np.zeros((2, free))
    bands[0, 1:] = -c[: free - 1]
    return bands, diag[:free], curv[:free]


def _newton(rho, sigma, n, max_iter=200, gtol=1e-13):
    """Damped Newton on the free nodes; indefinite Hessians are convexified."""
    rho = rho.copy()
    lim = sigma.domain_radius
    e = symmetric_energy(rho, sigma, n)
    it = 0
    for it in range(1, max_iter + 1):
        g = symmetric_energy_gradient(rho, sigma, n)[:-1]
        if np.linalg.norm(g) <= gtol:
            break
        bands, diag, curv = _hessian_bands(rho, sigma, n)
        try:
            bands[1] = diag + curv
            step = linalg.solveh_banded(bands, -g)
        except linalg.LinAlgError:
            bands[1] = diag + np.maximum(curv, 0.0) + 1e-12
            step = linalg.solveh_banded(bands, -g)
        if np.dot(step, g) >= 0:
            step = -g
        t = 1.0
        while t > 1e-14:
            trial = rho.copy()
            trial[:-1] += t * step
            if np.all(np.abs(trial) < lim):
                et = symmetric_energy(trial, sigma, n)
                if et <= e + 1e-4 * t * np.dot(step, g):
                    break
            t *= 0.5
        else:
            break
        if et >= e:  # rounding floor reached
            break
        rho, e = trial, et
    return rho, it, e


def _minimize_profile(rho0, sigma, n, coarse=64):
    k = rho0.size - 1
    r = np.linspace(0.0, 1.0, k + 1)
    kc = k
    while kc > coarse and kc % 2 == 0:
        kc //= 2
    prof = np.interp(np.linspace(0.0, 1.0, kc + 1), r, rho0)
    total = 0
    while True:
        prof, its, e = _newton(prof, sigma, n)
        total += its
        if kc == k:
            return prof, total, e
        kc *= 2
        prof = np.interp(np.linspace(0.0, 1.0, kc + 1), np.linspace(0.0, 1.0, kc // 2 + 1), prof)


@dataclass
class EquatorReport:
    n: int
    a0: float
    tachikawa: float
    threshold: float
    regime: str
    equator_energy: float
    minimized_energy: float
    equator_gradient_norm: float
    bounded_away: bool
    center_value: float
    iterations: int
    profile: np.ndarray

    @property
    def equator_is_minimal(self):
        return self.equator_energy <= self.minimized_energy


def equator_experiment(sigma: WarpingFunction, n=3, k=4096, a0=None, initial=None, bound_tol=1e-2):
    """Compare the equator profile ``rho = a0`` with a minimizer of the reduced energy.

    The minimizer is found by damped Newton from ``initial`` (default
    ``rho(r) = a0 r``, a smooth profile through the pole) with ``rho(1) = a0``
    fixed, using grid sequencing from ``K = 64`` up to ``k``.
    ``bounded_away`` is true when ``|rho - a0| > bound_tol * a0`` on ``r <= 0.1``.
    """
    if n < 3:
        raise GeometryError("the symmetric reduction needs n >= 3")
    if a0 is None:
        a0 = first_critical_radius(sigma)
        if a0 is None:
            raise GeometryError("warping has no interior critical radius")
    a0 = float(a0)
    if abs(float(sigma.deriv1(a0))) > 1e-8:
        raise GeometryError(f"sigma'(a0) = {float(sigma.deriv1(a0)):.3g} is not zero")
    q = float(-sigma.eval(a0) * sigma.deriv2(a0))
    thr = tachikawa_threshold(n)
    if q <= 0:
        regime = "degenerate"
    elif q < thr:
        regime = "below threshold (equator may minimize)"
    else:
        regime = "unstable equator"

    r = np.linspace(0.0, 1.0, k + 1)
    eq = np.full(k + 1, a0)
    e_eq = symmetric_energy(eq, sigma, n)
    g_eq = float(np.linalg.norm(symmetric_energy_gradient(eq, sigma, n)[:-1]))

    rho0 = a0 * r if initial is None else np.asarray(initial(r), dtype=float)
    prof, iters, e_min = _minimize_profile(rho0, sigma, n)
    near = r <= 0.1
    away = bool(np.min(np.abs(prof[near] - a0)) > bound_tol * a0)
    return EquatorReport(
        n=n, a0=a0, tachikawa=q, threshold=thr, regime=regime,
        equator_energy=float(e_eq), minimized_energy=float(e_min), equator_gradient_norm=g_eq,
        bounded_away=away, center_value=float(prof[0]), iterations=iters, profile=prof,
    )
