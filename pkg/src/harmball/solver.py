"""Fixed-trace minimization of the discrete energy.

Gradient descent on interior vertices with Armijo backtracking. The trial
step is the Barzilai-Borwein length from the previous iteration, which keeps
the iteration count manageable on stiff meshes without giving up the
monotone decrease enforced by the line search.

Close to a minimizer the per-step decrease drops below one ulp of the
energy. Steps whose computed energy change is within rounding are then
judged by the trapezoid estimate of the decrease from the gradients at
both ends, and the history records the previous energy minus that
estimate. Recorded energies therefore never increase, and stay within a
few ulps of a fresh evaluation. ``SolveReport.energy`` is always a fresh
evaluation.
"""

from __future__ import annotations

import logging
from dataclasses import dataclass, field
from typing import Optional

import numpy as np
from scipy.sparse.linalg import spsolve

from .chart import NormalChart
from .energy import (
    FieldError,
    dirichlet_energy,
    energy_and_gradient,
    harmonic_residual,
    max_principle_check,
    radial_projection,
)
from .mesh import BoundaryTrace, SimplexDomain, stiffness_matrix

__all__ = ["SolverConfig", "SolveReport", "harmonic_extension", "minimize"]

log = logging.getLogger(__name__)

# energy differences within this many ulps of E count as rounding noise
_FLOOR_ULPS = 64


@dataclass
class SolverConfig:
    p: float = 2.0
    max_iter: int = 100_000
    gtol: float = 1e-8
    armijo: float = 1e-4
    backtrack: float = 0.5
    r5: Optional[float] = None  # None: 1.5 x the chart's Euclidean radius, if finite
    seed: int = 0
    min_step: float = 1e-16
    r1: Optional[float] = None  # radius for the maximum-principle flag

    def __post_init__(self):
        if self.p < 2:
            raise ValueError("exponent p must be >= 2")
        if self.gtol <= 0 or self.max_iter < 0:
            raise ValueError("tolerances must be positive")
        if not 0 < self.armijo < 1 or not 0 < self.backtrack < 1:
            raise ValueError("line-search parameters must lie in (0, 1)")
        if self.r5 is not None and self.r5 <= 0:
            raise ValueError("projection radius must be positive")

    def projection_radius(self, chart: NormalChart):
        if self.r5 is not None:
            return float(self.r5)
        if np.isfinite(chart.euclidean_radius) and chart.euclidean_radius > 0:
            return 1.5 * chart.euclidean_radius
        return None


@dataclass
class SolveReport:
    energy: float
    iterations: int
    grad_norm: float
    max_radius: float
    residual_norm: float
    max_principle: bool
    subharmonic_defect: float
    converged: bool
    stagnated: bool
    message: str
    projection_radius: Optional[float] = None
    max_principle_tol: float = 0.0
    history: np.ndarray = field(default=None, repr=False)

    HISTORY_COLUMNS = ("iteration", "energy", "grad_norm", "step", "projected")


def harmonic_extension(domain: SimplexDomain, trace: BoundaryTrace):
    """Componentwise discrete harmonic extension of the trace."""
    trace.validate(domain)
    K = stiffness_matrix(domain).tocsr()
    inner, bnd = domain.interior_indices, domain.boundary_indices
    u = np.zeros((domain.n_vertices, trace.target_dim))
    u[bnd] = trace.values
    if inner.size:
        kii = K[inner][:, inner].tocsc()
        rhs = -(K[inner][:, bnd] @ trace.values)
        sol = spsolve(kii, rhs)
        u[inner] = sol.reshape(inner.size, -1)
    return u


def minimize(domain: SimplexDomain, chart: NormalChart, trace: BoundaryTrace, config=None, initial=None):
    """Minimize the energy with the boundary fixed to ``trace``; returns ``(field, report)``."""
    cfg = config or SolverConfig()
    trace.validate(domain)
    if trace.target_dim != chart.n:
        raise FieldError(f"trace has dimension {trace.target_dim}, chart has {chart.n}")
    r5 = cfg.projection_radius(chart)
    if r5 is not None and trace.max_radius() >= r5:
        raise FieldError(f"trace leaves the projection ball of radius {r5}")
    if initial is None:
        u = harmonic_extension(domain, trace)
    else:
        u = np.array(initial, dtype=float)
        if u.shape != (domain.n_vertices, chart.n):
            raise FieldError("initial field has the wrong shape")
        u[trace.indices] = trace.values
    inner = domain.interior_indices
    if r5 is not None:
        u[inner] = radial_projection(u[inner], r5)

    e, g = energy_and_gradient(domain, chart, u, cfg.p)
    gnorm = float(np.linalg.norm(g))
    hist = [(0, e, gnorm, 0.0, 0)]
    step = 1.0 / max(gnorm, 1.0)
    stagnated = False
    it = 0
    prev = None
    while gnorm > cfg.gtol and it < cfg.max_iter:
        it += 1
        if prev is not None:
            s, y = u[inner] - prev[0][inner], g[inner] - prev[1][inner]
            sy = float(np.vdot(s, y))
            if sy > 0:
                step = float(np.vdot(s, s)) / sy
        gsq = gnorm * gnorm
        floor = _FLOOR_ULPS * np.finfo(float).eps * abs(e)
        trial_grad = None
        while True:
            trial = u.copy()
            trial[inner] -= step * g[inner]
            et = dirichlet_energy(domain, chart, trial, cfg.p)
            if et <= e - cfg.armijo * step * gsq and et < e:
                break
            if abs(et - e) <= floor:
                # the change is below rounding of E; the trapezoid rule on the exact
                # directional derivatives, step/2 (|g|^2 + g.g_trial), resolves it
                _, gt = energy_and_gradient(domain, chart, trial, cfg.p)
                drop = 0.5 * step * (gsq + float(np.vdot(g[inner], gt[inner])))
                if drop >= cfg.armijo * step * gsq:
                    trial_grad = gt
                    et = e - drop
                    break
            step *= cfg.backtrack
            if step < cfg.min_step:
                stagnated = True
                break
        if stagnated:
            it -= 1
            break
        projected = 0
        if r5 is not None:
            pr = trial.copy()
            pr[inner] = radial_projection(trial[inner], r5)
            if not np.array_equal(pr, trial):
                ep = dirichlet_energy(domain, chart, pr, cfg.p)
                if ep <= et:
                    trial, et, projected, trial_grad = pr, ep, 1, None
        prev = (u, g)
        u = trial
        if trial_grad is None:
            e, g = energy_and_gradient(domain, chart, u, cfg.p)
        else:
            e, g = et, trial_grad
        gnorm = float(np.linalg.norm(g))
        hist.append((it, e, gnorm, step, projected))

    converged = gnorm <= cfg.gtol
    if converged:
        msg = "converged"
    elif stagnated:
        msg = "line search stagnated"
    else:
        msg = "iteration limit reached"
    log.info("minimize: %s after %d iterations, |grad| = %.3e", msg, it, gnorm)
    res = harmonic_residual(domain, chart, u)
    r1 = cfg.r1 if cfg.r1 is not None else np.inf
    flag, max_r, defect, tol = max_principle_check(chart, u, r1, domain)
    report = SolveReport(
        energy=dirichlet_energy(domain, chart, u, cfg.p), iterations=it, grad_norm=gnorm,
        max_radius=max_r,
        residual_norm=float(np.linalg.norm(res)) if res.size else 0.0,
        max_principle=flag, subharmonic_defect=defect, converged=converged,
        stagnated=stagnated, message=msg, projection_radius=r5, max_principle_tol=tol,
        history=np.array(hist, dtype=float),
    )
    return u, report
