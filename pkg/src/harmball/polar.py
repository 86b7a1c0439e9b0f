"""Polar-form metrics ``dt^2 + sigma_il(t, theta) dtheta^i dtheta^l`` on balls of R^n.

Angular coordinates on ``S^{n-1}`` use hyperspherical angles in one of two
charts. Chart 0 is the standard parametrization from the first axis; chart 1
is the same parametrization with the coordinate axes reversed. Their singular
sets (``x_{n-1} = x_n = 0`` and ``x_1 = x_2 = 0``) are disjoint, so every
direction is well inside at least one chart.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Callable, Optional

import numpy as np

from .warping import GeometryError, WarpingFunction

__all__ = [
    "SphereChart",
    "PolarMetric",
    "eval_metric",
    "hessian_radial",
    "sample_directions",
    "CHART_MARGIN",
]

CHART_MARGIN = 1e-3


class SphereChart:
    """Hyperspherical angles on ``S^{n-1}`` (one of two charts)."""

    def __init__(self, n: int, chart: int = 0):
        if n < 2:
            raise GeometryError("sphere chart needs n >= 2")
        if chart not in (0, 1):
            raise GeometryError("chart index must be 0 or 1")
        self.n = n
        self.chart = chart

    def _orient(self, y):
        return y[..., ::-1] if self.chart == 1 else y

    def embed(self, theta):
        """Unit vectors ``Y(theta)`` in R^n, shape ``(..., n)``."""
        theta = np.asarray(theta, dtype=float)
        n = self.n
        y = np.empty(theta.shape[:-1] + (n,))
        prod = np.ones(theta.shape[:-1])
        for i in range(n - 1):
            y[..., i] = prod * np.cos(theta[..., i])
            prod = prod * np.sin(theta[..., i])
        y[..., n - 1] = prod
        return self._orient(y)

    def angles(self, y):
        """Inverse of :meth:`embed` for unit (or any nonzero) vectors."""
        y = self._orient(np.asarray(y, dtype=float))
        n = self.n
        theta = np.empty(y.shape[:-1] + (n - 1,))
        for i in range(n - 2):
            tail = np.linalg.norm(y[..., i + 1 :], axis=-1)
            theta[..., i] = np.arctan2(tail, y[..., i])
        theta[..., n - 2] = np.arctan2(y[..., n - 1], y[..., n - 2])
        return theta

    def jacobian(self, theta):
        """``dY/dtheta`` with shape ``(..., n, n-1)``."""
        theta = np.asarray(theta, dtype=float)
        n = self.n
        s, c = np.sin(theta), np.cos(theta)
        jac = np.zeros(theta.shape[:-1] + (n, n - 1))
        for i in range(n):
            last = np.cos(theta[..., i]) if i < n - 1 else 1.0
            for j in range(min(i + 1, n - 1)):
                prod = np.ones(theta.shape[:-1])
                for l in range(i):
                    prod = prod * (c[..., l] if l == j else s[..., l])
                if j < i:
                    jac[..., i, j] = prod * last
                else:
                    jac[..., i, j] = -prod * s[..., i]
        if self.chart == 1:
            jac = jac[..., ::-1, :]
        return jac

    def metric(self, theta):
        """Round metric ``g_{S^{n-1}}`` in this chart, ``(..., n-1, n-1)``."""
        theta = np.asarray(theta, dtype=float)
        m = self.n - 1
        diag = np.ones(theta.shape[:-1] + (m,))
        prod = np.ones(theta.shape[:-1])
        for i in range(1, m):
            prod = prod * np.sin(theta[..., i - 1]) ** 2
            diag[..., i] = prod
        out = np.zeros(theta.shape[:-1] + (m, m))
        idx = np.arange(m)
        out[..., idx, idx] = diag
        return out

    def margin(self, theta):
        """Distance-like margin from the chart's singular set (min of ``|sin|``)."""
        theta = np.asarray(theta, dtype=float)
        if self.n == 2:
            return np.ones(theta.shape[:-1])
        return np.min(np.abs(np.sin(theta[..., : self.n - 2])), axis=-1)


def best_chart(n, y):
    """Pick, per direction, the chart with the larger margin; returns ``(chart_ids, theta)``."""
    c0, c1 = SphereChart(n, 0), SphereChart(n, 1)
    th0, th1 = c0.angles(y), c1.angles(y)
    use1 = c1.margin(th1) > c0.margin(th0)
    theta = np.where(use1[..., None], th1, th0)
    return use1.astype(int), theta


@dataclass(eq=False)
class PolarMetric:
    """Metric ``dt^2 + sigma_il(t, theta)`` on the Euclidean ball of radius ``radius``.

    ``tangential(t, theta)`` and ``tangential_dt(t, theta)`` are given in
    chart 0 angles and return ``(..., n-1, n-1)`` arrays. Metrics built with
    :meth:`from_warping` keep a reference to the warping function, which the
    rest of the library uses for closed-form fast paths.
    """

    n: int
    tangential: Callable
    tangential_dt: Callable
    radius: float = np.inf
    warping: Optional[WarpingFunction] = None
    label: str = "polar"
    meta: dict = field(default_factory=dict)

    @classmethod
    def from_warping(cls, sigma: WarpingFunction, n: int = 2):
        sph = SphereChart(n, 0)

        def tang(t, theta):
            t = np.asarray(t, dtype=float)
            return (sigma.eval(t) ** 2)[..., None, None] * sph.metric(theta)

        def tang_dt(t, theta):
            t = np.asarray(t, dtype=float)
            return (2.0 * sigma.eval(t) * sigma.deriv1(t))[..., None, None] * sph.metric(theta)

        return cls(n, tang, tang_dt, radius=sigma.domain_radius, warping=sigma, label=sigma.spec)

    def tangential_in(self, t, theta, chart=0, dt=False):
        """Tangential block (or its t-derivative) in the given chart's angles."""
        f = self.tangential_dt if dt else self.tangential
        if chart == 0:
            return f(t, theta)
        if self.warping is not None:
            sph = SphereChart(self.n, 1)
            w = self.warping
            t = np.asarray(t, dtype=float)
            scal = 2.0 * w.eval(t) * w.deriv1(t) if dt else w.eval(t) ** 2
            return scal[..., None, None] * sph.metric(theta)
        # pull back the chart-0 expression through the transition map
        c0, c1 = SphereChart(self.n, 0), SphereChart(self.n, 1)
        y = c1.embed(theta)
        th0 = c0.angles(y)
        a0, a1 = c0.jacobian(th0), c1.jacobian(theta)
        jt = np.linalg.solve(np.swapaxes(a0, -1, -2) @ a0, np.swapaxes(a0, -1, -2) @ a1)
        return np.swapaxes(jt, -1, -2) @ f(t, th0) @ jt

    def is_symmetric(self):
        return self.warping is not None


def _check_point(metric, t):
    t = np.asarray(t, dtype=float)
    if np.any(t <= 0) or np.any(t >= metric.radius):
        raise GeometryError(f"t must lie in (0, {metric.radius}), got {t}")
    return t


def eval_metric(metric: PolarMetric, t, theta, chart=0):
    """Full ``n x n`` metric in the polar frame: ``diag(1, sigma_il(t, theta))``."""
    t = _check_point(metric, t)
    theta = np.asarray(theta, dtype=float)
    tang = metric.tangential_in(t, theta, chart)
    n = metric.n
    out = np.zeros(tang.shape[:-2] + (n, n))
    out[..., 0, 0] = 1.0
    out[..., 1:, 1:] = tang
    return out


def hessian_radial(metric: PolarMetric, t, theta, X, chart=0):
    """``Hess t (X, X) = 1/2 X^i X^l d_t sigma_il``; the radial component of ``X`` drops out."""
    t = _check_point(metric, t)
    X = np.asarray(X, dtype=float)
    xt = X[..., 1:]
    dsig = metric.tangential_in(t, np.asarray(theta, dtype=float), chart, dt=True)
    return 0.5 * np.einsum("...i,...il,...l->...", xt, dsig, xt)


def sample_directions(n, count, seed=0):
    """Deterministic directions on ``S^{n-1}`` as ``(chart_ids, theta)``.

    For ``n = 2`` the angles are equispaced; otherwise seeded Gaussian samples
    are normalized. Directions closer than :data:`CHART_MARGIN` to the
    singular set of their best chart are nudged away.
    """
    if n == 2:
        theta = (np.arange(count) + 0.5) * (2 * np.pi / count)
        return np.zeros(count, dtype=int), theta[:, None]
    rng = np.random.default_rng(seed)
    y = rng.standard_normal((count, n))
    y /= np.linalg.norm(y, axis=1, keepdims=True)
    ids, theta = best_chart(n, y)
    sin_part = theta[:, : n - 2]
    nudged = np.where(np.abs(np.sin(sin_part)) < CHART_MARGIN, sin_part + 2 * CHART_MARGIN, sin_part)
    theta[:, : n - 2] = nudged
    return ids, theta
