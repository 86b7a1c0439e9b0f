"""Global normal Cartesian coordinates for polar metrics.

The target is identified with R^n through normal coordinates centered at the
pole, so ``t(x) = |x|``. Charts evaluate ``h_ij(x)``, ``d_k h_ij(x)`` and the
Christoffel symbols on batches of points of shape ``(..., n)``.

Index conventions: ``metric_deriv_at(x)[..., k, i, j] = d_k h_ij`` and
``christoffel_at(x)[..., k, i, j] = Gamma^k_ij``.
"""

from __future__ import annotations

import numpy as np

from .polar import PolarMetric, SphereChart, best_chart
from .warping import GeometryError, WarpingFunction, verify_admissible

__all__ = [
    "NormalChart",
    "EuclideanChart",
    "WarpedChart",
    "PolarChart",
    "to_normal_chart",
    "christoffel_from_derivs",
]

_POLE_EPS = 1e-8


def christoffel_from_derivs(h, dh):
    """``Gamma^k_ij = 1/2 h^{kl} (d_i h_jl + d_j h_il - d_l h_ij)``."""
    hinv = np.linalg.inv(h)
    lower = 0.5 * (np.einsum("...ijl->...lij", dh) + np.einsum("...jil->...lij", dh) - dh)
    return np.einsum("...kl,...lij->...kij", hinv, lower)


class NormalChart:
    """Base class; subclasses implement :meth:`metric_at` and :meth:`metric_deriv_at`."""

    n: int
    #: radius beyond which ``h`` is exactly Euclidean (``inf`` if never)
    euclidean_radius: float = np.inf

    def metric_at(self, x):
        raise NotImplementedError

    def metric_deriv_at(self, x):
        raise NotImplementedError

    def metric_and_deriv(self, x):
        return self.metric_at(x), self.metric_deriv_at(x)

    def christoffel_at(self, x):
        h, dh = self.metric_and_deriv(x)
        return christoffel_from_derivs(h, dh)

    @property
    def is_flat(self):
        return self.euclidean_radius == 0.0

    def _points(self, x):
        x = np.asarray(x, dtype=float)
        if x.shape[-1] != self.n:
            raise GeometryError(f"points must have last dimension {self.n}, got shape {x.shape}")
        return x


class EuclideanChart(NormalChart):
    """Flat target: ``h = I`` everywhere."""

    euclidean_radius = 0.0

    def __init__(self, n=2):
        self.n = n

    def metric_at(self, x):
        x = self._points(x)
        return np.broadcast_to(np.eye(self.n), x.shape[:-1] + (self.n, self.n)).copy()

    def metric_deriv_at(self, x):
        x = self._points(x)
        return np.zeros(x.shape[:-1] + (self.n,) * 3)

    def __repr__(self):
        return f"EuclideanChart(n={self.n})"


class WarpedChart(NormalChart):
    """Model metric ``dt^2 + sigma(t)^2 g_S`` in normal coordinates.

    ``h = f I + (1 - f) x x^T / t^2`` with ``f = sigma(t)^2 / t^2``; derivatives
    are closed form in ``sigma`` and ``sigma'``.
    """

    def __init__(self, sigma: WarpingFunction, n=2):
        self.sigma = sigma
        self.n = n
        self.euclidean_radius = float(sigma.info.get("euclidean_beyond", np.inf))
        self.domain_radius = sigma.domain_radius

    def __repr__(self):
        return f"WarpedChart({self.sigma.spec}, n={self.n})"

    def _parts(self, x):
        x = self._points(x)
        t = np.linalg.norm(x, axis=-1)
        pole = t < _POLE_EPS
        ts = np.where(pole, 1.0, t)
        if np.any(t >= self.domain_radius):
            raise GeometryError(f"point outside chart domain t < {self.domain_radius}")
        s = self.sigma.eval(ts)
        f = np.where(pole, 1.0, (s / ts) ** 2)
        return x, t, ts, pole, s, f

    def metric_at(self, x):
        x, t, ts, pole, s, f = self._parts(x)
        eye = np.eye(self.n)
        proj = np.einsum("...i,...j->...ij", x, x) / (ts**2)[..., None, None]
        return f[..., None, None] * eye + (1.0 - f)[..., None, None] * proj

    def metric_and_deriv(self, x):
        x, t, ts, pole, s, f = self._parts(x)
        n = self.n
        eye = np.eye(n)
        d1 = self.sigma.deriv1(ts)
        fp = np.where(pole, 0.0, 2.0 * s * d1 / ts**2 - 2.0 * s**2 / ts**3)
        g = 1.0 - f
        xs = x / ts[..., None]
        proj = np.einsum("...i,...j->...ij", xs, xs)
        h = f[..., None, None] * eye + g[..., None, None] * proj
        # d_k P_ij = (delta_ik xs_j + xs_i delta_jk - 2 xs_i xs_j xs_k) / t
        dproj = (
            np.einsum("ik,...j->...kij", eye, xs)
            + np.einsum("...i,jk->...kij", xs, eye)
            - 2.0 * np.einsum("...i,...j,...k->...kij", xs, xs, xs)
        ) / ts[..., None, None, None]
        dh = (fp[..., None, None, None] * np.einsum("...k,...ij->...kij", xs, eye - proj)
              + g[..., None, None, None] * dproj)
        dh = np.where(pole[..., None, None, None], 0.0, dh)
        return h, dh

    def metric_deriv_at(self, x):
        return self.metric_and_deriv(x)[1]


class PolarChart(NormalChart):
    """General polar metric in normal coordinates.

    ``h = Phi^{-T} diag(1, sigma_il) Phi^{-1}`` with ``Phi = [Y, t dY/dtheta]``.
    Derivatives use 4th-order central differences with step
    ``1e-3 * max(1, |x|)``. At the pole the identity is returned (smooth
    extension is the caller's declaration).
    """

    def __init__(self, metric: PolarMetric, fd_step=1e-3):
        self.metric = metric
        self.n = metric.n
        self.fd_step = fd_step
        self.euclidean_radius = float(metric.meta.get("euclidean_beyond", np.inf))

    def __repr__(self):
        return f"PolarChart({self.metric.label}, n={self.n})"

    def metric_at(self, x):
        x = self._points(x)
        n = self.n
        flat = x.reshape(-1, n)
        t = np.linalg.norm(flat, axis=1)
        if np.any(t >= self.metric.radius):
            raise GeometryError(f"point outside chart domain t < {self.metric.radius}")
        out = np.broadcast_to(np.eye(n), (flat.shape[0], n, n)).copy()
        live = t >= _POLE_EPS
        if np.any(live):
            tl = t[live]
            y = flat[live] / tl[:, None]
            ids, theta = best_chart(n, y)
            tang = np.empty((tl.size, n - 1, n - 1))
            jac = np.empty((tl.size, n, n - 1))
            for c in (0, 1):
                sel = ids == c
                if np.any(sel):
                    tang[sel] = self.metric.tangential_in(tl[sel], theta[sel], chart=c)
                    jac[sel] = SphereChart(n, c).jacobian(theta[sel])
            phi = np.concatenate([y[:, :, None], tl[:, None, None] * jac], axis=2)
            block = np.zeros((tl.size, n, n))
            block[:, 0, 0] = 1.0
            block[:, 1:, 1:] = tang
            phinv = np.linalg.inv(phi)
            out[live] = np.swapaxes(phinv, 1, 2) @ block @ phinv
        return out.reshape(x.shape[:-1] + (n, n))

    def metric_deriv_at(self, x):
        x = self._points(x)
        n = self.n
        step = self.fd_step * np.maximum(1.0, np.linalg.norm(x, axis=-1))[..., None]
        dh = np.empty(x.shape[:-1] + (n, n, n))
        for k in range(n):
            e = np.zeros(n)
            e[k] = 1.0
            hp1 = self.metric_at(x + step * e)
            hm1 = self.metric_at(x - step * e)
            hp2 = self.metric_at(x + 2 * step * e)
            hm2 = self.metric_at(x - 2 * step * e)
            dh[..., k, :, :] = (8 * (hp1 - hm1) - (hp2 - hm2)) / (12 * step[..., None])
        return dh


def to_normal_chart(metric, n=None, check=True) -> NormalChart:
    """Normal-coordinate chart of a polar metric or warping function.

    Warping-backed metrics are verified for pole admissibility (``check``)
    and get the closed-form :class:`WarpedChart`; ``sigma = t`` maps to
    :class:`EuclideanChart`. General polar metrics are trusted at the pole.
    """
    if isinstance(metric, WarpingFunction):
        sigma, dim = metric, (n or 2)
    elif isinstance(metric, PolarMetric):
        sigma, dim = metric.warping, metric.n
    else:
        raise TypeError(f"cannot build a chart from {type(metric).__name__}")
    if sigma is None:
        return PolarChart(metric)
    if check:
        report = verify_admissible(sigma)
        if not report:
            failed = [k for k, ok in report.checks.items() if not ok]
            raise GeometryError(f"warping {sigma.spec} is not admissible at the pole: {failed}")
    if sigma.kind == "linear":
        return EuclideanChart(dim)
    return WarpedChart(sigma, dim)
