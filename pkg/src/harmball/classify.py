"""Classify target balls: uniform regularity versus strict convexity of ``t^2``.

Regularity is the classical curvature-radius test ``R sqrt(Lambda) < pi/2``
with ``Lambda`` an upper bound for the sectional curvatures on the ball.
Convexity of the squared distance is the weaker property used by the
gluing construction; the two separate on the spliced preset.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .chart import NormalChart, PolarChart, christoffel_from_derivs
from .gluing import certify_convexity
from .polar import PolarMetric, SphereChart, sample_directions
from .warping import GeometryError, WarpingFunction, sectional_curvatures

__all__ = [
    "BallReport",
    "QuadraticFormWitness",
    "classify_ball",
    "hkw_quadratic_form",
    "riemann_tensor",
    "sampled_sectional_curvature",
]

GRID = 129
MARGIN = 0.1


@dataclass
class BallReport:
    radius: float
    curvature_bound: float  # Lambda, clamped at 0 for the regularity test
    curvature_max: float  # raw sampled / closed-form maximum
    regular: bool
    convex: bool
    condition_a: str
    method: str
    witnesses: dict = field(default_factory=dict)

    @property
    def radius_times_sqrt_lambda(self):
        return self.radius * np.sqrt(self.curvature_bound)

    def to_text(self):
        mark = {True: "yes", False: "no"}
        lines = [
            f"radius = {self.radius:.17g}",
            f"lambda = {self.curvature_bound:.17g}",
            f"curvature_max = {self.curvature_max:.17g}",
            f"r_sqrt_lambda = {self.radius_times_sqrt_lambda:.17g}",
            f"regular = {mark[self.regular]}",
            f"convex = {mark[self.convex]}",
            f"condition_a = {self.condition_a}",
            f"method = {self.method}",
        ]
        for key, val in self.witnesses.items():
            lines.append(f"witness.{key} = {_fmt(val)}")
        return "\n".join(lines) + "\n"


def _fmt(val):
    if isinstance(val, (float, np.floating)):
        return f"{float(val):.17g}"
    if isinstance(val, np.ndarray):
        return " ".join(f"{float(v):.17g}" for v in val.ravel())
    return str(val)


@dataclass
class QuadraticFormWitness:
    y: np.ndarray
    vectors: np.ndarray
    value: float


def riemann_tensor(chart: NormalChart, x, step=1e-4):
    """``R^l_{ijk}`` at points ``x`` (``(..., n, n, n, n)``, index order ``l, i, j, k``).

    Christoffel derivatives use 4th-order central differences.
    """
    x = np.asarray(x, dtype=float)
    n = chart.n
    gam = chart.christoffel_at(x)
    dgam = np.empty(x.shape[:-1] + (n,) * 4)  # [m, k, i, j] = d_m Gamma^k_ij
    for m in range(n):
        e = np.zeros(n)
        e[m] = step
        dgam[..., m, :, :, :] = (
            8 * (chart.christoffel_at(x + e) - chart.christoffel_at(x - e))
            - (chart.christoffel_at(x + 2 * e) - chart.christoffel_at(x - 2 * e))
        ) / (12 * step)
    # R^l_{ijk} = d_i G^l_jk - d_j G^l_ik + G^l_im G^m_jk - G^l_jm G^m_ik
    r = (np.einsum("...iljk->...lijk", dgam) - np.einsum("...jlik->...lijk", dgam)
         + np.einsum("...lim,...mjk->...lijk", gam, gam) - np.einsum("...ljm,...mik->...lijk", gam, gam))
    return r


def sampled_sectional_curvature(chart: NormalChart, x, planes):
    """Sectional curvature ``K(X, Y)`` at each point for each plane ``(X, Y)`` in ``planes``."""
    x = np.asarray(x, dtype=float)
    riem = riemann_tensor(chart, x)
    h = chart.metric_at(x)
    low = np.einsum("...lm,...lijk->...mijk", h, riem)  # R_{m i j k} = h_ml R^l_ijk
    out = []
    for X, Y in planes:
        num = np.einsum("...mijk,i,j,k,m->...", low, X, Y, Y, X)
        xx, yy, xy = (np.einsum("...ij,i,j->...", h, a, b) for a, b in ((X, X), (Y, Y), (X, Y)))
        out.append(num / (xx * yy - xy * xy))
    return np.stack(out, axis=-1)


def _model_report(sigma: WarpingFunction, radius, grid):
    hi = min(radius, sigma.domain_radius * (1 - 1e-9))
    t = hi * np.arange(1, grid + 1) / grid
    rad, tg = sectional_curvatures(sigma, t)
    both = np.maximum(rad, tg)
    i = int(np.argmax(both))
    lam_raw = float(both[i])
    fine = hi * np.arange(1, 8 * grid + 1) / (8 * grid)
    if radius >= sigma.domain_radius:
        fine = fine[:-1]
    d1 = np.asarray(sigma.deriv1(fine))
    j = int(np.argmin(d1))
    convex = bool(d1[j] > 0)
    finite = np.isfinite(sigma.domain_radius)
    return lam_raw, convex, ("not evaluated" if finite else "satisfied"), {
        "curvature_argmax_t": float(t[i]),
        "min_sigma_prime": float(d1[j]),
        "min_sigma_prime_t": float(fine[j]),
    }


def _polar_report(metric: PolarMetric, radius, grid, seed):
    n = metric.n
    chart = PolarChart(metric)
    hi = min(radius, metric.radius * (1 - 1e-6))
    t = hi * np.arange(1, grid + 1) / grid
    ids, theta = sample_directions(n, grid, seed)
    y = np.concatenate([SphereChart(n, c).embed(theta[ids == c]) for c in (0, 1) if np.any(ids == c)])
    pts = (t[:, None, None] * y[None, :, :]).reshape(-1, n)
    rng = np.random.default_rng(seed)
    eye = np.eye(n)
    planes = [(eye[i], eye[j]) for i in range(n) for j in range(i + 1, n)]
    planes += [tuple(rng.standard_normal((2, n))) for _ in range(2 * n if n > 2 else 0)]
    curv = sampled_sectional_curvature(chart, pts, planes)
    flat = curv.max(axis=-1)
    i = int(np.argmax(flat))
    raw = float(flat[i])
    cert = certify_convexity(metric, (0.0, hi), grid=min(grid, 64), seed=seed)
    return raw, cert.passed, "not evaluated", {
        "curvature_argmax_point": pts[i],
        "convexity_min_eigenvalue": cert.min_eigenvalue,
    }


def classify_ball(target, radius, n=2, grid=GRID, seed=0) -> BallReport:
    """Regularity and convexity flags for the ball of ``radius`` about the pole.

    Model targets (warping functions, or polar metrics built from one) use the
    closed-form curvatures sampled on ``grid`` radii; general polar metrics
    use sampled sectional curvature in normal coordinates with a 10% margin
    and the convexity certificate.
    """
    radius = float(radius)
    if radius <= 0:
        raise GeometryError("radius must be positive")
    sigma = target if isinstance(target, WarpingFunction) else getattr(target, "warping", None)
    dom = sigma.domain_radius if sigma is not None else target.radius
    if radius > dom:
        raise GeometryError(f"radius {radius} exceeds the metric domain {dom}")
    if sigma is not None:
        raw, convex, cond_a, wit = _model_report(sigma, radius, grid)
        lam = raw
        method = "closed form"
    else:
        raw, convex, cond_a, wit = _polar_report(target, radius, grid, seed)
        lam = raw + MARGIN * abs(raw)
        method = "sampled"
    lam = max(lam, 0.0)
    regular = bool(radius * np.sqrt(lam) < np.pi / 2 and radius < dom)
    return BallReport(radius, lam, raw, regular, convex, cond_a, method, wit)


def hkw_quadratic_form(chart: NormalChart, y, vectors) -> QuadraticFormWitness:
    """``Q_y(v, v) = sum_a (h_ij(y) - y^k Gamma^k_ij(y)) v^{a,i} v^{a,j}``."""
    y = np.asarray(y, dtype=float)
    v = np.atleast_2d(np.asarray(vectors, dtype=float))
    h, dh = chart.metric_and_deriv(y[None, :])
    gam = christoffel_from_derivs(h, dh)[0]
    form = h[0] - np.einsum("k,kij->ij", y, gam)
    val = float(np.einsum("ai,ij,aj->", v, form, v))
    return QuadraticFormWitness(y.copy(), v.copy(), val)
