"""Deform a polar metric into one with a hyperbolic shell and a Euclidean end.

Pipeline (radii ``R1 < R2 < R3 < R4``):

* ``t < R1``          original tangential block ``sigma_il``
* ``R1 <= t < R2``    ``phi_s sigma_il + phi_h k^{-1} sinh^2(sqrt(k) t) g_S``
* ``R2 <= t <= R3``   ``k^{-1} sinh^2(sqrt(k) t) g_S``
* ``R3 < t < R4``     ``sigma_tilde(t)^2 g_S`` (smooth increasing splice)
* ``t >= R4``         ``t^2 g_S`` (Euclidean)

Convexity of ``t^2`` is certified by sampling ``Hess(t^2)`` through the
polar-frame formula ``Hess t(X, X) = 1/2 X^i X^l d_t sigma_il``.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Optional

import numpy as np

from .polar import PolarMetric, SphereChart, sample_directions
from .smooth import CumulativeIntegral, smooth_step
from .warping import GeometryError, WarpingFunction

__all__ = [
    "GluingError",
    "TransitionPair",
    "make_transition",
    "GluingParams",
    "estimate_c2",
    "k_inequality",
    "choose_k",
    "SigmaTilde",
    "build_sigma_tilde",
    "GluedMetric",
    "build_hat_metric",
    "build_euclidean_end",
    "ConvexityCertificate",
    "certify_convexity",
    "hess_mix_terms",
    "dominance_margin",
    "seam_report",
    "glued_to_text",
    "glued_from_text",
]


class GluingError(GeometryError):
    """Construction refused or failed (precondition or certificate)."""


# ---------------------------------------------------------------- transitions


@dataclass(frozen=True)
class TransitionPair:
    """Partition of unity ``phi_s + phi_h = 1`` switching on ``[r1, r2]``."""

    r1: float
    r2: float

    def _x(self, t):
        return (np.asarray(t, dtype=float) - self.r1) / (self.r2 - self.r1)

    def phi_sigma(self, t, order=0):
        x = self._x(t)
        if order == 0:
            return 1.0 - smooth_step(x)
        return -smooth_step(x, order) / (self.r2 - self.r1) ** order

    def phi_h(self, t, order=0):
        x = self._x(t)
        if order == 0:
            return smooth_step(x)
        return smooth_step(x, order) / (self.r2 - self.r1) ** order


def make_transition(r1, r2) -> TransitionPair:
    r1, r2 = float(r1), float(r2)
    if not 0 < r1 < r2:
        raise GluingError(f"transition needs 0 < R1 < R2, got R1={r1}, R2={r2}")
    return TransitionPair(r1, r2)


# ---------------------------------------------------------------- parameters


def _hyp(k, t, order=0):
    """``k^{-1/2} sinh(sqrt(k) t)`` and derivatives."""
    s = np.sqrt(k)
    t = np.asarray(t, dtype=float)
    if order == 0:
        return np.sinh(s * t) / s
    if order == 1:
        return np.cosh(s * t)
    return s * np.sinh(s * t)


def k_inequality(k, c2, r1):
    """The k-selection predicate ``sinh^2(sqrt(k) R1) >= k sinh^2(R1) / c2``."""
    return bool(np.sinh(np.sqrt(k) * r1) ** 2 >= k * np.sinh(r1) ** 2 / c2)


def choose_k(c2, r1, max_doublings=256):
    """Smallest ``k`` in ``{1, 2, 4, ...}`` satisfying :func:`k_inequality`."""
    if c2 <= 0 or r1 <= 0:
        raise GluingError(f"choose_k needs c2 > 0 and R1 > 0, got c2={c2}, R1={r1}")
    k = 1.0
    for _ in range(max_doublings):
        if k_inequality(k, c2, r1):
            return k
        k *= 2.0
    raise GluingError("k search did not terminate")  # pragma: no cover


@dataclass
class GluingParams:
    r1: float
    r2: float
    k: float
    c2: float
    r3: Optional[float] = None
    r4: Optional[float] = None
    safety: float = 1.1

    def violations(self):
        out = []
        radii = [r for r in (self.r1, self.r2, self.r3, self.r4) if r is not None]
        if not all(a < b for a, b in zip(radii, radii[1:])) or radii[0] <= 0:
            out.append("radii must satisfy 0 < R1 < R2 < R3 < R4")
        if self.k <= 0 or self.c2 <= 0:
            out.append("k and c2 must be positive")
        elif not k_inequality(self.k, self.c2, self.r1):
            out.append("k violates sinh^2(sqrt(k) R1) >= k sinh^2(R1) / c2")
        if self.r3 is not None and self.r4 is not None and not self.r4 > _hyp(self.k, self.r3):
            out.append("R4 must exceed k^{-1/2} sinh(sqrt(k) R3)")
        if self.safety < 1:
            out.append("safety factor must be >= 1")
        return out


def _as_polar(metric, n=2):
    if isinstance(metric, WarpingFunction):
        return PolarMetric.from_warping(metric, n)
    if isinstance(metric, GluedMetric):
        return metric.as_polar()
    return metric


def _chol_gen_min(a, b):
    """Smallest generalized eigenvalue of the pencil ``(a, b)`` with ``b`` SPD; also the eigenvector."""
    try:
        low = np.linalg.cholesky(b)
    except np.linalg.LinAlgError:
        raise GeometryError("tangential metric is not positive definite at a sample") from None
    li = np.linalg.inv(low)
    m = li @ a @ np.swapaxes(li, -1, -2)
    m = 0.5 * (m + np.swapaxes(m, -1, -2))
    w, v = np.linalg.eigh(m)
    vec = np.swapaxes(li, -1, -2) @ v[..., :, :1]
    return w[..., 0], vec[..., 0]


def _grid(lo, hi, count, include_lo=True):
    if include_lo:
        return np.linspace(lo, hi, count)
    return lo + (hi - lo) * np.arange(1, count + 1) / count


def estimate_c2(metric, r1, r2, grid=64, safety=1.1, seed=0):
    """Comparison constant ``c2`` with ``sinh^2(t) g_S >= c2 sigma_il`` on ``R1 <= t <= R2``.

    Returns ``min / safety`` of the smallest generalized eigenvalue of the pair
    ``(sinh^2(t) g_S, sigma_il)`` over a ``grid x grid`` sample of the annulus.
    """
    metric = _as_polar(metric)
    if not r2 < metric.radius:
        raise GluingError(f"annulus outer radius {r2} must lie inside the metric domain {metric.radius}")
    n = metric.n
    t = _grid(r1, r2, grid)
    ids, theta = sample_directions(n, grid, seed)
    best = np.inf
    for c in (0, 1):
        sel = ids == c
        if not np.any(sel):
            continue
        th = theta[sel]
        tt = np.repeat(t, th.shape[0])
        thh = np.tile(th, (t.size, 1))
        sig = metric.tangential_in(tt, thh, chart=c)
        hyp1 = (np.sinh(tt) ** 2)[:, None, None] * SphereChart(n, c).metric(thh)
        lam, _ = _chol_gen_min(hyp1, sig)
        best = min(best, float(lam.min()))
    return best / safety


# ---------------------------------------------------------------- splice


class SigmaTilde:
    """Smooth increasing splice from ``k^{-1/2} sinh(sqrt(k) t)`` (``t <= R3``) to ``t`` (``t >= R4``).

    Built in derivative space::

        sigma_tilde'(t) = psi1 H' + (1 - psi1) [(1 - psi2) beta + psi2]

    where ``psi1`` falls from 1 to 0 on ``[R3, R3 + w]``, ``psi2`` rises from 0
    to 1 on ``[R4 - w, R4]`` and ``beta`` is fixed by ``sigma_tilde(R4) = R4``.
    With ``w`` small enough ``beta > 0``, hence ``sigma_tilde' > 0``.
    """

    def __init__(self, k, r2, r3, r4):
        self.k, self.r2, self.r3, self.r4 = float(k), float(r2), float(r3), float(r4)
        if not 0 < self.r2 < self.r3 < self.r4:
            raise GluingError("splice needs 0 < R2 < R3 < R4")
        h3 = float(_hyp(self.k, self.r3))
        slack = self.r4 - h3
        if slack <= 0:
            raise GluingError(f"R4={self.r4} must exceed k^-1/2 sinh(sqrt(k) R3)={h3}")
        quarter = (self.r4 - self.r3) / 4.0
        slope = float(_hyp(self.k, self.r3 + quarter, 1))
        self.width = min(quarter, slack / (2.0 * (slope + 1.0)))
        self.h3 = h3
        r3, r4, w = self.r3, self.r4, self.width
        self._p = CumulativeIntegral(lambda s: self._psi1(s) * _hyp(self.k, s, 1), r3, r4, panels=128)
        self._q = CumulativeIntegral(lambda s: (1 - self._psi1(s)) * (1 - self._psi2(s)), r3, r4, panels=128)
        self._r = CumulativeIntegral(lambda s: (1 - self._psi1(s)) * self._psi2(s), r3, r4, panels=128)
        self.beta = (r4 - h3 - self._p.total - self._r.total) / self._q.total
        self.certificate = None

    def _psi1(self, s, order=0):
        x = (np.asarray(s, dtype=float) - self.r3) / self.width
        if order == 0:
            return 1.0 - smooth_step(x)
        return -smooth_step(x, order) / self.width**order

    def _psi2(self, s, order=0):
        x = (np.asarray(s, dtype=float) - (self.r4 - self.width)) / self.width
        if order == 0:
            return smooth_step(x)
        return smooth_step(x, order) / self.width**order

    def mid(self, t, order=0):
        """Splice formula on ``[R3, R4]`` (extends continuously to the endpoints)."""
        t = np.asarray(t, dtype=float)
        if order == 0:
            return self.h3 + self._p(t) + self.beta * self._q(t) + self._r(t)
        p1, p2 = self._psi1(t), self._psi2(t)
        m = (1 - p2) * self.beta + p2
        hp = _hyp(self.k, t, 1)
        if order == 1:
            return p1 * hp + (1 - p1) * m
        dm = self._psi2(t, 1) * (1 - self.beta)
        return self._psi1(t, 1) * (hp - m) + p1 * _hyp(self.k, t, 2) + (1 - p1) * dm

    def __call__(self, t, order=0):
        """``sigma_tilde`` on ``[R2, inf)`` (hyperbolic below R3, identity above R4)."""
        t = np.asarray(t, dtype=float)
        lin = t if order == 0 else (np.ones_like(t) if order == 1 else np.zeros_like(t))
        return np.where(t <= self.r3, _hyp(self.k, t, order), np.where(t >= self.r4, lin, self.mid(t, order)))

    def monotonicity(self, samples=10_000):
        t = np.linspace(self.r2, self.r4 + (self.r4 - self.r3), samples)
        d = self(t, 1)
        i = int(np.argmin(d))
        return {"min_derivative": float(d[i]), "at": float(t[i]), "samples": samples, "passed": bool(d[i] > 0)}


def build_sigma_tilde(k, r2, r3, r4, retries=4, samples=10_000):
    """Splice with a sampled monotonicity certificate; widens ``R4 <- 2 R4`` on failure."""
    last = None
    for _ in range(retries + 1):
        st = SigmaTilde(k, r2, r3, r4)
        cert = st.monotonicity(samples)
        st.certificate = cert
        if cert["passed"] and st.beta > 0:
            return st
        last = cert
        r4 = 2.0 * r4
    raise GluingError(f"splice not monotone after {retries} widenings; witness {last}")


# ---------------------------------------------------------------- glued metric


@dataclass(eq=False)
class GluedMetric:
    """Piecewise polar metric produced by :func:`build_hat_metric` / :func:`build_euclidean_end`."""

    base: PolarMetric
    params: GluingParams
    transition: TransitionPair
    splice: Optional[SigmaTilde] = None
    certificate: Optional["ConvexityCertificate"] = None
    notes: dict = field(default_factory=dict)

    @property
    def n(self):
        return self.base.n

    @property
    def has_euclidean_end(self):
        return self.splice is not None

    def piece_names(self):
        names = ["original", "blend", "hyperbolic"]
        if self.splice is not None:
            names += ["splice", "euclidean"]
        return names

    def outer(self, t, order=0):
        """Warping factor for ``t >= R2``."""
        if self.splice is not None:
            return self.splice(t, order)
        return _hyp(self.params.k, t, order)

    def _blend(self, t, theta, chart, dt):
        tr, k = self.transition, self.params.k
        sig = self.base.tangential_in(t, theta, chart)
        hyp = (_hyp(k, t) ** 2)[..., None, None] * SphereChart(self.n, chart).metric(theta)
        ps, ph = tr.phi_sigma(t)[..., None, None], tr.phi_h(t)[..., None, None]
        if not dt:
            return ps * sig + ph * hyp
        dsig = self.base.tangential_in(t, theta, chart, dt=True)
        dhyp = (2 * _hyp(k, t) * _hyp(k, t, 1))[..., None, None] * SphereChart(self.n, chart).metric(theta)
        dph = tr.phi_h(t, 1)[..., None, None]
        return ps * dsig + ph * dhyp + dph * (hyp - sig)

    def tangential(self, t, theta, chart=0, dt=False):
        t = np.asarray(t, dtype=float)
        theta = np.asarray(theta, dtype=float)
        t, theta = np.broadcast_arrays(t, theta[..., 0])[0], theta
        m = self.n - 1
        out = np.empty(t.shape + (m, m))
        inner = t < self.params.r2
        if np.any(inner):
            ti, thi = t[inner], theta[inner]
            orig = ti < self.params.r1
            blk = np.empty(ti.shape + (m, m))
            if np.any(orig):
                blk[orig] = self.base.tangential_in(ti[orig], thi[orig], chart, dt=dt)
            if np.any(~orig):
                blk[~orig] = self._blend(ti[~orig], thi[~orig], chart, dt)
            out[inner] = blk
        if np.any(~inner):
            to = t[~inner]
            g = SphereChart(self.n, chart).metric(theta[~inner])
            s = self.outer(to)
            fac = 2 * s * self.outer(to, 1) if dt else s * s
            out[~inner] = fac[..., None, None] * g
        return out

    def as_polar(self) -> PolarMetric:
        """This metric as a :class:`PolarMetric` (warping-backed when the base is symmetric)."""
        meta = {"euclidean_beyond": self.params.r4} if self.splice is not None else {}
        if self.base.warping is not None:
            pm = PolarMetric.from_warping(self.warping(), self.n)
            pm.meta.update(meta)
            return pm
        return PolarMetric(
            self.n,
            lambda t, th: self.tangential(t, th, 0),
            lambda t, th: self.tangential(t, th, 0, dt=True),
            radius=np.inf,
            label="glued",
            meta=meta,
        )

    def warping(self) -> WarpingFunction:
        """Glued warping function; only for rotationally symmetric bases."""
        sig = self.base.warping
        if sig is None:
            raise GluingError("base metric is not rotationally symmetric")
        cached = self.notes.get("_warping")
        if cached is not None:
            return cached
        p, tr = self.params, self.transition

        def blend(t, order):
            s, s1 = sig.eval(t), sig.deriv1(t)
            hh, h1 = _hyp(p.k, t), _hyp(p.k, t, 1)
            ps, ph = tr.phi_sigma(t), tr.phi_h(t)
            big = ps * s * s + ph * hh * hh
            root = np.sqrt(big)
            if order == 0:
                return root
            dps = tr.phi_sigma(t, 1)
            dbig = dps * (s * s - hh * hh) + ps * 2 * s * s1 + ph * 2 * hh * h1
            r1 = dbig / (2 * root)
            if order == 1:
                return r1
            s2, h2 = sig.deriv2(t), _hyp(p.k, t, 2)
            ddps = tr.phi_sigma(t, 2)
            ddbig = (ddps * (s * s - hh * hh) + 2 * dps * (2 * s * s1 - 2 * hh * h1)
                     + ps * (2 * s1 * s1 + 2 * s * s2) + ph * (2 * h1 * h1 + 2 * hh * h2))
            return (ddbig / 2 - r1 * r1) / root

        base_fns = (sig.eval, sig.deriv1, sig.deriv2)

        def make(order):
            def f(t):
                t = np.asarray(t, dtype=float)
                out = np.empty(t.shape)
                a = t < p.r1
                b = (t >= p.r1) & (t < p.r2)
                c = t >= p.r2
                if np.any(a):
                    out[a] = base_fns[order](t[a])
                if np.any(b):
                    out[b] = blend(t[b], order)
                if np.any(c):
                    out[c] = self.outer(t[c], order)
                return out[()] if out.ndim == 0 else out
            return f

        info = {"base": sig.spec, "pieces": self.piece_names()}
        if self.splice is not None:
            info["euclidean_beyond"] = p.r4
        w = WarpingFunction(
            eval=make(0), deriv1=make(1), deriv2=make(2), kind="glued",
            params={"r1": p.r1, "r2": p.r2, "r3": p.r3, "r4": p.r4, "k": p.k},
            domain_radius=np.inf, info=info,
        )
        self.notes["_warping"] = w
        return w


def _require_convex(metric, r_hi, grid, seed, what):
    cert = certify_convexity(metric, (0.0, r_hi), grid=grid, seed=seed)
    if not cert.passed:
        raise GluingError(
            f"{what}: t^2 is not certified strictly convex on (0, {r_hi}] "
            f"(min Hess eigenvalue {cert.min_eigenvalue:.6g} at t={cert.witness['t']:.6g})"
        )
    return cert


def build_hat_metric(metric, r1, r2, safety=1.1, grid=64, seed=0, n=2) -> GluedMetric:
    """Blend ``metric`` into the hyperbolic metric of curvature ``-k`` on ``[R1, R2]``.

    Refuses unless ``t^2`` is certified strictly convex on the original
    metric up to ``R2``.
    """
    metric = _as_polar(metric, n)
    tr = make_transition(r1, r2)
    if not r2 < metric.radius:
        raise GluingError(f"R2={r2} must lie inside the metric domain (radius {metric.radius})")
    _require_convex(metric, r2, grid, seed, "original metric")
    c2 = estimate_c2(metric, r1, r2, grid=grid, safety=safety, seed=seed)
    k = choose_k(c2, r1)
    params = GluingParams(r1=float(r1), r2=float(r2), k=k, c2=c2, safety=safety)
    return GluedMetric(base=metric, params=params, transition=tr)


def default_radii(r1, k=1.0):
    r2 = 1.2 * r1
    r3 = 1.5 * r2
    r4 = 2.0 * float(_hyp(k, r3))
    return r2, r3, r4


def build_euclidean_end(metric, r1, r2=None, r3=None, r4=None, safety=1.1, grid=64, seed=0, n=2,
                        retries=4) -> GluedMetric:
    """Full deformation: hyperbolic shell then a Euclidean end past ``R4``.

    Defaults: ``R2 = 1.2 R1``, ``R3 = 1.5 R2``, ``R4 = 2 k^{-1/2} sinh(sqrt(k) R3)``.
    The returned metric carries a convexity certificate on ``(0, 2 R4]``;
    callers must inspect ``certificate.passed``.
    """
    r2 = 1.2 * r1 if r2 is None else r2
    r3 = 1.5 * r2 if r3 is None else r3
    hat = build_hat_metric(metric, r1, r2, safety=safety, grid=grid, seed=seed, n=n)
    k = hat.params.k
    if r4 is None:
        r4 = 2.0 * float(_hyp(k, r3))
    splice = build_sigma_tilde(k, r2, r3, r4, retries=retries)
    hat.params.r3, hat.params.r4 = float(r3), float(splice.r4)
    hat.splice = splice
    bad = hat.params.violations()
    if bad:
        raise GluingError("; ".join(bad))
    hat.certificate = certify_convexity(hat, (0.0, 2.0 * hat.params.r4), grid=grid, seed=seed)
    return hat


# ---------------------------------------------------------------- certificates


@dataclass
class ConvexityCertificate:
    """Sampled lower bound of ``Hess(t^2)`` relative to the metric."""

    t_range: tuple
    min_eigenvalue: float
    passed: bool
    witness: dict
    samples: int
    t_grid: np.ndarray = field(repr=False, default=None)
    per_t_min: np.ndarray = field(repr=False, default=None)


def _sample_t(metric, lo, hi, grid):
    ts = [_grid(lo, hi, grid, include_lo=lo > 0)]
    if isinstance(metric, GluedMetric):
        p = metric.params
        edges = [0.0, p.r1, p.r2] + ([p.r3, p.r4] if metric.splice is not None else [])
        edges = [e for e in edges if e < hi] + [hi]
        for a, b in zip(edges, edges[1:]):
            a2, b2 = max(a, lo), min(b, hi)
            if b2 > a2:
                ts.append(_grid(a2, b2, grid, include_lo=a2 > 0))
    t = np.unique(np.concatenate(ts))
    return t[t > 0]


def certify_convexity(metric, t_range, grid=64, seed=0, n=2) -> ConvexityCertificate:
    """Sample ``Hess(t^2) = 2 dt^2 + 2 t Hess t`` over ``t_range x directions``.

    At each sample the smallest eigenvalue of ``Hess(t^2)`` relative to the
    metric is exact (a generalized eigenproblem on the tangential block); the
    radial eigenvalue is 2. For :class:`GluedMetric` the uniform t-grid is
    refined with ``grid`` points inside every piece.
    """
    lo, hi = float(t_range[0]), float(t_range[1])
    if isinstance(metric, WarpingFunction):
        metric = PolarMetric.from_warping(metric, n)
    radius = np.inf if isinstance(metric, GluedMetric) else metric.radius
    if hi >= radius:
        hi_eff = radius * (1 - 1e-9)
    else:
        hi_eff = hi
    dim = metric.n
    t = _sample_t(metric, lo, hi_eff, grid)
    ids, theta = sample_directions(dim, grid, seed)
    per_t = np.full(t.size, np.inf)
    best = (np.inf, None, None, None)
    for c in (0, 1):
        sel = ids == c
        if not np.any(sel):
            continue
        th = theta[sel]
        tt = np.repeat(t, th.shape[0])
        thh = np.tile(th, (t.size, 1))
        if isinstance(metric, GluedMetric):
            sig = metric.tangential(tt, thh, c)
            dsig = metric.tangential(tt, thh, c, dt=True)
        else:
            sig = metric.tangential_in(tt, thh, c)
            dsig = metric.tangential_in(tt, thh, c, dt=True)
        lam, vec = _chol_gen_min(tt[:, None, None] * dsig, sig)
        lam = np.minimum(lam, 2.0)
        per_t = np.minimum(per_t, lam.reshape(t.size, -1).min(axis=1))
        i = int(np.argmin(lam))
        if lam[i] < best[0]:
            best = (float(lam[i]), float(tt[i]), thh[i].copy(), vec[i].copy(), c)
    mval = best[0]
    witness = {"t": best[1], "theta": best[2], "direction": best[3], "chart": best[4]}
    if mval >= 2.0:
        witness["direction"] = np.eye(dim)[0]
    return ConvexityCertificate(
        t_range=(lo, hi), min_eigenvalue=mval, passed=bool(mval > 0), witness=witness,
        samples=int(t.size * theta.shape[0]), t_grid=t, per_t_min=per_t,
    )


def _direction_design(n, count, seed):
    rng = np.random.default_rng(seed)
    eye = np.eye(n)
    rnd = rng.standard_normal((count, n))
    rnd /= np.linalg.norm(rnd, axis=1, keepdims=True)
    return np.concatenate([eye, rnd])


def hess_mix_terms(glued: GluedMetric, grid=64, seed=0):
    """The three terms of the blend-region decomposition of ``Hess t(X, X)``.

    On ``[R1, R2]``::

        Hess t = phi_s [1/2 X d_t sigma X] + phi_h [1/2 X d_t h_k X]
                 + 1/2 phi_h' X (h_k - sigma) X

    evaluated over ``grid`` radii, ``grid`` directions and ``2n`` polar-frame
    vectors (the ``n`` coordinate vectors and ``n`` random unit vectors).
    Returns a dict of arrays ``term1, term2, term3, total`` and the glued
    ``hessian_radial`` for cross-checking.
    """
    p, tr, n = glued.params, glued.transition, glued.n
    t = _grid(p.r1, p.r2, grid)
    ids, theta = sample_directions(n, grid, seed)
    X = _direction_design(n, n, seed + 1)[:, 1:]
    out = {key: [] for key in ("term1", "term2", "term3", "total", "hessian")}
    for c in (0, 1):
        sel = ids == c
        if not np.any(sel):
            continue
        th = theta[sel]
        tt = np.repeat(t, th.shape[0])
        thh = np.tile(th, (t.size, 1))
        g = SphereChart(n, c).metric(thh)
        sig = glued.base.tangential_in(tt, thh, c)
        dsig = glued.base.tangential_in(tt, thh, c, dt=True)
        hk = (_hyp(p.k, tt) ** 2)[:, None, None] * g
        dhk = (2 * _hyp(p.k, tt) * _hyp(p.k, tt, 1))[:, None, None] * g
        q = lambda m: np.einsum("di,pil,dl->pd", X, m, X)  # noqa: E731
        t1 = tr.phi_sigma(tt)[:, None] * 0.5 * q(dsig)
        t2 = tr.phi_h(tt)[:, None] * 0.5 * q(dhk)
        t3 = 0.5 * tr.phi_h(tt, 1)[:, None] * q(hk - sig)
        hess = 0.5 * q(glued.tangential(tt, thh, c, dt=True))
        for key, val in (("term1", t1), ("term2", t2), ("term3", t3), ("total", t1 + t2 + t3), ("hessian", hess)):
            out[key].append(val.ravel())
    return {k: np.concatenate(v) for k, v in out.items()}


def dominance_margin(glued: GluedMetric, grid=64, seed=0, vectors=16):
    """Min over ``[R1, R2]`` samples and random tangential ``X`` of ``X h_k X - X sigma X``."""
    p, n = glued.params, glued.n
    t = _grid(p.r1, p.r2, grid)
    ids, theta = sample_directions(n, grid, seed)
    rng = np.random.default_rng(seed + 7)
    X = rng.standard_normal((vectors, n - 1))
    best = np.inf
    for c in (0, 1):
        sel = ids == c
        if not np.any(sel):
            continue
        th = theta[sel]
        tt = np.repeat(t, th.shape[0])
        thh = np.tile(th, (t.size, 1))
        g = SphereChart(n, c).metric(thh)
        diff = (_hyp(p.k, tt) ** 2)[:, None, None] * g - glued.base.tangential_in(tt, thh, c)
        best = min(best, float(np.einsum("di,pil,dl->pd", X, diff, X).min()))
    return best


def seam_report(glued: GluedMetric, seed=0, count=8):
    """Value and t-derivative jumps of the tangential block across each seam.

    Adjacent piece formulas are evaluated at the seam radius itself; returns
    ``{seam_name: (max value jump, max derivative jump)}``.
    """
    p, tr, n, k = glued.params, glued.transition, glued.n, glued.params.k
    ids, theta = sample_directions(n, count, seed)

    def pieces(c, th, name, t, dt):
        tt = np.full(th.shape[0], t)
        g = SphereChart(n, c).metric(th)
        if name == "original":
            return glued.base.tangential_in(tt, th, c, dt=dt)
        if name == "blend":
            return glued._blend(tt, th, c, dt)
        if name == "hyperbolic":
            f = 2 * _hyp(k, tt) * _hyp(k, tt, 1) if dt else _hyp(k, tt) ** 2
            return f[:, None, None] * g
        if name == "splice":
            s = glued.splice.mid(tt)
            f = 2 * s * glued.splice.mid(tt, 1) if dt else s * s
            return f[:, None, None] * g
        if name == "euclidean":
            f = 2 * tt if dt else tt * tt
            return f[:, None, None] * g
        raise KeyError(name)

    seams = [("R1", p.r1, "original", "blend"), ("R2", p.r2, "blend", "hyperbolic")]
    if glued.splice is not None:
        seams += [("R3", p.r3, "hyperbolic", "splice"), ("R4", p.r4, "splice", "euclidean")]
    report = {}
    for label, r, left, right in seams:
        jv = jd = 0.0
        for c in (0, 1):
            sel = ids == c
            if not np.any(sel):
                continue
            th = theta[sel]
            jv = max(jv, float(np.abs(pieces(c, th, left, r, False) - pieces(c, th, right, r, False)).max()))
            jd = max(jd, float(np.abs(pieces(c, th, left, r, True) - pieces(c, th, right, r, True)).max()))
        report[label] = (jv, jd)
    return report


# ---------------------------------------------------------------- persistence

_FORMAT = "harmball-glued/1"


def glued_to_text(glued: GluedMetric) -> str:
    """Parameter file for a glued metric over a preset model (floats with 17 significant digits)."""
    base = glued.base.warping
    if base is None or base.kind in ("custom", "glued"):
        raise GluingError("only glued metrics over catalog presets can be serialized")
    p = glued.params
    rows = [
        ("format", _FORMAT),
        ("base", base.spec),
        ("dimension", str(glued.n)),
        ("pieces", ",".join(glued.piece_names())),
        ("transition", "exp_ratio_step"),
        ("blend", "phi_sigma*sigma + phi_h*k^-1*sinh^2(sqrt(k)*t)*g_S"),
        ("splice", "derivative_blend" if glued.splice is not None else "none"),
    ]
    for key in ("r1", "r2", "r3", "r4", "k", "c2", "safety"):
        val = getattr(p, key)
        if val is not None:
            rows.append((key, f"{float(val):.17g}"))
    if glued.splice is not None:
        rows.append(("splice_width", f"{glued.splice.width:.17g}"))
        rows.append(("splice_beta", f"{glued.splice.beta:.17g}"))
    return "".join(f"{k} = {v}\n" for k, v in rows)


def glued_from_text(text) -> GluedMetric:
    """Inverse of :func:`glued_to_text`; the splice is rebuilt and checked bit-exactly."""
    from .warping import from_preset

    kv = {}
    for no, line in enumerate(text.splitlines(), start=1):
        line = line.split("#", 1)[0].strip()
        if not line:
            continue
        if "=" not in line:
            raise GluingError(f"malformed line {no} in glued parameter file")
        key, val = line.split("=", 1)
        kv[key.strip()] = val.strip()
    if kv.get("format") != _FORMAT:
        raise GluingError(f"unsupported glued parameter format {kv.get('format')!r}")
    try:
        n = int(kv["dimension"])
        num = {k: float(kv[k]) for k in ("r1", "r2", "r3", "r4", "k", "c2", "safety") if k in kv}
        base = PolarMetric.from_warping(from_preset(kv["base"]), n)
        params = GluingParams(r1=num["r1"], r2=num["r2"], k=num["k"], c2=num["c2"],
                              r3=num.get("r3"), r4=num.get("r4"), safety=num.get("safety", 1.1))
    except (KeyError, ValueError) as exc:
        raise GluingError(f"incomplete glued parameter file: {exc}") from None
    bad = params.violations()
    if bad:
        raise GluingError("; ".join(bad))
    splice = None
    if params.r4 is not None:
        splice = SigmaTilde(params.k, params.r2, params.r3, params.r4)
        for key, val in (("splice_width", splice.width), ("splice_beta", splice.beta)):
            if key in kv and float(kv[key]) != val:
                raise GluingError(f"{key} does not reproduce: stored {kv[key]}, rebuilt {val!r}")
    return GluedMetric(base=base, params=params, transition=make_transition(params.r1, params.r2), splice=splice)
