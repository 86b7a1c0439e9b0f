"""Warping functions of rotationally symmetric model metrics.

A model metric on R^n is ``dt^2 + sigma(t)^2 g_{S^{n-1}}`` where ``t`` is the
distance from the pole. This module holds the warping function ``sigma``
together with its first two derivatives, a catalog of named presets, and the
closed-form curvature and Hessian quantities that only depend on ``sigma``.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Callable

import numpy as np
from scipy import optimize, special

from .smooth import CumulativeIntegral, smooth_step

__all__ = [
    "WarpingFunction",
    "GeometryError",
    "linear",
    "sine",
    "hyperbolic",
    "spliced",
    "flat_cap",
    "custom",
    "from_preset",
    "sectional_curvatures",
    "hessian_r_squared",
    "verify_admissible",
    "AdmissibilityReport",
    "first_critical_radius",
]


class GeometryError(ValueError):
    """Raised for evaluations outside a metric's domain or at singular points."""


@dataclass(frozen=True, eq=False)
class WarpingFunction:
    """Scalar warping function with analytic (or finite-difference) derivatives.

    Attributes
    ----------
    eval, deriv1, deriv2 : callable
        Vectorized maps ``t -> sigma(t)``, ``sigma'(t)``, ``sigma''(t)``.
    kind : str
        One of ``linear``, ``sine``, ``hyperbolic``, ``spliced``, ``flatcap``,
        ``glued`` or ``custom``.
    params : dict
        Construction parameters; together with ``kind`` they rebuild the
        function (see :func:`from_preset`).
    domain_radius : float
        Supremum of the radii where the metric is defined (``inf`` for
        complete models, ``pi`` for the round sphere).
    """

    eval: Callable
    deriv1: Callable
    deriv2: Callable
    kind: str
    params: dict = field(default_factory=dict)
    domain_radius: float = np.inf
    info: dict = field(default_factory=dict)

    @property
    def spec(self) -> str:
        """Catalog string accepted by :func:`from_preset`."""
        if not self.params:
            return self.kind
        body = ",".join(f"{k}={v!r}" for k, v in self.params.items())
        return f"{self.kind}:{body}"

    def __repr__(self):
        return f"WarpingFunction({self.spec})"


def linear():
    """Euclidean warping ``sigma(t) = t``."""
    return WarpingFunction(
        eval=lambda t: np.asarray(t, dtype=float) * 1.0,
        deriv1=lambda t: np.ones_like(np.asarray(t, dtype=float)),
        deriv2=lambda t: np.zeros_like(np.asarray(t, dtype=float)),
        kind="linear",
    )


def sine():
    """Round unit sphere, ``sigma(t) = sin t`` on ``[0, pi)``."""
    return WarpingFunction(
        eval=np.sin,
        deriv1=np.cos,
        deriv2=lambda t: -np.sin(t),
        kind="sine",
        domain_radius=np.pi,
    )


def hyperbolic(k=1.0):
    """Space form of curvature ``-k``: ``sigma(t) = sinh(sqrt(k) t) / sqrt(k)``."""
    k = float(k)
    if k <= 0:
        raise GeometryError(f"hyperbolic warping needs k > 0, got {k}")
    s = np.sqrt(k)
    return WarpingFunction(
        eval=lambda t: np.sinh(s * np.asarray(t, dtype=float)) / s,
        deriv1=lambda t: np.cosh(s * np.asarray(t, dtype=float)),
        deriv2=lambda t: s * np.sinh(s * np.asarray(t, dtype=float)),
        kind="hyperbolic",
        params={"k": k},
    )


def spliced(r0=np.pi / 4, r1=None):
    """Concave increasing warping equal to ``sin`` on ``[0, r0]`` and affine past ``r1``.

    The second derivative ``-sin(t)`` is tapered to zero on ``[r0, r1]`` by a
    smooth step, so the profile stays concave and smooth. The resulting slope
    ``a`` and intercept ``b`` of the affine tail are stored in ``info``.
    """
    r0 = float(r0)
    r1 = 2.0 * r0 if r1 is None else float(r1)
    if not 0 < r0 < r1:
        raise GeometryError(f"spliced warping needs 0 < r0 < r1, got r0={r0}, r1={r1}")
    width = r1 - r0

    def d2_blend(s):
        return -np.sin(s) * (1.0 - smooth_step((s - r0) / width))

    f0 = CumulativeIntegral(d2_blend, r0, r1)
    f1 = CumulativeIntegral(lambda s: s * d2_blend(s), r0, r1)
    c0, s0 = np.cos(r0), np.sin(r0)

    def mid_d1(t):
        return c0 + f0(t)

    def mid_val(t):
        return s0 + (t - r0) * c0 + t * f0(t) - f1(t)

    a = float(mid_d1(np.array(r1)))
    b = float(mid_val(np.array(r1)) - a * r1)
    if a <= 0:
        raise GeometryError(f"spliced warping lost monotonicity (a={a}); choose r1 closer to r0")

    def ev(t):
        t = np.asarray(t, dtype=float)
        return np.where(t <= r0, np.sin(t), np.where(t >= r1, a * t + b, mid_val(t)))

    def d1(t):
        t = np.asarray(t, dtype=float)
        return np.where(t <= r0, np.cos(t), np.where(t >= r1, a, mid_d1(t)))

    def d2(t):
        t = np.asarray(t, dtype=float)
        return np.where(t <= r0, -np.sin(t), np.where(t >= r1, 0.0, d2_blend(t)))

    return WarpingFunction(
        eval=ev,
        deriv1=d1,
        deriv2=d2,
        kind="spliced",
        params={"r0": r0, "r1": r1},
        info={"a": a, "b": b, "formula": "sigma'' = -sin(t) * (1 - S((t - r0)/(r1 - r0)))"},
    )


def _flat_cap_parts(a, lam):
    sl = np.sqrt(lam)
    c = np.sqrt(np.pi) / 2.0

    def ev(t):
        t = np.asarray(t, dtype=float)
        e = special.erf(sl * t)
        i0 = c * e / sl
        i2 = c * e / (2.0 * lam * sl) - t * np.exp(-lam * t * t) / (2.0 * lam)
        return i0 - i2 / a**2

    def d1(t):
        t = np.asarray(t, dtype=float)
        return (1.0 - t * t / a**2) * np.exp(-lam * t * t)

    def d2(t):
        t = np.asarray(t, dtype=float)
        g = np.exp(-lam * t * t)
        return -2.0 * t / a**2 * g - 2.0 * lam * t * (1.0 - t * t / a**2) * g

    return ev, d1, d2


def flat_cap(a=1.0, q=0.05, lam=None):
    """Warping with a first critical radius ``a`` and prescribed ``-sigma(a) sigma''(a) = q``.

    ``sigma'(t) = (1 - t^2/a^2) exp(-lam t^2)``; ``lam`` is solved from ``q``
    unless given. Small ``q`` gives a flat maximum, which is the regime where
    the equator map of the symmetric reduction is energy minimizing.
    """
    a = float(a)
    if lam is None:
        q = float(q)
        if not 0 < q < 4.0 / 3.0:
            raise GeometryError(f"flat_cap needs 0 < q < 4/3, got {q}")

        def gap(lam_):
            ev, _, d2 = _flat_cap_parts(a, lam_)
            return float(-ev(a) * d2(a)) - q

        lam = optimize.brentq(gap, 1e-8 / a**2, 200.0 / a**2, xtol=1e-15, rtol=1e-15)
    lam = float(lam)
    ev, d1, d2 = _flat_cap_parts(a, lam)
    # sigma(inf) = sqrt(pi)/(2 sqrt(lam)) * (1 - 1/(2 lam a^2)) > 0 iff lam a^2 > 1/2
    if lam * a * a > 0.5:
        dom = np.inf
    else:
        dom = optimize.brentq(lambda t: float(ev(t)), a, 1e3 * a)
    return WarpingFunction(
        eval=ev,
        deriv1=d1,
        deriv2=d2,
        kind="flatcap",
        params={"a": a, "lam": lam},
        domain_radius=dom,
        info={"q": float(-ev(a) * d2(a))},
    )


def _fd_step(t):
    return 1e-5 * np.maximum(1.0, np.abs(t))


def custom(f, domain_radius=np.inf, name="custom"):
    """Wrap a user warping function; derivatives by 5-point central differences.

    The step is ``1e-5 * max(1, |t|)``. ``f`` must accept arrays and small
    negative arguments (odd extension) for derivatives at the pole.
    """

    def d1(t):
        t = np.asarray(t, dtype=float)
        h = _fd_step(t)
        return (-f(t + 2 * h) + 8 * f(t + h) - 8 * f(t - h) + f(t - 2 * h)) / (12 * h)

    def d2(t):
        t = np.asarray(t, dtype=float)
        h = _fd_step(t)
        return (-f(t + 2 * h) + 16 * f(t + h) - 30 * f(t) + 16 * f(t - h) - f(t - 2 * h)) / (12 * h * h)

    return WarpingFunction(
        eval=lambda t: np.asarray(f(np.asarray(t, dtype=float)), dtype=float),
        deriv1=d1,
        deriv2=d2,
        kind="custom",
        domain_radius=domain_radius,
        info={"name": name},
    )


_PRESETS = {
    "linear": linear,
    "euclidean": linear,
    "sine": sine,
    "sphere": sine,
    "hyperbolic": hyperbolic,
    "spliced": spliced,
    "flatcap": flat_cap,
}


def _parse_params(body):
    params = {}
    if not body:
        return params
    for item in body.split(","):
        item = item.strip()
        if not item:
            continue
        if "=" not in item:
            raise GeometryError(f"bad preset parameter {item!r}; expected key=value")
        key, val = item.split("=", 1)
        try:
            params[key.strip()] = float(val)
        except ValueError:
            raise GeometryError(f"preset parameter {key.strip()!r} is not a number: {val!r}") from None
    return params


def from_preset(spec: str) -> WarpingFunction:
    """Build a warping function from a catalog string such as ``hyperbolic:k=4``.

    Known names: ``linear`` (alias ``euclidean``), ``sine`` (alias ``sphere``),
    ``hyperbolic:k=``, ``spliced:r0=,r1=``, ``flatcap:a=,q=`` or
    ``flatcap:a=,lam=``.
    """
    name, _, body = spec.strip().partition(":")
    name = name.strip().lower()
    if name not in _PRESETS:
        raise GeometryError(f"unknown warping preset {name!r}; known: {sorted(_PRESETS)}")
    params = _parse_params(body)
    try:
        return _PRESETS[name](**params)
    except TypeError as exc:
        raise GeometryError(f"bad parameters for preset {name!r}: {exc}") from None


def _check_radius(sigma, t):
    t = np.asarray(t, dtype=float)
    if np.any(t <= 0) or np.any(t >= sigma.domain_radius):
        raise GeometryError(f"radius outside (0, {sigma.domain_radius}): {t}")
    return t


def sectional_curvatures(sigma: WarpingFunction, t):
    """Radial and tangential sectional curvatures of the model at radius ``t``.

    Returns ``(-sigma''/sigma, (1 - sigma'^2)/sigma^2)``.
    """
    t = _check_radius(sigma, t)
    s = sigma.eval(t)
    if np.any(s == 0):
        raise GeometryError("warping function vanishes; curvature is singular")
    d1 = sigma.deriv1(t)
    return -sigma.deriv2(t) / s, (1.0 - d1 * d1) / (s * s)


def hessian_r_squared(sigma: WarpingFunction, t):
    """Coefficients of ``dr (x) dr`` and ``g_S`` in ``Hess(r^2)``: ``(2, 2 t sigma' sigma)``."""
    t = _check_radius(sigma, t)
    tang = 2.0 * t * sigma.deriv1(t) * sigma.eval(t)
    return np.full_like(tang, 2.0), tang


@dataclass
class AdmissibilityReport:
    passed: bool
    checks: dict
    witnesses: dict

    def __bool__(self):
        return self.passed


def verify_admissible(sigma: WarpingFunction, t_max=None, samples=2001, tol=1e-6):
    """Check the pole conditions of a model warping function.

    Checks ``sigma(0) = 0``, ``sigma'(0) = 1``, ``sigma''(0) = 0`` (linear
    extrapolation of ``sigma''`` from two small radii) and ``sigma > 0`` on a
    sample grid of ``(0, t_max)``. Failures are reported, never raised.
    """
    if t_max is None:
        t_max = min(sigma.domain_radius, 10.0)
    t_max = float(t_max)
    if np.isfinite(sigma.domain_radius):
        t_max = min(t_max, sigma.domain_radius * (1 - 1e-6))
    checks, witnesses = {}, {}

    s0 = float(sigma.eval(np.array(0.0)))
    checks["sigma(0)=0"] = abs(s0) <= 1e-12
    witnesses["sigma(0)"] = s0

    delta = 1e-4
    slope = float(sigma.eval(np.array(delta))) / delta
    d1_0 = float(sigma.deriv1(np.array(0.0)))
    checks["sigma'(0)=1"] = abs(d1_0 - 1.0) <= tol and abs(slope - 1.0) <= 1e-3
    witnesses["sigma'(0)"] = d1_0
    witnesses["sigma(delta)/delta"] = slope

    e = 1e-3
    d2_e, d2_h = float(sigma.deriv2(np.array(e))), float(sigma.deriv2(np.array(e / 2)))
    d2_0 = 2.0 * d2_h - d2_e
    checks["sigma''(0)=0"] = abs(d2_0) <= 1e2 * tol
    witnesses["sigma''(0)"] = d2_0

    grid = np.linspace(0.0, t_max, samples)[1:]
    vals = sigma.eval(grid)
    bad = np.flatnonzero(vals <= 0)
    checks["sigma>0"] = bad.size == 0
    if bad.size:
        witnesses["first_nonpositive_t"] = float(grid[bad[0]])
    return AdmissibilityReport(all(checks.values()), checks, witnesses)


def first_critical_radius(sigma: WarpingFunction, t_max=None, samples=4001):
    """Smallest ``a0 > 0`` with ``sigma'(a0) = 0``, or ``None`` if none below ``t_max``."""
    if t_max is None:
        t_max = min(sigma.domain_radius, 20.0)
    grid = np.linspace(0.0, t_max, samples)[1:]
    d1 = sigma.deriv1(grid)
    hits = np.flatnonzero(d1 <= 0)
    if hits.size == 0:
        return None
    i = hits[0]
    if d1[i] == 0 or i == 0:
        return float(grid[i])
    return optimize.brentq(lambda t: float(sigma.deriv1(np.array(t))), grid[i - 1], grid[i], xtol=1e-15, rtol=1e-15)
