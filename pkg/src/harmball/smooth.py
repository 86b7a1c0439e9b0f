"""Smooth step functions and cumulative quadrature for spliced profiles."""

import numpy as np

__all__ = ["smooth_step", "CumulativeIntegral"]


def _flat(x):
    # e^{-1/x} for x > 0, else 0, together with its first two derivatives.
    x = np.asarray(x, dtype=float)
    pos = x > 0
    xs = np.where(pos, x, 1.0)
    f = np.where(pos, np.exp(-1.0 / xs), 0.0)
    f1 = f / xs**2
    f2 = f * (1.0 / xs**4 - 2.0 / xs**3)
    return f, f1, f2


def smooth_step(x, order=0):
    """C-infinity step ``S`` with ``S = 0`` for x <= 0 and ``S = 1`` for x >= 1.

    ``S(x) = f(x) / (f(x) + f(1 - x))`` with ``f(x) = exp(-1/x)``. All
    derivatives vanish at both ends and ``S(1/2) = 1/2`` by symmetry.

    Parameters
    ----------
    x : array_like
    order : {0, 1, 2}
        Derivative order to return.
    """
    x = np.asarray(x, dtype=float)
    a, a1, a2 = _flat(x)
    b, b1, b2 = _flat(1.0 - x)
    # d/dx of b(x) = f(1-x) flips the sign of odd derivatives
    b1 = -b1
    d = a + b
    if order == 0:
        return a / d
    num = a1 * b - a * b1
    if order == 1:
        return num / d**2
    if order == 2:
        dnum = a2 * b - a * b2
        dd = a1 + b1
        return dnum / d**2 - 2.0 * num * dd / d**3
    raise ValueError(f"order must be 0, 1 or 2, got {order}")


class CumulativeIntegral:
    """Tabulated antiderivative ``F(t) = int_a^t f(s) ds`` on ``[a, b]``.

    Composite Gauss-Legendre: the interval is split into ``panels`` panels
    with ``nodes`` points each; prefix sums at panel boundaries are stored and
    a partial panel is integrated on demand with the same rule mapped to
    ``[left, t]``. ``f`` must accept and return arrays.

    For t > b the value ``F(b)`` is returned (callers handle the tail).
    """

    def __init__(self, f, a, b, panels=64, nodes=20):
        if not b > a:
            raise ValueError("need b > a")
        self.f = f
        self.a = float(a)
        self.b = float(b)
        self.edges = np.linspace(self.a, self.b, panels + 1)
        self._x, self._w = np.polynomial.legendre.leggauss(nodes)
        left, right = self.edges[:-1], self.edges[1:]
        per_panel = self._panel(left, right)
        self.prefix = np.concatenate([[0.0], np.cumsum(per_panel)])

    def _panel(self, left, right):
        half = 0.5 * (right - left)
        mid = 0.5 * (right + left)
        s = mid[..., None] + half[..., None] * self._x
        return half * (self.f(s) * self._w).sum(axis=-1)

    def __call__(self, t):
        t_in = np.asarray(t, dtype=float)
        t = np.clip(t_in.ravel(), self.a, self.b)
        idx = np.clip(np.searchsorted(self.edges, t, side="right") - 1, 0, len(self.edges) - 2)
        left = self.edges[idx]
        out = self.prefix[idx] + self._panel(left, t)
        return out.reshape(t_in.shape)

    @property
    def total(self):
        return float(self.prefix[-1])
