"""Korevaar-Schoen epsilon-energy density for maps from planar disks.

``e_eps(u)(x) = m * avg_{|y-x|=eps} d(u(x), u(y))^2 / eps^2`` with ``m = 2``,
the circle average taken by the ``Q``-point trapezoid rule. Only flat
domain metrics are supported.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .chart import EuclideanChart, NormalChart, WarpedChart
from .geodesic import ModelDistance, geodesic_distance
from .warping import GeometryError

__all__ = [
    "EpsilonEnergyEstimate",
    "distance_oracle",
    "ks_density",
    "ks_energy",
    "hs_density",
    "region_quadrature",
]

DIM = 2


@dataclass
class EpsilonEnergyEstimate:
    eps: float
    points: np.ndarray
    density: np.ndarray
    weights: np.ndarray
    value: float
    circle_nodes: int

    @property
    def nodes(self):
        return self.points.shape[0]


def distance_oracle(chart: NormalChart):
    """Target distance ``d(a, b)`` for points in normal coordinates."""
    if isinstance(chart, EuclideanChart):
        return lambda a, b: float(np.linalg.norm(np.asarray(b, float) - np.asarray(a, float)))
    if isinstance(chart, WarpedChart):
        return ModelDistance(chart)
    return lambda a, b: geodesic_distance(chart, a, b)


def _circle(q):
    phi = 2 * np.pi * np.arange(q) / q
    return np.stack([np.cos(phi), np.sin(phi)], axis=1)


def _density(u, dist, x, eps, circ, flat):
    ux = np.asarray(u(x), dtype=float)
    uy = np.asarray(u(x + eps * circ), dtype=float)
    if flat:
        d2 = np.sum((uy - ux) ** 2, axis=1)
    else:
        d2 = np.array([dist(ux, p) ** 2 for p in uy])
    return DIM * float(d2.mean()) / eps**2


def ks_density(u, chart: NormalChart, x, eps, quadrature=64, domain_radius=1.0, dist=None):
    """Epsilon-energy density at ``x`` for a map ``u`` on the disk of ``domain_radius``.

    ``u`` maps an ``(..., 2)`` array of domain points to ``(..., n)`` target
    points in normal coordinates.
    """
    x = np.asarray(x, dtype=float)
    if eps <= 0:
        raise GeometryError("eps must be positive")
    if not domain_radius - np.linalg.norm(x) > eps:
        raise GeometryError(f"circle of radius {eps} about {x} leaves the domain")
    flat = isinstance(chart, EuclideanChart)
    dist = dist or distance_oracle(chart)
    return _density(u, dist, x, eps, _circle(quadrature), flat)


def region_quadrature(radius, radial=16, angular=32):
    """Polar Gauss-Legendre (radius) x trapezoid (angle) nodes on the disk of ``radius``."""
    s, w = np.polynomial.legendre.leggauss(radial)
    r = 0.5 * radius * (s + 1)
    wr = 0.5 * radius * w * r
    phi = 2 * np.pi * np.arange(angular) / angular
    pts = (r[:, None, None] * np.stack([np.cos(phi), np.sin(phi)], axis=1)[None]).reshape(-1, 2)
    wts = np.repeat(wr, angular) * (2 * np.pi / angular)
    return pts, wts


def ks_energy(u, chart: NormalChart, eps, margin=0.2, quadrature=64, domain_radius=1.0,
              radial=16, angular=32) -> EpsilonEnergyEstimate:
    """Integral of :func:`ks_density` over the disk of radius ``domain_radius - margin``."""
    if margin < eps:
        raise GeometryError("margin must be at least eps")
    pts, wts = region_quadrature(domain_radius - margin, radial, angular)
    flat = isinstance(chart, EuclideanChart)
    dist = distance_oracle(chart)
    circ = _circle(quadrature)
    dens = np.array([_density(u, dist, p, eps, circ, flat) for p in pts])
    return EpsilonEnergyEstimate(float(eps), pts, dens, wts, float(np.dot(wts, dens)), quadrature)


def hs_density(u, chart: NormalChart, x, jacobian=None, step=1e-6):
    """``|du|_HS^2 = tr(Du^T h(u) Du)`` at ``x`` (central differences unless ``jacobian`` is given)."""
    x = np.asarray(x, dtype=float)
    if jacobian is not None:
        du = np.asarray(jacobian(x), dtype=float)
    else:
        du = np.stack([(np.asarray(u(x + step * e)) - np.asarray(u(x - step * e))) / (2 * step)
                       for e in np.eye(DIM)], axis=-1)
    h = chart.metric_at(np.asarray(u(x), dtype=float)[None])[0]
    return float(np.einsum("ia,ij,ja->", du, h, du))
