"""Harmonic maps into balls whose squared distance is strictly convex.

Model and polar target metrics, the deformation that makes them Euclidean
outside a ball, P1 energy minimization on triangulated and interval domains,
and the checks around it (maximum principle, ball classification,
Korevaar-Schoen densities).
"""

__version__ = "0.1.0"

from .chart import EuclideanChart, NormalChart, PolarChart, WarpedChart, to_normal_chart
from .classify import BallReport, classify_ball, hkw_quadratic_form
from .energy import (
    dirichlet_energy,
    energy_gradient,
    fuchs_check,
    harmonic_residual,
    max_principle_check,
    radial_projection,
)
from .gluing import (
    GluedMetric,
    GluingError,
    build_euclidean_end,
    build_hat_metric,
    build_sigma_tilde,
    certify_convexity,
    choose_k,
    estimate_c2,
    make_transition,
)
from .ks import ks_density, ks_energy
from .mesh import (
    BoundaryTrace,
    IntervalDomain,
    TriangulatedDomain,
    load_mesh,
    make_disk_mesh,
    make_interval_mesh,
    p1_gradient,
)
from .polar import PolarMetric, eval_metric, hessian_radial
from .solver import SolveReport, SolverConfig, minimize
from .symmetric import equator_experiment, symmetric_energy
from .warping import (
    GeometryError,
    WarpingFunction,
    from_preset,
    hessian_r_squared,
    sectional_curvatures,
    verify_admissible,
)

__all__ = [name for name in dir() if not name.startswith("_")]
