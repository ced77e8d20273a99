"""Numerical verification toolkit for weighted Reilly/Minkowski identities,
weighted Neumann problems and equidistant flows in constant-curvature spaces."""

__version__ = "0.1.0"

from .spaceform import SpaceForm, PolarPoint, polar_point, warp, potential, geodesic_flow_point
from .domains import Domain, Ball, StarGraph, ball_domain, star_domain, boundary_geometry
from .quadrature import WeightedIntegrals, ball_closed_forms, weighted_integrals, integrate_domain

__all__ = [
    "SpaceForm", "PolarPoint", "polar_point", "warp", "potential", "geodesic_flow_point",
    "Domain", "Ball", "StarGraph", "ball_domain", "star_domain", "boundary_geometry",
    "WeightedIntegrals", "ball_closed_forms", "weighted_integrals", "integrate_domain",
    "__version__",
]
