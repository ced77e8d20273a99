"""Direct evaluation of the weighted Minkowski inequality and its hypotheses.

deficit = (int_M V)^2 - n (int_Omega V)(int_M H V)  >= 0 under the
weighted-convexity condition, with equality exactly on geodesic balls
(any center).  Equality detection requires both a small normalized
deficit and a small variation of H across the boundary, since the
equality domains have constant mean curvature.
"""

from dataclasses import dataclass

import numpy as np

from .domains import (
    boundary_geometry,
    convexity_margin,
    horoconvexity_margin,
    principal_curvatures,
)
from .quadrature import estimate_quadrature_error, weighted_integrals, WeightedIntegrals

H_VARIATION_TOL = 1e-6


@dataclass(frozen=True)
class MinkowskiReport:
    integrals: WeightedIntegrals
    deficit: float
    normalized_deficit: float
    convexity_margin: float
    horoconvexity_margin: float | None
    hypothesis_satisfied: bool
    equality_flag: bool
    tol: float
    h_variation: float


def minkowski_report(domain, bg=None):
    space = domain.space
    n = space.dim
    if bg is None:
        bg = boundary_geometry(domain)
    wi = weighted_integrals(domain, bg)
    deficit = wi.weighted_area**2 - n * wi.weighted_volume * wi.weighted_mean_curv
    normalized = deficit / wi.weighted_area**2
    margin = convexity_margin(bg)
    horo = horoconvexity_margin(bg) if space.K == -1 else None
    tol = max(1e-8, 10.0 * estimate_quadrature_error(domain))
    h_var = float((np.max(bg.H) - np.min(bg.H)) / abs(np.mean(bg.H)))
    equality = bool(abs(normalized) < tol and h_var < H_VARIATION_TOL)
    return MinkowskiReport(
        integrals=wi,
        deficit=float(deficit),
        normalized_deficit=float(normalized),
        convexity_margin=margin,
        horoconvexity_margin=horo,
        hypothesis_satisfied=bool(margin >= -1e-9),
        equality_flag=equality,
        tol=float(tol),
        h_variation=h_var,
    )


@dataclass(frozen=True)
class HypothesisAudit:
    """Per-sample hypothesis data and the convexity implication verdicts."""

    min_eig_h: np.ndarray
    vnu_over_v: np.ndarray
    vnu_minus_v: np.ndarray | None   # hyperbolic: must be negative
    vnu: np.ndarray | None           # spherical: must be <= 0 for convex, p in Omega
    condition_margin: float
    horoconvex: bool | None
    convex: bool
    vnu_strictly_below_v: bool | None
    vnu_nonpositive: bool | None
    implication_holds: bool | None
    violating_samples: np.ndarray
    horoconvexity_violations: np.ndarray | None


def hypothesis_audit(domain, bg=None):
    """Check the sufficiency chain: horoconvexity (K=-1) or convexity with the
    base point inside (K=+1) implies the weighted-convexity condition; for
    K=0 the condition is plain convexity."""
    space = domain.space
    if bg is None:
        bg = boundary_geometry(domain)
    kappas = principal_curvatures(bg)
    min_eig = np.min(kappas, axis=-1)
    ratio = bg.V_nu / bg.V
    margin = convexity_margin(bg)
    pointwise = np.min(kappas - ratio[:, None], axis=-1)
    violating = np.nonzero(pointwise < 0)[0]

    if space.K == -1:
        horoconvex = bool(np.min(min_eig) >= 1.0 - 1e-12)
        horo_viol = np.nonzero(min_eig < 1.0 - 1e-12)[0]
        below = bool(np.max(bg.V_nu - bg.V) < 0)
        implication = (not horoconvex) or (margin >= -1e-9 and below)
        return HypothesisAudit(
            min_eig_h=min_eig, vnu_over_v=ratio, vnu_minus_v=bg.V_nu - bg.V, vnu=None,
            condition_margin=margin, horoconvex=horoconvex, convex=bool(np.min(min_eig) > 0),
            vnu_strictly_below_v=below, vnu_nonpositive=None,
            implication_holds=bool(implication), violating_samples=violating,
            horoconvexity_violations=horo_viol,
        )
    if space.K == 1:
        convex = bool(np.min(min_eig) > 0)
        nonpos = bool(np.max(bg.V_nu) <= 1e-9)
        implication = (not convex) or (nonpos and margin >= np.min(min_eig) - 1e-9)
        return HypothesisAudit(
            min_eig_h=min_eig, vnu_over_v=ratio, vnu_minus_v=None, vnu=bg.V_nu,
            condition_margin=margin, horoconvex=None, convex=convex,
            vnu_strictly_below_v=None, vnu_nonpositive=nonpos,
            implication_holds=bool(implication), violating_samples=violating,
            horoconvexity_violations=None,
        )
    # Euclidean: V = 1, V_nu = 0, condition (min eig h >= 0) is usual convexity
    return HypothesisAudit(
        min_eig_h=min_eig, vnu_over_v=ratio, vnu_minus_v=None, vnu=None,
        condition_margin=margin, horoconvex=None, convex=bool(np.min(min_eig) > 0),
        vnu_strictly_below_v=None, vnu_nonpositive=None,
        implication_holds=None, violating_samples=violating,
        horoconvexity_violations=None,
    )
