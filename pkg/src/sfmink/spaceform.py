"""Constant-curvature model spaces in geodesic polar coordinates.

All tensor components are expressed in the orthonormal polar frame
{e_r, sn(r)^-1 * (unit-sphere frame)} about a fixed base point, so traces
and norms are plain Euclidean operations on the component arrays.
Geodesics use the exact embedding models (hyperboloid / round sphere /
affine space), never ODE integration.
"""

import math
from dataclasses import dataclass

import numpy as np

from .errors import GeometryDomainError, HemisphereExitError

EQUATOR = math.pi / 2
HEMISPHERE_MARGIN = 1e-9


@dataclass(frozen=True)
class SpaceForm:
    """Simply connected space form: curvature K in {-1, 0, +1}, dimension n >= 2.

    K = -1 is hyperbolic space, K = 0 Euclidean space, K = +1 the open
    hemisphere (all points handled satisfy r < pi/2).
    """

    curvature: int
    dim: int

    def __post_init__(self):
        if self.curvature not in (-1, 0, 1):
            raise GeometryDomainError(f"curvature must be -1, 0 or +1, got {self.curvature}")
        if self.dim < 2:
            raise GeometryDomainError(f"dimension must be >= 2, got {self.dim}")

    @property
    def K(self):
        return self.curvature

    @property
    def n(self):
        return self.dim


@dataclass(frozen=True)
class PolarPoint:
    """Point in geodesic polar coordinates about the base point.

    ``theta`` holds the direction chart: (angle,) for n=2 and
    (colatitude, longitude) for n=3.
    """

    r: float
    theta: tuple

    def __post_init__(self):
        if self.r < 0:
            raise GeometryDomainError(f"r must be nonnegative, got {self.r}")


def polar_point(r, *angles):
    return PolarPoint(float(r), tuple(float(a) for a in angles))


def check_radius(space, r):
    """Validate r (array ok) against the chart: r >= 0, and r < pi/2 on the hemisphere."""
    r = np.asarray(r, dtype=float)
    if np.any(r < 0):
        raise GeometryDomainError("negative geodesic radius")
    if space.K == 1 and np.any(r >= EQUATOR - HEMISPHERE_MARGIN):
        raise HemisphereExitError(
            f"radius {float(np.max(r)):.6g} reaches the equator guard r < pi/2 - {HEMISPHERE_MARGIN:g}"
        )
    return r


def warp(space, r):
    """Warped-product coefficients (sn_K(r), cs_K(r)).

    sn = sinh r / r / sin r and cs = cosh r / 1 / cos r for K = -1/0/+1;
    they satisfy sn' = cs and cs' = -K sn.
    """
    r = check_radius(space, r)
    if space.K == -1:
        return np.sinh(r), np.cosh(r)
    if space.K == 0:
        return r, np.ones_like(r)
    return np.sin(r), np.cos(r)


def sn_ratio(space, r):
    """sn_K(r) / r, series-continued through r = 0."""
    r = np.asarray(r, dtype=float)
    small = np.abs(r) < 1e-4
    r_safe = np.where(small, 1.0, r)
    if space.K == 0:
        return np.ones_like(r)
    direct = (np.sinh(r_safe) if space.K == -1 else np.sin(r_safe)) / r_safe
    K = space.K
    series = 1.0 - K * r**2 / 6.0 + K * K * r**4 / 120.0
    return np.where(small, series, direct)


def cs_over_sn(space, r):
    """cs_K(r) / sn_K(r); diverges like 1/r at the origin (callers guard r > 0)."""
    sn, cs = warp(space, r)
    return cs / sn


def potential(space, x):
    """Model potential V = cs_K(r) with gradient and covariant Hessian at ``x``.

    The Hessian is the exact law hess V = -K V Id in the orthonormal frame;
    for K=0 the potential is identically 1 with vanishing derivatives.
    """
    n = space.dim
    _, cs = warp(space, x.r)
    V = float(cs)
    grad = np.zeros(n)
    if space.K != 0:
        sn, _ = warp(space, x.r)
        grad[0] = -space.K * float(sn)
    hess = -space.K * V * np.eye(n)
    return V, grad, hess


def laplace_beltrami(space, f, x):
    """Trace of the covariant Hessian of a field with derivative evaluators."""
    return float(np.trace(f.hessian_at(x)))


# ---------------------------------------------------------------------------
# Embedding models and exact geodesics.
#
# Batch kernels take r (...,), ang (..., n-1) and frame-component direction
# arrays (..., n); the scalar API wraps them around PolarPoint.
# ---------------------------------------------------------------------------


def _unit_from_angles(n, ang):
    ang = np.asarray(ang, dtype=float)
    if n == 2:
        th = ang[..., 0]
        return np.stack([np.cos(th), np.sin(th)], axis=-1)
    if n == 3:
        phi, psi = ang[..., 0], ang[..., 1]
        sp = np.sin(phi)
        return np.stack([np.cos(phi), sp * np.cos(psi), sp * np.sin(psi)], axis=-1)
    raise GeometryDomainError(f"angle charts implemented for n=2,3 only, got n={n}")


def _angles_from_unit(n, u):
    if n == 2:
        th = np.mod(np.arctan2(u[..., 1], u[..., 0]), 2 * math.pi)
        return np.stack([th], axis=-1)
    phi = np.arccos(np.clip(u[..., 0], -1.0, 1.0))
    psi = np.mod(np.arctan2(u[..., 2], u[..., 1]), 2 * math.pi)
    psi = np.where(np.sin(phi) < 1e-14, 0.0, psi)
    return np.stack([phi, psi], axis=-1)


def _sphere_frame(n, ang):
    """Orthonormal frame of the unit (n-1)-sphere at direction(s) ang."""
    ang = np.asarray(ang, dtype=float)
    if n == 2:
        th = ang[..., 0]
        e = np.stack([-np.sin(th), np.cos(th)], axis=-1)
        return [e]
    phi, psi = ang[..., 0], ang[..., 1]
    e_phi = np.stack([-np.sin(phi), np.cos(phi) * np.cos(psi), np.cos(phi) * np.sin(psi)], axis=-1)
    zeros = np.zeros_like(psi)
    e_psi = np.stack([zeros, -np.sin(psi), np.cos(psi)], axis=-1)
    return [e_phi, e_psi]


def _embed(space, r, ang):
    """Embedded position: hyperboloid (K=-1), sphere (K=+1), affine (K=0)."""
    n = space.dim
    u = _unit_from_angles(n, ang)
    r = np.asarray(r, dtype=float)
    if space.K == 0:
        return r[..., None] * u
    sn, cs = warp(space, r)
    return np.concatenate([cs[..., None], sn[..., None] * u], axis=-1)


def _embed_tangent(space, r, ang, d_frame):
    """Embedded tangent vector from orthonormal-frame components d_frame (..., n)."""
    n = space.dim
    u = _unit_from_angles(n, ang)
    sph = _sphere_frame(n, ang)
    r = np.asarray(r, dtype=float)
    d_frame = np.asarray(d_frame, dtype=float)
    if space.K == 0:
        T = d_frame[..., 0:1] * u
        for i, e in enumerate(sph):
            T = T + d_frame[..., i + 1 : i + 2] * e
        return T
    sn, cs = warp(space, r)
    # E_r = (cs', cs*u) with cs' = sn (K=-1) / -sn (K=+1)
    top = (sn if space.K == -1 else -sn)[..., None]
    E_r = np.concatenate([top, cs[..., None] * u], axis=-1)
    T = d_frame[..., 0:1] * E_r
    zeros = np.zeros(np.shape(r) + (1,))
    for i, e in enumerate(sph):
        E_a = np.concatenate([zeros, e], axis=-1)
        T = T + d_frame[..., i + 1 : i + 2] * E_a
    return T


def _project(space, X):
    """Embedded point -> (r, ang, u); guards the hemisphere for K=+1."""
    n = space.dim
    if space.K == 0:
        r = np.linalg.norm(X, axis=-1)
        safe = np.where(r < 1e-300, 1.0, r)
        u = X / safe[..., None]
        u = np.where(r[..., None] < 1e-300, _axis_unit(n, np.shape(r)), u)
    elif space.K == -1:
        x0 = np.maximum(X[..., 0], 1.0)
        r = np.arccosh(x0)
        sn = np.sinh(r)
        safe = np.where(sn < 1e-300, 1.0, sn)
        u = X[..., 1:] / safe[..., None]
        u = np.where(sn[..., None] < 1e-300, _axis_unit(n, np.shape(r)), u)
    else:
        x0 = np.clip(X[..., 0], -1.0, 1.0)
        r = np.arccos(x0)
        if np.any(r >= EQUATOR - HEMISPHERE_MARGIN):
            raise HemisphereExitError(
                "geodesic left the open hemisphere",
                exit_bound=float(np.max(r)),
            )
        sn = np.sin(r)
        safe = np.where(sn < 1e-300, 1.0, sn)
        u = X[..., 1:] / safe[..., None]
        u = np.where(sn[..., None] < 1e-300, _axis_unit(n, np.shape(r)), u)
    nrm = np.linalg.norm(u, axis=-1, keepdims=True)
    u = u / np.where(nrm < 1e-300, 1.0, nrm)
    return r, _angles_from_unit(n, u), u


def _axis_unit(n, shape):
    u = np.zeros(shape + (n,))
    u[..., 0] = 1.0
    return u


def _frame_components(space, r, ang, T):
    """Decompose an embedded tangent vector into orthonormal-frame components."""
    n = space.dim
    u = _unit_from_angles(n, ang)
    sph = _sphere_frame(n, ang)
    comps = []
    if space.K == 0:
        comps.append(np.sum(T * u, axis=-1))
        for e in sph:
            comps.append(np.sum(T * e, axis=-1))
        return np.stack(comps, axis=-1)
    sn, cs = warp(space, r)
    top = (sn if space.K == -1 else -sn)[..., None]
    E_r = np.concatenate([top, cs[..., None] * u], axis=-1)
    metric_sign = np.ones(E_r.shape[-1])
    if space.K == -1:
        metric_sign[0] = -1.0
    comps.append(np.sum(T * E_r * metric_sign, axis=-1))
    zeros = np.zeros(np.shape(np.asarray(r)) + (1,))
    for e in sph:
        E_a = np.concatenate([zeros, e], axis=-1)
        comps.append(np.sum(T * E_a * metric_sign, axis=-1))
    return np.stack(comps, axis=-1)


def _flow(space, r, ang, d_frame, t):
    """Advance (r, ang) by arclength t along the geodesic with initial frame
    direction d_frame; returns (r', ang', transported direction components)."""
    X = _embed(space, r, ang)
    T = _embed_tangent(space, r, ang, d_frame)
    t = np.asarray(t, dtype=float)
    if space.K == 0:
        X2 = X + t[..., None] * T
        T2 = np.broadcast_to(T, X2.shape)
    elif space.K == -1:
        ch, sh = np.cosh(t), np.sinh(t)
        X2 = ch[..., None] * X + sh[..., None] * T
        T2 = sh[..., None] * X + ch[..., None] * T
    else:
        c, s = np.cos(t), np.sin(t)
        X2 = c[..., None] * X + s[..., None] * T
        T2 = -s[..., None] * X + c[..., None] * T
    r2, ang2, _ = _project(space, X2)
    d2 = _frame_components(space, r2, ang2, T2)
    return r2, ang2, d2


def geodesic_flow(space, x, direction, t):
    """Exact geodesic flow from PolarPoint ``x``: returns the point at arclength
    t together with the parallel-transported direction (frame components)."""
    direction = np.asarray(direction, dtype=float)
    if direction.shape != (space.dim,):
        raise GeometryDomainError(
            f"direction must have {space.dim} frame components, got shape {direction.shape}"
        )
    if abs(np.linalg.norm(direction) - 1.0) > 1e-12:
        raise GeometryDomainError("direction must be a unit vector (tolerance 1e-12)")
    ang = np.asarray(x.theta, dtype=float)
    r2, ang2, d2 = _flow(space, np.asarray(x.r), ang, direction, float(t))
    return PolarPoint(float(r2), tuple(float(a) for a in ang2)), d2


def geodesic_flow_point(space, x, direction, t):
    return geodesic_flow(space, x, direction, t)[0]


# ---------------------------------------------------------------------------
# Finite-difference covariant Hessian along exact geodesics.  Used as the
# discretization-free oracle for the potential law hess V = -K V Id.
# ---------------------------------------------------------------------------


def geodesic_fd_hessian(space, values_fn, r, ang, step=1e-3):
    """Covariant Hessian of a scalar function by second differences along
    geodesics, vectorized over points.

    ``values_fn(r, ang)`` evaluates the function; only its values enter, so
    the result is independent of any closed-form derivative.
    """
    n = space.dim
    r = np.asarray(r, dtype=float)
    ang = np.asarray(ang, dtype=float)
    h = float(step)
    f0 = values_fn(r, ang)

    def second_diff(d_frame):
        rp, ap, _ = _flow(space, r, ang, d_frame, np.full(np.shape(r), h))
        rm, am, _ = _flow(space, r, ang, d_frame, np.full(np.shape(r), -h))
        return (values_fn(rp, ap) - 2.0 * f0 + values_fn(rm, am)) / h**2

    eye = np.eye(n)
    H = np.zeros(np.shape(r) + (n, n))
    diag = []
    for i in range(n):
        d = np.broadcast_to(eye[i], np.shape(r) + (n,))
        dii = second_diff(d)
        diag.append(dii)
        H[..., i, i] = dii
    for i in range(n):
        for j in range(i + 1, n):
            d = (eye[i] + eye[j]) / math.sqrt(2.0)
            d = np.broadcast_to(d, np.shape(r) + (n,))
            dij = second_diff(d) - 0.5 * (diag[i] + diag[j])
            H[..., i, j] = dij
            H[..., j, i] = dij
    return H


def hessian_identity_residual(space, samples, step=1e-3):
    """Max-norm residual of the potential Hessian law against the
    finite-difference geodesic Hessian, over a list of PolarPoints."""
    if not samples:
        raise GeometryDomainError("empty sample list")
    r = np.array([p.r for p in samples])
    ang = np.array([p.theta for p in samples])

    def V_values(rr, aa):
        _, cs = warp(space, rr)
        return cs

    H = geodesic_fd_hessian(space, V_values, r, ang, step=step)
    _, cs = warp(space, r)
    target = H + space.K * cs[:, None, None] * np.eye(space.dim)
    return float(np.max(np.abs(target)))
