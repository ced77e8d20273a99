"""Star-shaped domains and the extrinsic geometry of their boundaries.

Every domain is a radial graph r = rho(angle) about the base point:
geodesic balls (possibly off center, realized through the space-form law
of cosines in the same chart) and perturbed star graphs.  Boundary
curvature comes from exact analytic derivatives of rho - Fourier series
for n=2 star graphs, implicit differentiation of the law of cosines for
off-center balls, cosine series or clamped splines for n=3 profiles -
never from finite differences of sampled positions.

Sign convention: h(X, Y) = <nabla_X nu, Y> with nu the outward normal, so
geodesic spheres have h = (cs/sn) Id > 0.
"""

import math
from dataclasses import dataclass, field

import numpy as np
from scipy.interpolate import CubicSpline

from .errors import GeometryDomainError, PreconditionError, UnsupportedSpaceError
from .spaceform import EQUATOR, HEMISPHERE_MARGIN, SpaceForm, warp

_LEGGAUSS_CACHE = {}


def _leggauss(n):
    if n not in _LEGGAUSS_CACHE:
        _LEGGAUSS_CACHE[n] = np.polynomial.legendre.leggauss(n)
    return _LEGGAUSS_CACHE[n]


@dataclass(frozen=True)
class Ball:
    """Geodesic ball of radius R centered at distance d from the base point
    along the first coordinate axis (d = 0: centered)."""

    radius: float
    center_offset: float = 0.0


@dataclass(frozen=True)
class StarGraph:
    """Radial graph r = rho(angle).

    n=2: ``fourier`` holds real coefficients (a0, a1, b1, a2, b2, ...) of
    rho(theta) = a0 + sum_m (a_m cos m theta + b_m sin m theta).

    n=3 (axisymmetric): either ``cosine`` coefficients (c0, c1, ...) of
    rho(phi) = sum_j c_j cos(j phi), or ``profile`` samples [(phi, rho)]
    interpolated by a clamped cubic spline (zero slope at the poles).
    """

    fourier: tuple = ()
    cosine: tuple = ()
    profile: tuple = ()


@dataclass(frozen=True)
class Domain:
    space: SpaceForm
    shape: object
    resolution: int = 128

    def __post_init__(self):
        if self.resolution < 8:
            raise GeometryDomainError(f"resolution must be >= 8, got {self.resolution}")
        rho = radial_function(self)
        ang = boundary_parameters(self.space.dim, max(self.resolution, 64))[0]
        rr = rho.value(ang)
        if np.any(rr <= 1e-3):
            raise GeometryDomainError("radial function must exceed 1e-3 everywhere (grid underresolution)")
        if self.space.K == 1 and np.any(rr >= EQUATOR - HEMISPHERE_MARGIN):
            raise GeometryDomainError("domain reaches the equator of the hemisphere")

    def max_radius(self):
        rho = radial_function(self)
        ang = boundary_parameters(self.space.dim, max(self.resolution, 256))[0]
        return float(np.max(rho.value(ang)))


def ball_domain(space, radius, center_offset=0.0, resolution=128):
    if radius <= 0:
        raise GeometryDomainError(f"ball radius must be positive, got {radius}")
    if center_offset < 0:
        raise GeometryDomainError("center offset must be nonnegative")
    if center_offset >= radius:
        raise GeometryDomainError("base point must lie inside the ball (d < R)")
    if space.K == 1 and center_offset + radius >= EQUATOR:
        raise GeometryDomainError("ball leaves the open hemisphere (d + R >= pi/2)")
    return Domain(space, Ball(float(radius), float(center_offset)), resolution)


def star_domain(space, fourier=None, cosine=None, profile=None, resolution=128):
    shape = StarGraph(
        fourier=tuple(fourier) if fourier is not None else (),
        cosine=tuple(cosine) if cosine is not None else (),
        profile=tuple(tuple(p) for p in profile) if profile is not None else (),
    )
    return Domain(space, shape, resolution)


# ---------------------------------------------------------------------------
# Radial functions rho(angle) with exact first and second derivatives.
# ---------------------------------------------------------------------------


class RadialFunction:
    def value(self, ang):
        raise NotImplementedError

    def derivatives(self, ang):
        """Returns (rho, rho', rho'') at the parameter angle(s)."""
        raise NotImplementedError


class _ConstantRadius(RadialFunction):
    def __init__(self, R):
        self.R = float(R)

    def value(self, ang):
        return np.full(np.shape(ang), self.R)

    def derivatives(self, ang):
        z = np.zeros(np.shape(ang))
        return z + self.R, z, z


class _FourierRadius(RadialFunction):
    def __init__(self, coeffs):
        coeffs = np.asarray(coeffs, dtype=float)
        self.a0 = coeffs[0]
        rest = coeffs[1:]
        if rest.size % 2:
            rest = np.append(rest, 0.0)
        self.a = rest[0::2]
        self.b = rest[1::2]
        self.m = np.arange(1, self.a.size + 1)

    def _eval(self, ang, order):
        t = np.asarray(ang, dtype=float)[..., None] * self.m
        c, s = np.cos(t), np.sin(t)
        if order == 0:
            return self.a0 + c @ self.a + s @ self.b
        if order == 1:
            return (-s * self.m) @ self.a + (c * self.m) @ self.b
        return (-c * self.m**2) @ self.a + (-s * self.m**2) @ self.b

    def value(self, ang):
        return self._eval(ang, 0)

    def derivatives(self, ang):
        return self._eval(ang, 0), self._eval(ang, 1), self._eval(ang, 2)


class _CosineRadius(RadialFunction):
    """rho(phi) = sum c_j cos(j phi); smooth at both poles by construction."""

    def __init__(self, coeffs):
        self.c = np.asarray(coeffs, dtype=float)
        self.j = np.arange(self.c.size)

    def value(self, ang):
        t = np.asarray(ang, dtype=float)[..., None] * self.j
        return np.cos(t) @ self.c

    def derivatives(self, ang):
        t = np.asarray(ang, dtype=float)[..., None] * self.j
        v = np.cos(t) @ self.c
        d1 = (-np.sin(t) * self.j) @ self.c
        d2 = (-np.cos(t) * self.j**2) @ self.c
        return v, d1, d2


class _SplineRadius(RadialFunction):
    def __init__(self, profile):
        pts = sorted(profile)
        phi = np.array([p[0] for p in pts])
        rho = np.array([p[1] for p in pts])
        if phi[0] > 1e-12 or phi[-1] < math.pi - 1e-12:
            raise GeometryDomainError("n=3 profile must cover colatitude [0, pi]")
        if len(phi) < 4:
            raise PreconditionError(
                "profile-smoothness",
                "need at least 4 profile samples to estimate second derivatives",
            )
        self.spl = CubicSpline(phi, rho, bc_type=((1, 0.0), (1, 0.0)))

    def value(self, ang):
        return self.spl(ang)

    def derivatives(self, ang):
        return self.spl(ang), self.spl(ang, 1), self.spl(ang, 2)


class _OffCenterBallRadius(RadialFunction):
    """rho(angle) of a geodesic ball about a point at distance d from the base,
    via the space-form law of cosines; derivatives by implicit differentiation.

    The implicit relation F(rho, t) = 0 per curvature:
      K=-1:  cosh rho cosh d - sinh rho sinh d cos t - cosh R = 0
      K= 0:  rho^2 + d^2 - 2 rho d cos t - R^2 = 0
      K=+1:  cos rho cos d + sin rho sin d cos t - cos R = 0
    """

    def __init__(self, space, R, d):
        self.space = space
        self.R = float(R)
        self.d = float(d)

    def value(self, ang):
        t = np.asarray(ang, dtype=float)
        K, R, d = self.space.K, self.R, self.d
        if d == 0.0:
            return np.full(t.shape, R)
        ct = np.cos(t)
        if K == -1:
            A, B = math.cosh(d), math.sinh(d) * ct
            k = np.sqrt(A * A - B * B)
            return np.arctanh(B / A) + np.arccosh(np.maximum(math.cosh(R) / k, 1.0))
        if K == 0:
            return d * ct + np.sqrt(R * R - d * d * (1.0 - ct**2))
        A, B = math.cos(d), math.sin(d) * ct
        k = np.sqrt(A * A + B * B)
        return np.arctan2(B, A) + np.arccos(np.clip(math.cos(R) / k, -1.0, 1.0))

    def _implicit(self, rho, t):
        K, d = self.space.K, self.d
        ct, st = np.cos(t), np.sin(t)
        if K == -1:
            sh, ch = np.sinh(rho), np.cosh(rho)
            F_r = sh * math.cosh(d) - ch * math.sinh(d) * ct
            F_t = sh * math.sinh(d) * st
            F_rr = ch * math.cosh(d) - sh * math.sinh(d) * ct
            F_rt = ch * math.sinh(d) * st
            F_tt = sh * math.sinh(d) * ct
        elif K == 0:
            F_r = 2.0 * rho - 2.0 * d * ct
            F_t = 2.0 * rho * d * st
            F_rr = 2.0 + 0.0 * rho
            F_rt = 2.0 * d * st
            F_tt = 2.0 * rho * d * ct
        else:
            s, c = np.sin(rho), np.cos(rho)
            F_r = -s * math.cos(d) + c * math.sin(d) * ct
            F_t = -s * math.sin(d) * st
            F_rr = -c * math.cos(d) - s * math.sin(d) * ct
            F_rt = -c * math.sin(d) * st
            F_tt = -s * math.sin(d) * ct
        return F_r, F_t, F_rr, F_rt, F_tt

    def derivatives(self, ang):
        t = np.asarray(ang, dtype=float)
        rho = self.value(t)
        if self.d == 0.0:
            z = np.zeros_like(rho)
            return rho, z, z
        F_r, F_t, F_rr, F_rt, F_tt = self._implicit(rho, t)
        d1 = -F_t / F_r
        d2 = -(F_tt + 2.0 * F_rt * d1 + F_rr * d1**2) / F_r
        return rho, d1, d2


def radial_function(domain):
    shape = domain.shape
    if isinstance(shape, Ball):
        if shape.center_offset == 0.0:
            return _ConstantRadius(shape.radius)
        return _OffCenterBallRadius(domain.space, shape.radius, shape.center_offset)
    if isinstance(shape, StarGraph):
        if shape.fourier:
            if domain.space.dim != 2:
                raise GeometryDomainError("Fourier star graphs are n=2 only")
            return _FourierRadius(shape.fourier)
        if shape.cosine:
            if domain.space.dim != 3:
                raise GeometryDomainError("cosine-profile star graphs are n=3 only")
            return _CosineRadius(shape.cosine)
        if shape.profile:
            if domain.space.dim != 3:
                raise GeometryDomainError("sampled profiles are n=3 only")
            return _SplineRadius(shape.profile)
        raise GeometryDomainError("star graph needs fourier, cosine or profile data")
    raise GeometryDomainError(f"unknown shape {shape!r}")


# ---------------------------------------------------------------------------
# Boundary sampling and extrinsic geometry.
# ---------------------------------------------------------------------------


def boundary_parameters(n, resolution):
    """Angular samples and quadrature weights of the boundary parameter.

    n=2: equispaced theta with the (spectrally accurate) trapezoid weight;
    n=3: Gauss-Legendre in x = cos(phi), longitude folded into the weight.
    """
    if n == 2:
        ang = 2.0 * math.pi * np.arange(resolution) / resolution
        wq = np.full(resolution, 2.0 * math.pi / resolution)
        return ang, wq
    if n == 3:
        x, glw = _leggauss(resolution)
        phi = np.arccos(x[::-1])  # increasing colatitude
        return phi, 2.0 * math.pi * glw[::-1]
    raise GeometryDomainError("boundary sampling implemented for n=2,3 only")


@dataclass
class BoundaryGeometry:
    """Per-sample boundary data of M = boundary(Omega), in the orthonormal
    polar frame.  ``h`` is expressed in ``tangent_frame`` (meridian first)."""

    domain: Domain
    ang: np.ndarray          # boundary parameter samples (theta or phi)
    param_weight: np.ndarray  # quadrature weight of the parameter measure
    rho: np.ndarray
    drho: np.ndarray
    d2rho: np.ndarray
    normal: np.ndarray       # (N, n) frame components of outward nu
    tangent_frame: np.ndarray  # (N, n-1, n) frame components of a basis of TM
    area_weight: np.ndarray  # induced area element times quadrature weight
    h: np.ndarray            # (N, n-1, n-1) second fundamental form
    H: np.ndarray            # normalized mean curvature trace(h)/(n-1)
    V: np.ndarray
    V_nu: np.ndarray
    w: np.ndarray            # sqrt(rho'^2 + sn(rho)^2), the graph line element

    @property
    def space(self):
        return self.domain.space

    def positions(self):
        """(r, ang) arrays of the samples; ang has the chart's angle columns."""
        if self.space.dim == 2:
            return self.rho, self.ang[:, None]
        return self.rho, np.stack([self.ang, np.zeros_like(self.ang)], axis=-1)

    def support(self):
        """Support function sn(rho) <d_r, nu>; equals V_nu when K = -1."""
        sn, _ = warp(self.space, self.rho)
        return sn * self.normal[:, 0]


def boundary_geometry(domain):
    """Sample the boundary and assemble normals, curvature and potential data."""
    space = domain.space
    n = space.dim
    ang, wq = boundary_parameters(n, domain.resolution)
    rho, d1, d2 = radial_function(domain).derivatives(ang)
    sn, cs = warp(space, rho)
    w = np.sqrt(d1**2 + sn**2)

    N = ang.size
    normal = np.zeros((N, n))
    normal[:, 0] = sn / w
    normal[:, 1] = -d1 / w

    kappa_m = (sn**2 * cs + 2.0 * cs * d1**2 - sn * d2) / w**3

    tangent = np.zeros((N, n - 1, n))
    tangent[:, 0, 0] = d1 / w
    tangent[:, 0, 1] = sn / w
    h = np.zeros((N, n - 1, n - 1))
    h[:, 0, 0] = kappa_m
    if n == 2:
        area_weight = wq * w
    else:
        kappa_p = (cs - (d1 / sn) / np.tan(ang)) / w
        h[:, 1, 1] = kappa_p
        tangent[:, 1, 2] = 1.0
        area_weight = wq * w * sn  # the sin(phi) factor lives in wq (GL in cos phi)

    H = np.trace(h, axis1=1, axis2=2) / (n - 1)
    V = cs.copy()
    V_nu = -space.K * sn**2 / w
    return BoundaryGeometry(
        domain=domain, ang=ang, param_weight=wq, rho=rho, drho=d1, d2rho=d2,
        normal=normal, tangent_frame=tangent, area_weight=area_weight,
        h=h, H=H, V=V, V_nu=V_nu, w=w,
    )


def principal_curvatures(bg):
    """(N, n-1) array of principal curvatures (h is diagonal in the frame used)."""
    n = bg.space.dim
    if n == 2:
        return bg.h[:, 0, 0][:, None]
    return np.stack([bg.h[:, 0, 0], bg.h[:, 1, 1]], axis=-1)


def convexity_margin(bg):
    """min over samples of the least eigenvalue of h - (V_nu / V) Id.

    Nonnegative exactly when the weighted-convexity hypothesis holds on the
    sampled boundary.  Fails if V <= 0 anywhere (hemisphere violation).
    """
    if np.any(bg.V <= 0):
        raise GeometryDomainError("potential must stay positive on the boundary")
    kappas = principal_curvatures(bg)
    return float(np.min(kappas - (bg.V_nu / bg.V)[:, None]))


def horoconvexity_margin(bg):
    """min principal curvature minus 1; hyperbolic space only."""
    if bg.space.K != -1:
        raise UnsupportedSpaceError("horospherical convexity is defined for K = -1 only")
    return float(np.min(principal_curvatures(bg)) - 1.0)
