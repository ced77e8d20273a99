"""Scalar fields on a space form with exact derivative evaluators.

A field carries value / gradient / covariant-Hessian evaluators in the
orthonormal polar frame, vectorized over point arrays (r shape (...,),
ang shape (..., n-1)).  Fields form an algebra: sums, products, scalar
multiples and smooth unary composition propagate derivatives by the
product and chain rules, so every expression built from the base fields
has machine-accurate derivatives everywhere, including the origin.

Base fields: the model potential V = cs_K(r), ambient coordinate
functions sn_K(r) * <u(theta), u0> (which satisfy hess f = -K f g
exactly), squared distance r^2, and constants.
"""

import math

import numpy as np

from .spaceform import PolarPoint, sn_ratio, warp, _unit_from_angles, _sphere_frame


class ScalarField:
    """Base class: subclasses implement value/gradient/hessian batch evaluators."""

    def __init__(self, space):
        self.space = space

    # batch evaluators -------------------------------------------------
    def value(self, r, ang):
        raise NotImplementedError

    def gradient(self, r, ang):
        raise NotImplementedError

    def hessian(self, r, ang):
        raise NotImplementedError

    # scalar-point convenience ------------------------------------------
    def value_at(self, point: PolarPoint):
        r, ang = _point_arrays(point)
        return float(self.value(r, ang)[0])

    def gradient_at(self, point: PolarPoint):
        r, ang = _point_arrays(point)
        return self.gradient(r, ang)[0]

    def hessian_at(self, point: PolarPoint):
        r, ang = _point_arrays(point)
        return self.hessian(r, ang)[0]

    def laplacian(self, r, ang):
        H = self.hessian(r, ang)
        return np.trace(H, axis1=-2, axis2=-1)

    # algebra ------------------------------------------------------------
    def __add__(self, other):
        return SumField(self, _as_field(self.space, other))

    __radd__ = __add__

    def __sub__(self, other):
        return SumField(self, -_as_field(self.space, other))

    def __rsub__(self, other):
        return SumField(_as_field(self.space, other), -self)

    def __neg__(self):
        return ScaledField(self, -1.0)

    def __mul__(self, other):
        if np.isscalar(other):
            return ScaledField(self, float(other))
        return ProductField(self, other)

    __rmul__ = __mul__

    def exp(self):
        return ComposedField(self, np.exp, np.exp, np.exp, "exp")

    def sin(self):
        return ComposedField(self, np.sin, np.cos, lambda t: -np.sin(t), "sin")

    def cos(self):
        return ComposedField(self, np.cos, lambda t: -np.sin(t), lambda t: -np.cos(t), "cos")

    def squared(self):
        return ComposedField(self, np.square, lambda t: 2.0 * t, lambda t: 2.0 + 0.0 * t, "sq")


def _point_arrays(point):
    return np.array([point.r]), np.array([point.theta], dtype=float)


def _as_field(space, other):
    if isinstance(other, ScalarField):
        return other
    return ConstantField(space, float(other))


class ConstantField(ScalarField):
    def __init__(self, space, c):
        super().__init__(space)
        self.c = float(c)

    def value(self, r, ang):
        return np.full(np.shape(r), self.c)

    def gradient(self, r, ang):
        return np.zeros(np.shape(r) + (self.space.dim,))

    def hessian(self, r, ang):
        return np.zeros(np.shape(r) + (self.space.dim, self.space.dim))


class PotentialField(ScalarField):
    """V = cosh r / 1 / cos r; satisfies hess V = -K V g exactly."""

    def value(self, r, ang):
        _, cs = warp(self.space, r)
        return cs + np.zeros(np.shape(r))

    def gradient(self, r, ang):
        g = np.zeros(np.shape(r) + (self.space.dim,))
        if self.space.K != 0:
            sn, _ = warp(self.space, r)
            g[..., 0] = -self.space.K * sn
        return g

    def hessian(self, r, ang):
        _, cs = warp(self.space, r)
        eye = np.eye(self.space.dim)
        return -self.space.K * cs[..., None, None] * eye


class AmbientCoordinateField(ScalarField):
    """f = sn_K(r) * <u(theta), u0> for a fixed unit vector u0 in R^n.

    These are the ambient linear coordinates of the embedding model and
    obey hess f = -K f g in every space form (for K=0 they are the usual
    Cartesian coordinates with vanishing Hessian).
    """

    def __init__(self, space, u0):
        super().__init__(space)
        u0 = np.asarray(u0, dtype=float)
        if u0.shape != (space.dim,):
            raise ValueError(f"u0 must be a vector in R^{space.dim}")
        self.u0 = u0 / np.linalg.norm(u0)

    def _c(self, ang):
        u = _unit_from_angles(self.space.dim, ang)
        return u @ self.u0

    def value(self, r, ang):
        sn, _ = warp(self.space, r)
        return sn * self._c(ang)

    def gradient(self, r, ang):
        _, cs = warp(self.space, r)
        comps = [cs * self._c(ang)]
        for e in _sphere_frame(self.space.dim, ang):
            comps.append(e @ self.u0 + np.zeros(np.shape(r)))
        return np.stack(comps, axis=-1)

    def hessian(self, r, ang):
        eye = np.eye(self.space.dim)
        return -self.space.K * self.value(r, ang)[..., None, None] * eye


class RadiusSquaredField(ScalarField):
    """f = r^2, with the smooth closed-form polar-frame Hessian.

    hess(r^2) = diag(2, 2 r cs/sn, ...) = diag(2, 2 cs/(sn/r), ...); the
    sn/r ratio is series-continued through the origin.
    """

    def value(self, r, ang):
        return np.asarray(r, dtype=float) ** 2

    def gradient(self, r, ang):
        g = np.zeros(np.shape(r) + (self.space.dim,))
        g[..., 0] = 2.0 * np.asarray(r, dtype=float)
        return g

    def hessian(self, r, ang):
        n = self.space.dim
        _, cs = warp(self.space, r)
        ang_diag = 2.0 * cs / sn_ratio(self.space, r)
        H = np.zeros(np.shape(r) + (n, n))
        H[..., 0, 0] = 2.0
        for i in range(1, n):
            H[..., i, i] = ang_diag
        return H


class SumField(ScalarField):
    def __init__(self, a, b):
        super().__init__(a.space)
        self.a, self.b = a, b

    def value(self, r, ang):
        return self.a.value(r, ang) + self.b.value(r, ang)

    def gradient(self, r, ang):
        return self.a.gradient(r, ang) + self.b.gradient(r, ang)

    def hessian(self, r, ang):
        return self.a.hessian(r, ang) + self.b.hessian(r, ang)


class ScaledField(ScalarField):
    def __init__(self, a, c):
        super().__init__(a.space)
        self.a, self.c = a, float(c)

    def value(self, r, ang):
        return self.c * self.a.value(r, ang)

    def gradient(self, r, ang):
        return self.c * self.a.gradient(r, ang)

    def hessian(self, r, ang):
        return self.c * self.a.hessian(r, ang)


class ProductField(ScalarField):
    """fg with hess(fg) = f hess g + g hess f + df (x) dg + dg (x) df."""

    def __init__(self, a, b):
        super().__init__(a.space)
        self.a, self.b = a, b

    def value(self, r, ang):
        return self.a.value(r, ang) * self.b.value(r, ang)

    def gradient(self, r, ang):
        fa, fb = self.a.value(r, ang), self.b.value(r, ang)
        return fa[..., None] * self.b.gradient(r, ang) + fb[..., None] * self.a.gradient(r, ang)

    def hessian(self, r, ang):
        fa, fb = self.a.value(r, ang), self.b.value(r, ang)
        ga, gb = self.a.gradient(r, ang), self.b.gradient(r, ang)
        Ha, Hb = self.a.hessian(r, ang), self.b.hessian(r, ang)
        cross = ga[..., :, None] * gb[..., None, :]
        return (
            fa[..., None, None] * Hb
            + fb[..., None, None] * Ha
            + cross
            + np.swapaxes(cross, -1, -2)
        )


class ComposedField(ScalarField):
    """u(f) with hess = u'(f) hess f + u''(f) df (x) df."""

    def __init__(self, a, u, du, d2u, name):
        super().__init__(a.space)
        self.a, self.u, self.du, self.d2u = a, u, du, d2u
        self.name = name

    def value(self, r, ang):
        return self.u(self.a.value(r, ang))

    def gradient(self, r, ang):
        return self.du(self.a.value(r, ang))[..., None] * self.a.gradient(r, ang)

    def hessian(self, r, ang):
        fa = self.a.value(r, ang)
        ga = self.a.gradient(r, ang)
        Ha = self.a.hessian(r, ang)
        outer = ga[..., :, None] * ga[..., None, :]
        return self.du(fa)[..., None, None] * Ha + self.d2u(fa)[..., None, None] * outer


# ---------------------------------------------------------------------------
# Named fields for the CLI and randomized test fields.
# ---------------------------------------------------------------------------


def ambient_axes(space):
    """The n ambient coordinate fields (for n=3 only the first is axisymmetric)."""
    return [AmbientCoordinateField(space, np.eye(space.dim)[i]) for i in range(space.dim)]


def named_field(space, name, seed=None):
    """Built-in fields: 'V', 'one', 'rsq', 'linear', 'random-seeded[:N]'
    (also accepted as 'random[:N]')."""
    if name == "V":
        return PotentialField(space)
    if name == "one":
        return ConstantField(space, 1.0)
    if name == "rsq":
        return RadiusSquaredField(space)
    if name == "linear":
        return AmbientCoordinateField(space, np.eye(space.dim)[0])
    if name.startswith("random-seeded") or name.startswith("random"):
        if seed is None:
            _, _, tail = name.partition(":")
            seed = int(tail) if tail else 0
        return random_field(space, np.random.default_rng(seed))
    raise ValueError(f"unknown field name {name!r}")


def random_field(space, rng, sharpness=1.0):
    """Random smooth field built from the algebra over {V, ambient coords, r^2}.

    ``sharpness`` scales the arguments of the transcendental pieces and hence
    the angular spectral content (used by convergence-order tests).
    """
    axes = ambient_axes(space)
    if space.dim == 3:
        axes = axes[:1]  # keep axisymmetry for the n=3 quadrature
    V = PotentialField(space)
    rsq = RadiusSquaredField(space)
    pool = [V] + axes + [rsq]
    c = rng.uniform(-1.0, 1.0, size=4)
    f = ConstantField(space, rng.uniform(-0.5, 0.5))
    f = f + c[0] * pool[rng.integers(len(pool))]
    f = f + c[1] * (pool[rng.integers(len(pool))] * pool[rng.integers(len(pool))])
    a1 = rng.uniform(0.6, 1.4) * sharpness
    f = f + c[2] * (a1 * axes[rng.integers(len(axes))]).sin()
    a2 = rng.uniform(0.5, 1.1) * sharpness
    f = f + c[3] * (a2 * axes[rng.integers(len(axes))]).exp()
    return f


def random_weight(space, rng, sharpness=1.0):
    """Random strictly positive field: exp of a bounded random expression."""
    axes = ambient_axes(space)
    if space.dim == 3:
        axes = axes[:1]
    g = rng.uniform(-0.4, 0.4) * axes[rng.integers(len(axes))]
    g = g + rng.uniform(-0.3, 0.3) * (sharpness * 0.8 * axes[rng.integers(len(axes))]).sin()
    w = g.exp()
    if rng.uniform() < 0.5:
        w = w + 0.25 * PotentialField(space).squared()
    return w
