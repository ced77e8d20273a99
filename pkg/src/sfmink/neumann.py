"""Discrete solution of the weighted Neumann problem and the inequality chain.

The solver discretizes the symmetric divergence-form problem

    div(V^2 grad w) = V in Omega,   V^2 dw/dnu = c V on M,

by a Galerkin method in boundary-fitted coordinates r = s rho(angle):
Fourier modes (n=2) or Legendre polynomials in cos(phi) (n=3, axisym)
in angle, Chebyshev polynomials in s with the m != 0 radial functions
pinned to zero at the origin (single-valuedness).  The weak form

    int_Omega V^2 grad w . grad v = int_M c V v - int_Omega V v

makes the assembled matrix symmetric with the constant function as its
exact one-dimensional kernel; the right-hand side is solvable exactly
when c = int_Omega V / int_M V (the component along the kernel is the
compatibility residual).  The solution is gauge-fixed by int_Omega
w V^2 = 0 and transformed to f = w V, which solves

    lap f + K n f = 1 in Omega,    V f_nu - V_nu f = c V on M.

Residual contracts are verified with derivative stencils independent of
the discretization: second differences of interpolant *values* along
exact geodesics, with step tied to the domain resolution.
"""

import math
from dataclasses import dataclass

import numpy as np
import scipy.linalg

from .domains import boundary_geometry, radial_function, _leggauss
from .errors import CompatibilityError, GeometryDomainError, PreconditionError
from .fields import PotentialField, ProductField, ScalarField
from .quadrature import interior_nodes, weighted_integrals
from .reilly import grouped_boundary_form, hessian_deficit, reilly_breakdown
from .spaceform import EQUATOR, warp, _flow


# ---------------------------------------------------------------------------
# Basis tables.
# ---------------------------------------------------------------------------


def _cheb_tables(s, degree):
    """Values/derivatives of T_k(2s-1), k = 0..degree, at s in [0, 1]."""
    s = np.asarray(s, dtype=float)
    u = 2.0 * s - 1.0
    val = np.polynomial.chebyshev.chebvander(u, degree)
    d1 = np.zeros_like(val)
    d2 = np.zeros_like(val)
    for k in range(1, degree + 1):
        c = np.zeros(k + 1)
        c[k] = 1.0
        dc = np.polynomial.chebyshev.chebder(c)
        d1[..., k] = 2.0 * np.polynomial.chebyshev.chebval(u, dc)
        if k >= 2:
            d2c = np.polynomial.chebyshev.chebder(dc)
            d2[..., k] = 4.0 * np.polynomial.chebyshev.chebval(u, d2c)
    return val, d1, d2


class _RadialBasis:
    """Column layout: 0..P free T_k; P+1..2P the variants T_k - T_k(0-end)
    vanishing at s = 0 (used by the nonconstant angular blocks)."""

    def __init__(self, degree):
        self.degree = degree

    def tables(self, s):
        P = self.degree
        val, d1, d2 = _cheb_tables(s, P)
        signs = (-1.0) ** np.arange(1, P + 1)
        val_c = val[..., 1:] - signs
        return (
            np.concatenate([val, val_c], axis=-1),
            np.concatenate([d1, d1[..., 1:]], axis=-1),
            np.concatenate([d2, d2[..., 1:]], axis=-1),
        )


class _FourierAngular:
    """1, cos m t, sin m t for m = 1..modes; derivative tables are in t."""

    def __init__(self, modes):
        self.modes = modes
        self.count = 2 * modes + 1

    def quad(self, points):
        t = 2.0 * math.pi * np.arange(points) / points
        return t, np.full(points, 2.0 * math.pi / points)

    def tables(self, t, orders=2):
        t = np.asarray(t, dtype=float)
        m = np.arange(1, self.modes + 1)
        mt = t[..., None] * m
        c, s = np.cos(mt), np.sin(mt)
        # column layout: [1, cos t, sin t, cos 2t, sin 2t, ...]
        val = np.empty(t.shape + (self.count,))
        d1 = np.empty_like(val)
        d2 = np.empty_like(val)
        val[..., 0], d1[..., 0], d2[..., 0] = 1.0, 0.0, 0.0
        val[..., 1::2], val[..., 2::2] = c, s
        d1[..., 1::2], d1[..., 2::2] = -m * s, m * c
        d2[..., 1::2], d2[..., 2::2] = -(m**2) * c, -(m**2) * s
        return val, d1, d2


class _LegendreAngular:
    """P_l(cos phi), l = 0..degree; derivative tables are in phi."""

    def __init__(self, degree):
        self.degree = degree
        self.count = degree + 1
        self._dcoef = []
        self._d2coef = []
        for l in range(degree + 1):
            c = np.zeros(l + 1)
            c[l] = 1.0
            dc = np.polynomial.legendre.legder(c)
            self._dcoef.append(dc)
            self._d2coef.append(np.polynomial.legendre.legder(dc) if l >= 2 else np.zeros(1))

    def quad(self, points):
        x, wts = _leggauss(points)
        phi = np.arccos(x[::-1])
        return phi, 2.0 * math.pi * wts[::-1]

    def tables(self, phi, orders=2):
        phi = np.asarray(phi, dtype=float)
        x = np.cos(phi)
        sphi = np.sin(phi)
        val = np.polynomial.legendre.legvander(x, self.degree)
        dPx = np.stack(
            [np.polynomial.legendre.legval(x, self._dcoef[l]) if l >= 1 else np.zeros_like(x) for l in range(self.count)],
            axis=-1,
        )
        d2Px = np.stack(
            [np.polynomial.legendre.legval(x, self._d2coef[l]) if l >= 2 else np.zeros_like(x) for l in range(self.count)],
            axis=-1,
        )
        d1 = -sphi[..., None] * dPx
        d2 = -x[..., None] * dPx + (sphi**2)[..., None] * d2Px
        return val, d1, d2


def _solver_sizes(domain, modes=None, radial_degree=None):
    res = domain.resolution
    if modes is None:
        modes = int(np.clip(res // 4, 12, 24))
    if radial_degree is None:
        radial_degree = int(np.clip(res // 5, 12, 20))
    return modes, radial_degree


@dataclass
class _Discretization:
    domain: object
    angular: object
    radial: _RadialBasis
    rid: np.ndarray  # radial column per DOF
    aid: np.ndarray  # angular column per DOF
    const_dof: int
    matrix: np.ndarray
    rhs_interior: np.ndarray  # -int_Omega V phi
    rhs_boundary_unit: np.ndarray  # int_M V phi  (multiplied by c later)
    int_V: float  # internal quadrature of int_Omega V
    int_V2: float  # int_Omega V^2
    phi_mass_V2: np.ndarray  # int_Omega V^2 phi (gauge bookkeeping)


def assemble_system(domain, modes=None, radial_degree=None):
    """Assemble the symmetric Galerkin system; exposed for spectral tests."""
    space = domain.space
    n = space.dim
    modes, P = _solver_sizes(domain, modes, radial_degree)
    angular = _FourierAngular(modes) if n == 2 else _LegendreAngular(modes)
    radial = _RadialBasis(P)

    # DOF layout: angular function 0 gets all P+1 free radial columns,
    # the others get the P constrained columns (value 0 at s = 0).
    rid, aid = [], []
    for ia in range(angular.count):
        cols = range(P + 1) if ia == 0 else range(P + 1, 2 * P + 1)
        for rc in cols:
            rid.append(rc)
            aid.append(ia)
    rid = np.array(rid)
    aid = np.array(aid)
    const_dof = 0  # (T_0, angular 1)

    # quadrature grids
    qa = max(4 * modes + 8, 48) if n == 2 else max(2 * modes + 12, 32)
    qs = 2 * P + 12
    t_q, wt_q = angular.quad(qa)
    sg, wsg = _leggauss(qs)
    s_q = 0.5 * (sg + 1.0)
    ws_q = 0.5 * wsg

    rho, drho, _ = radial_function(domain).derivatives(t_q)
    a_q = drho / rho

    Rval, Rd1, _ = radial.tables(s_q)
    Aval, Ad1, _ = angular.tables(t_q)

    r_g = s_q[:, None] * rho[None, :]
    sn_g, cs_g = warp(space, r_g)
    V_g = cs_g if space.K != 0 else np.ones_like(r_g)
    snr = np.where(r_g == 0.0, 1.0, sn_g / np.where(r_g == 0.0, 1.0, r_g))  # sn/r, safe

    wq = ws_q[:, None] * wt_q[None, :] * sn_g ** (n - 1) * rho[None, :]

    Rv = Rval[:, rid]
    Rd = Rd1[:, rid]
    Av = Aval[:, aid]
    Ad = Ad1[:, aid]

    Q = qs * qa
    N = rid.size
    B1 = (Rd[:, None, :] * Av[None, :, :]) / rho[None, :, None]
    B2 = (Rv[:, None, :] * Ad[None, :, :] - (s_q[:, None] * a_q[None, :])[:, :, None] * Rd[:, None, :] * Av[None, :, :])
    # angular gradient component divides by sn(r); guard the origin rows where
    # the constrained radial functions vanish identically anyway.
    sn_safe = np.where(sn_g == 0.0, 1.0, sn_g)
    B2 = B2 / sn_safe[:, :, None]
    B1 = B1.reshape(Q, N)
    B2 = B2.reshape(Q, N)

    Wv2 = (wq * V_g**2).reshape(Q)
    K = B1.T @ (B1 * Wv2[:, None]) + B2.T @ (B2 * Wv2[:, None])

    Phi = (Rv[:, None, :] * Av[None, :, :]).reshape(Q, N)
    WV = (wq * V_g).reshape(Q)
    rhs_int = -(Phi.T @ WV)
    phi_mass_V2 = Phi.T @ Wv2

    # boundary rule: same angular nodes at s = 1
    w_b = np.sqrt(drho**2 + warp(space, rho)[0] ** 2)
    snb, csb = warp(space, rho)
    Vb = csb if space.K != 0 else np.ones_like(rho)
    dA = wt_q * w_b * (snb if n == 3 else 1.0)
    Rv1 = radial.tables(np.array([1.0]))[0][0]
    rhs_bnd_unit = Rv1[rid] * (Aval.T @ (dA * Vb))[aid]

    int_V = float(np.sum(WV))
    int_V2 = float(np.sum(Wv2))
    return _Discretization(
        domain=domain, angular=angular, radial=radial, rid=rid, aid=aid,
        const_dof=const_dof, matrix=K, rhs_interior=rhs_int,
        rhs_boundary_unit=rhs_bnd_unit, int_V=int_V, int_V2=int_V2,
        phi_mass_V2=phi_mass_V2,
    )


# ---------------------------------------------------------------------------
# The discrete solution as a scalar field (spectral interpolant of w, then
# f = w V through the field algebra).
# ---------------------------------------------------------------------------


class GalerkinScalarField(ScalarField):
    """w(s, t) = sum coef psi_k(s) tau_a(t) pulled back to (r, angle) through
    s = r / rho(angle); derivatives by the chain rule with exact rho', rho''."""

    def __init__(self, disc, coef):
        super().__init__(disc.domain.space)
        self.disc = disc
        self.coef = np.asarray(coef, dtype=float)
        self._rho = radial_function(disc.domain)
        # coefficient matrix over (radial column, angular column); evaluation
        # is then two small matrix products instead of a DOF gather
        ncols_r = 2 * disc.radial.degree + 1
        C = np.zeros((ncols_r, disc.angular.count))
        C[disc.rid, disc.aid] = self.coef
        self._C = C

    def _basis_partials(self, r, ang):
        d = self.disc
        r = np.asarray(r, dtype=float)
        t = np.asarray(ang, dtype=float)[..., 0]
        rho, drho, d2rho = self._rho.derivatives(t)
        s = r / rho
        Rval, Rd1, Rd2 = d.radial.tables(s)
        Aval, Ad1, Ad2 = d.angular.tables(t)
        C = self._C

        def combine(Rt, At):
            return np.sum((Rt @ C) * At, axis=-1)

        W = combine(Rval, Aval)
        W_s = combine(Rd1, Aval)
        W_t = combine(Rval, Ad1)
        W_ss = combine(Rd2, Aval)
        W_st = combine(Rd1, Ad1)
        W_tt = combine(Rval, Ad2)
        return s, rho, drho, d2rho, W, W_s, W_t, W_ss, W_st, W_tt

    def _chart_partials(self, r, ang):
        s, rho, drho, d2rho, W, W_s, W_t, W_ss, W_st, W_tt = self._basis_partials(r, ang)
        a = drho / rho
        w_r = W_s / rho
        w_t = W_t - s * a * W_s
        w_rr = W_ss / rho**2
        w_rt = (W_st - s * a * W_ss - a * W_s) / rho
        w_tt = W_tt - 2.0 * s * a * W_st + (s * a) ** 2 * W_ss + s * (2.0 * a**2 - d2rho / rho) * W_s
        return W, w_r, w_t, w_rr, w_rt, w_tt

    def value(self, r, ang):
        return self._basis_partials(r, ang)[4]

    def gradient(self, r, ang):
        space = self.space
        n = space.dim
        W, w_r, w_t, *_ = self._chart_partials(r, ang)
        sn, _ = warp(space, r)
        g = np.zeros(np.shape(r) + (n,))
        g[..., 0] = w_r
        g[..., 1] = w_t / sn
        return g

    def hessian(self, r, ang):
        space = self.space
        n = space.dim
        W, w_r, w_t, w_rr, w_rt, w_tt = self._chart_partials(r, ang)
        sn, cs = warp(space, r)
        cot = cs / sn
        H = np.zeros(np.shape(r) + (n, n))
        H[..., 0, 0] = w_rr
        H[..., 0, 1] = H[..., 1, 0] = (w_rt - cot * w_t) / sn
        H[..., 1, 1] = w_tt / sn**2 + cot * w_r
        if n == 3:
            phi = np.asarray(ang, dtype=float)[..., 0]
            H[..., 2, 2] = cot * w_r + w_t / (np.tan(phi) * sn**2)
        return H


@dataclass
class NeumannSolution:
    """Solution record: interpolants, compatibility constant, gauge, residuals."""

    w_field: GalerkinScalarField
    f_field: ScalarField
    c: float
    gauge: str
    residuals: dict
    w_grid: np.ndarray
    domain: object


def solve_weighted_neumann(domain, c_value=None, modes=None, radial_degree=None):
    """Solve the weighted Neumann problem on the domain.

    ``c_value`` overrides the compatibility constant (the solver then raises
    CompatibilityError if the discrete system is inconsistent beyond 1e-10
    relative, which is the Fredholm-alternative check).
    """
    space = domain.space
    if space.K == 1 and domain.max_radius() >= EQUATOR - 1e-2:
        raise GeometryDomainError("hemisphere domains within 1e-2 of the equator are rejected")

    wi = weighted_integrals(domain)
    c = wi.weighted_volume / wi.weighted_area if c_value is None else float(c_value)

    disc = assemble_system(domain, modes, radial_degree)
    b = disc.rhs_interior + c * disc.rhs_boundary_unit

    compat = abs(b[disc.const_dof]) / disc.int_V
    if compat > 1e-10:
        raise CompatibilityError(
            f"discrete compatibility residual {compat:.3e} exceeds 1e-10; "
            "the Neumann data is inconsistent with the supplied constant",
            residual=compat,
        )

    K = 0.5 * (disc.matrix + disc.matrix.T)
    keep = np.arange(b.size) != disc.const_dof
    try:
        sol = scipy.linalg.solve(K[np.ix_(keep, keep)], b[keep], assume_a="pos")
    except scipy.linalg.LinAlgError:
        sol = scipy.linalg.solve(K[np.ix_(keep, keep)], b[keep], assume_a="sym")
    coef = np.zeros(b.size)
    coef[keep] = sol

    # gauge: int_Omega w V^2 = 0, imposed through the internal mass vector
    coef[disc.const_dof] = -float(disc.phi_mass_V2 @ coef) / disc.int_V2

    w_field = GalerkinScalarField(disc, coef)
    f_field = ProductField(w_field, PotentialField(space))

    r, ang, _ = interior_nodes(domain)
    angb = ang[None, :, :] + np.zeros(r.shape + (ang.shape[-1],))
    w_grid = w_field.value(r, angb)

    sol = NeumannSolution(
        w_field=w_field,
        f_field=f_field,
        c=c,
        gauge="int_Omega w V^2 dOmega = 0",
        residuals={"compatibility": float(compat)},
        w_grid=w_grid,
        domain=domain,
    )
    pde_res, bc_res = verify_transform(sol, domain)
    sol.residuals["pde_interior"] = pde_res
    sol.residuals["bc_boundary"] = bc_res
    return sol


# ---------------------------------------------------------------------------
# Independent residual verification.
# ---------------------------------------------------------------------------


def _fd_laplacian(space, values_fn, r, ang, step):
    """Laplace-Beltrami by geodesic second differences of values only."""
    n = space.dim
    f0 = values_fn(r, ang)
    out = np.zeros(np.shape(r))
    eye = np.eye(n)
    for i in range(n):
        d = np.broadcast_to(eye[i], np.shape(r) + (n,))
        rp, ap, _ = _flow(space, r, ang, d, np.full(np.shape(r), step))
        rm, am, _ = _flow(space, r, ang, d, np.full(np.shape(r), -step))
        out = out + (values_fn(rp, ap) - 2.0 * f0 + values_fn(rm, am)) / step**2
    return out


def verify_transform(sol, domain):
    """Max-norm residuals of lap f + K n f = 1 (interior) and
    V f_nu - V_nu f = c V (boundary), with stencils independent of the
    solver's discretization: geodesic differences of f-values with step
    0.5 * max_rho / resolution."""
    space = domain.space
    n = space.dim
    f = sol.f_field
    rho_max = domain.max_radius()
    h = 0.5 * rho_max / domain.resolution

    r, ang, _ = interior_nodes(domain, radial_order=24)
    angb = ang[None, :, :] + np.zeros(r.shape + (ang.shape[-1],))
    rho_of = radial_function(domain).value(ang[:, 0])
    inside = r <= (rho_of[None, :] - 2.5 * h)
    rs = r[inside]
    angs = angb[inside]

    lap = _fd_laplacian(space, f.value, rs, angs, h)
    pde_res = float(np.max(np.abs(lap + space.K * n * f.value(rs, angs) - 1.0)))

    bg = boundary_geometry(domain)
    rb, angb2 = bg.positions()
    f0 = f.value(rb, angb2)
    r1, a1, _ = _flow(space, rb, angb2, bg.normal, np.full(rb.shape, -h))
    r2, a2, _ = _flow(space, rb, angb2, bg.normal, np.full(rb.shape, -2.0 * h))
    f_nu = (3.0 * f0 - 4.0 * f.value(r1, a1) + f.value(r2, a2)) / (2.0 * h)
    bc_res = float(np.max(np.abs(bg.V * f_nu - bg.V_nu * f0 - sol.c * bg.V)))
    return pde_res, bc_res


# ---------------------------------------------------------------------------
# End-to-end reproduction of the inequality chain.
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class ProofChainRecord:
    lhs: float                 # (n-1)/n int_Omega V
    rhs: float                 # (n-1) c^2 int_M H V
    slack: float               # lhs - rhs, >= 0 under the hypothesis
    hessian_deficit: float     # first discarded nonnegative term
    boundary_quadratic: float  # second discarded nonnegative term
    accounting_residual: float  # |slack - (deficit + quadratic)|
    convexity_margin: float
    hypothesis_ok: bool
    c: float
    solver_residuals: dict


def minkowski_via_reilly(domain, solution=None):
    """Solve the Neumann problem, push the solution through the identity and
    the boundary regrouping, and return the inequality chain bookkeeping.

    When the weighted-convexity margin is negative the chain is not asserted;
    the computation still runs with hypothesis_ok = False.
    """
    from .domains import convexity_margin

    space = domain.space
    n = space.dim
    bg = boundary_geometry(domain)
    margin = convexity_margin(bg)
    sol = solution if solution is not None else solve_weighted_neumann(domain)

    wi = weighted_integrals(domain, bg)
    lhs = (n - 1) / n * wi.weighted_volume
    rhs = (n - 1) * sol.c**2 * wi.weighted_mean_curv
    slack = lhs - rhs

    deficit = hessian_deficit(domain, sol.f_field, PotentialField(space), space.K)
    _, quad = grouped_boundary_form(domain, sol.f_field, sol.c, bg=bg)
    accounting = abs(slack - (deficit + quad))

    return ProofChainRecord(
        lhs=lhs, rhs=rhs, slack=slack,
        hessian_deficit=deficit, boundary_quadratic=quad,
        accounting_residual=accounting,
        convexity_margin=margin,
        hypothesis_ok=bool(margin >= -1e-9),
        c=sol.c,
        solver_residuals=dict(sol.residuals),
    )
