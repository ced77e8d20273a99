"""Term-by-term evaluation of the generalized Reilly identity.

For a weight field V, a scalar field f, a free real parameter K (which may
differ from the ambient curvature) and writing z = f|_M, u = normal
derivative of f, the identity groups as

  lhs_bulk = int_Omega V ((lap f + K n f)^2 - |hess f + K f g|^2)
  b_main   = int_M V (2 u Dz + (n-1) H u^2 + h(Dz~, Dz~) + (2n-2) K u z)
  b_vnu    = int_M V_nu (|Dz~|^2 - (n-1) K z^2)
  t_ricci  = int_Omega (hess V - lap V g - (2n-2) K V g + V Ric)(grad f, grad f)
  t_zero   = (n-1) int_Omega (K lap V + n K^2 V) f^2

with residual = lhs_bulk - (b_main + b_vnu + t_ricci + t_zero) -> 0 under
refinement for any smooth f and positive weight.  Ric is hard-wired to the
space-form value (n-1) K_ambient g.  Boundary derivatives of traces are
intrinsic (see traces.py).
"""

from dataclasses import dataclass

import numpy as np

from .domains import boundary_geometry
from .errors import PreconditionError
from .quadrature import interior_nodes
from .traces import BoundaryCalculus


@dataclass(frozen=True)
class ReillyBreakdown:
    lhs_bulk: float
    b_main: float
    b_vnu: float
    t_ricci: float
    t_zero: float

    @property
    def residual(self):
        return self.lhs_bulk - (self.b_main + self.b_vnu + self.t_ricci + self.t_zero)


def _interior_fields(domain, f, weight, K_param):
    space = domain.space
    n = space.dim
    r, ang, wq = interior_nodes(domain)
    angb = ang[None, :, :] + np.zeros(r.shape + (ang.shape[-1],))
    eye = np.eye(n)

    fv = f.value(r, angb)
    gf = f.gradient(r, angb)
    Hf = f.hessian(r, angb)
    lap_f = np.trace(Hf, axis1=-2, axis2=-1)

    wv = weight.value(r, angb)
    if np.any(wv <= 0):
        raise PreconditionError("positive-weight", "weight must be positive on Omega")
    Hw = weight.hessian(r, angb)
    lap_w = np.trace(Hw, axis1=-2, axis2=-1)

    K = float(K_param)
    A = lap_f + K * n * fv
    Dev = Hf + K * fv[..., None, None] * eye
    lhs = np.sum(wq * wv * (A**2 - np.sum(Dev**2, axis=(-2, -1))))

    diag_coeff = -lap_w - (2 * n - 2) * K * wv + (n - 1) * space.K * wv
    Tq = Hw + diag_coeff[..., None, None] * eye
    t_ricci = np.sum(wq * np.einsum("...ij,...i,...j->...", Tq, gf, gf))
    t_zero = (n - 1) * np.sum(wq * (K * lap_w + n * K**2 * wv) * fv**2)
    return float(lhs), float(t_ricci), float(t_zero)


def boundary_traces(bg, f):
    """Traces of f on the sampled boundary: z, normal derivative u, and the
    intrinsic tangential derivative dz/ds (meridian component)."""
    r, ang = bg.positions()
    z = f.value(r, ang)
    grad = f.gradient(r, ang)
    u = np.sum(grad * bg.normal, axis=-1)
    calc = BoundaryCalculus(bg)
    z_s = calc.tangential_derivative(z)
    return z, u, z_s, calc


def _boundary_terms(bg, f, weight, K_param):
    n = bg.space.dim
    K = float(K_param)
    z, u, z_s, calc = boundary_traces(bg, f)
    lap_z = calc.laplacian(z)

    r, ang = bg.positions()
    wv = weight.value(r, ang)
    w_nu = np.sum(weight.gradient(r, ang) * bg.normal, axis=-1)

    h_grad = bg.h[:, 0, 0] * z_s**2  # tangential gradient is meridian-only
    grad2 = z_s**2
    integrand_main = wv * (2.0 * u * lap_z + (n - 1) * bg.H * u**2 + h_grad + (2 * n - 2) * K * u * z)
    integrand_vnu = w_nu * (grad2 - (n - 1) * K * z**2)
    b_main = np.sum(bg.area_weight * integrand_main)
    b_vnu = np.sum(bg.area_weight * integrand_vnu)
    return float(b_main), float(b_vnu)


def reilly_breakdown(domain, f, weight, K_param, bg=None):
    """Evaluate the five groups of the identity with the module quadratures."""
    if bg is None:
        bg = boundary_geometry(domain)
    lhs, t_ricci, t_zero = _interior_fields(domain, f, weight, K_param)
    b_main, b_vnu = _boundary_terms(bg, f, weight, K_param)
    return ReillyBreakdown(lhs, b_main, b_vnu, t_ricci, t_zero)


def hessian_deficit(domain, f, weight, K_param):
    """int_Omega V (|hess f + K f g|^2 - (lap f + K n f)^2 / n) >= 0
    (Cauchy-Schwarz on the trace); the first discarded term of the
    inequality chain when lap f + K n f = 1."""
    space = domain.space
    n = space.dim
    r, ang, wq = interior_nodes(domain)
    angb = ang[None, :, :] + np.zeros(r.shape + (ang.shape[-1],))
    eye = np.eye(n)
    fv = f.value(r, angb)
    Hf = f.hessian(r, angb)
    A = np.trace(Hf, axis1=-2, axis2=-1) + K_param * n * fv
    Dev = Hf + K_param * fv[..., None, None] * eye
    wv = weight.value(r, angb)
    return float(np.sum(wq * wv * (np.sum(Dev**2, axis=(-2, -1)) - A**2 / n)))


def tracefree_deficit_norm(domain, f, K_param):
    """L2 norm of the trace-free part of hess f + K f g (zero exactly on the
    equality configurations)."""
    space = domain.space
    n = space.dim
    r, ang, wq = interior_nodes(domain)
    angb = ang[None, :, :] + np.zeros(r.shape + (ang.shape[-1],))
    eye = np.eye(n)
    fv = f.value(r, angb)
    Hf = f.hessian(r, angb)
    Dev = Hf + K_param * fv[..., None, None] * eye
    tr = np.trace(Dev, axis1=-2, axis2=-1)
    TF = Dev - (tr / n)[..., None, None] * eye
    return float(np.sqrt(np.sum(wq * np.sum(TF**2, axis=(-2, -1)))))


def boundary_identity_residuals(domain, bg=None):
    """Max-norm residuals of the two boundary identities of the model
    potential: tangential (grad of V_nu vs h * grad V) and the boundary
    Laplacian law Delta V = -(n-1) K V - (n-1) H V_nu."""
    if bg is None:
        bg = boundary_geometry(domain)
    space = bg.space
    n = space.dim
    calc = BoundaryCalculus(bg)
    dV = calc.tangential_derivative(bg.V)
    dVnu = calc.tangential_derivative(bg.V_nu)
    r_ss = float(np.max(np.abs(dVnu - bg.h[:, 0, 0] * dV)))
    lapV = calc.laplacian(bg.V)
    r_rr = float(np.max(np.abs(lapV + (n - 1) * space.K * bg.V + (n - 1) * bg.H * bg.V_nu)))
    return r_ss, r_rr


def grouped_boundary_form(domain, f, c, bg=None, bc_tol=1e-8):
    """Regrouped boundary terms for a field satisfying the weighted Neumann
    boundary condition V f_nu - V_nu f = c V:

    returns (mean_curv_term, quadratic_form) with
      mean_curv_term = (n-1) c^2 int_M H V
      quadratic_form = int_M [ V h(w~, w~) - V_nu |w~|^2 ],  w~ = Dz - z DV / V.

    Their sum equals b_main + b_vnu of the breakdown (with weight = V and
    K = ambient) to quadrature tolerance; the quadratic form is nonnegative
    under the weighted-convexity hypothesis.
    """
    if bg is None:
        bg = boundary_geometry(domain)
    n = bg.space.dim
    z, u, z_s, calc = boundary_traces(bg, f)
    bc_res = np.max(np.abs(bg.V * u - bg.V_nu * z - c * bg.V))
    if bc_res > bc_tol * max(1.0, float(np.max(np.abs(c * bg.V)))):
        raise PreconditionError(
            "neumann-boundary-condition",
            f"boundary condition residual {bc_res:.3e} exceeds tolerance {bc_tol:.1e}",
        )
    V_s = calc.tangential_derivative(bg.V)
    wvec = z_s - z * V_s / bg.V
    quad = np.sum(bg.area_weight * (bg.V * bg.h[:, 0, 0] * wvec**2 - bg.V_nu * wvec**2))
    mean_curv = (n - 1) * c**2 * np.sum(bg.area_weight * bg.H * bg.V)
    return float(mean_curv), float(quad)
