import dataclasses
import math

import numpy as np
import pytest

from _oracles import radial_neumann_oracle
from sfmink.domains import ball_domain, boundary_geometry, star_domain
from sfmink.errors import CompatibilityError, GeometryDomainError
from sfmink.fields import PotentialField, RadiusSquaredField
from sfmink.neumann import (
    assemble_system,
    minkowski_via_reilly,
    solve_weighted_neumann,
    verify_transform,
)
from sfmink.quadrature import integrate_field, weighted_integrals
from sfmink.reilly import grouped_boundary_form, reilly_breakdown, tracefree_deficit_norm

TANH1_OVER_2 = 0.3807970779778824


def radial_samples(R, count=160):
    return np.linspace(R / count, R * (1 - 1e-9), count)


def analytic_residuals(domain, f, c):
    """Transform residuals straight from the field's derivative evaluators
    (exact gauge invariance, unlike the stencil-based verify_transform)."""
    from sfmink.quadrature import interior_nodes

    space = domain.space
    r, ang, _ = interior_nodes(domain)
    angb = ang[None, :, :] + np.zeros(r.shape + (ang.shape[-1],))
    pde = np.max(np.abs(f.laplacian(r, angb) + space.K * space.dim * f.value(r, angb) - 1.0))
    bg = boundary_geometry(domain)
    rb, ab = bg.positions()
    u = np.sum(f.gradient(rb, ab) * bg.normal, axis=-1)
    bc = np.max(np.abs(bg.V * u - bg.V_nu * f.value(rb, ab) - c * bg.V))
    return float(pde), float(bc)


@pytest.mark.parametrize("K,R,c_closed", [(-1, 1.0, TANH1_OVER_2), (1, math.pi / 4, 0.5)])
def test_centered_ball_matches_radial_oracle(K, R, c_closed):
    from sfmink.spaceform import SpaceForm

    space = SpaceForm(K, 2)
    dom = ball_domain(space, R, resolution=128)
    sol = solve_weighted_neumann(dom)
    assert sol.c == pytest.approx(c_closed, abs=1e-12)
    rs = radial_samples(R)
    ang = np.zeros((rs.size, 1))
    f_num = sol.f_field.value(rs, ang)
    f0 = sol.f_field.value(np.array([1e-9]), np.array([[0.0]]))[0]
    f_ode = radial_neumann_oracle(K, 2, R, f0, rs)
    assert np.max(np.abs(f_num - f_ode)) < 1e-6


def test_euclidean_ball_closed_form(E2):
    # c = Vol/Area = R/n and f = r^2/(2n) + const
    dom = ball_domain(E2, 1.0, resolution=96)
    sol = solve_weighted_neumann(dom)
    assert sol.c == pytest.approx(0.5, abs=1e-13)
    rs = radial_samples(1.0)
    ang = np.zeros((rs.size, 1))
    f_num = sol.f_field.value(rs, ang)
    shift = f_num[0] - rs[0] ** 2 / 4.0
    assert np.max(np.abs(f_num - (rs**2 / 4.0 + shift))) < 1e-10
    # normal derivative equals c on the boundary (the unweighted problem)
    bg = boundary_geometry(dom)
    rb, ab = bg.positions()
    u = np.sum(sol.f_field.gradient(rb, ab) * bg.normal, axis=-1)
    assert np.max(np.abs(u - sol.c)) < 1e-10


def test_n3_ball_oracle(H3):
    dom = ball_domain(H3, 0.8, resolution=64)
    sol = solve_weighted_neumann(dom)
    assert sol.c == pytest.approx(math.tanh(0.8) / 3.0, abs=1e-12)
    rs = radial_samples(0.8, 120)
    ang = np.column_stack([np.full(rs.size, 1.1), np.zeros(rs.size)])
    f_num = sol.f_field.value(rs, ang)
    f0 = sol.f_field.value(np.array([1e-9]), np.array([[1.1, 0.0]]))[0]
    f_ode = radial_neumann_oracle(-1, 3, 0.8, f0, rs)
    assert np.max(np.abs(f_num - f_ode)) < 1e-6


def test_gauge_fixed(H2):
    dom = ball_domain(H2, 1.0, resolution=96)
    sol = solve_weighted_neumann(dom)
    gauge = integrate_field(dom, sol.w_field * PotentialField(H2).squared())
    assert abs(gauge) < 1e-10
    assert sol.gauge == "int_Omega w V^2 dOmega = 0"


def test_gauge_invariance_and_kernel_detection(H2):
    # the additive-alpha-V kernel leaves both residuals unchanged; non-kernel
    # perturbations are detected at O(1)
    dom = ball_domain(H2, 1.0, resolution=96)
    sol = solve_weighted_neumann(dom)
    pde0, bc0 = analytic_residuals(dom, sol.f_field, sol.c)
    shifted = sol.f_field + 0.37 * PotentialField(H2)
    pde1, bc1 = analytic_residuals(dom, shifted, sol.c)
    assert abs(pde1 - pde0) < 1e-10
    assert abs(bc1 - bc0) < 1e-10
    # sn(r)cos(theta) solves the bulk equation but breaks the boundary condition
    from sfmink.fields import AmbientCoordinateField

    lin = sol.f_field + 0.37 * AmbientCoordinateField(H2, [1.0, 0.0])
    pde2, bc2 = analytic_residuals(dom, lin, sol.c)
    assert abs(pde2 - pde0) < 1e-9
    assert bc2 > 0.1
    # r^2 breaks the bulk equation
    rsq = sol.f_field + 0.37 * RadiusSquaredField(H2)
    pde3, _ = analytic_residuals(dom, rsq, sol.c)
    assert pde3 > 0.1


def test_verify_transform_resolution_order(H2):
    res_pairs = []
    for res in (128, 256):
        sol = solve_weighted_neumann(ball_domain(H2, 1.0, resolution=res))
        res_pairs.append(sol.residuals)
    assert res_pairs[0]["pde_interior"] < 1e-5
    assert res_pairs[0]["bc_boundary"] < 1e-5
    assert res_pairs[1]["pde_interior"] < 2.5e-6
    assert res_pairs[1]["bc_boundary"] < 2.5e-6
    for key in ("pde_interior", "bc_boundary"):
        assert math.log2(res_pairs[0][key] / res_pairs[1][key]) >= 1.9


def test_compatibility_fredholm_condition(H2):
    dom = ball_domain(H2, 1.0, resolution=96)
    sol = solve_weighted_neumann(dom)  # exact c: residual ~ machine
    assert sol.residuals["compatibility"] < 1e-12
    with pytest.raises(CompatibilityError) as err:
        solve_weighted_neumann(dom, c_value=sol.c * (1 + 1e-3))
    assert 1e-4 < err.value.residual < 1e-2


def test_assembled_matrix_symmetric_with_1d_kernel(H2):
    disc = assemble_system(ball_domain(H2, 1.0, resolution=48))
    K = disc.matrix
    scale = np.max(np.abs(K))
    assert np.max(np.abs(K - K.T)) < 1e-12 * scale
    sv = np.linalg.svd(K, compute_uv=False)
    assert sv[-1] < 1e-12 * sv[0]      # one exact null direction
    assert sv[-2] > 1e-6 * sv[0]       # and only one
    # the kernel is the constant function's coefficient direction
    assert np.max(np.abs(K[:, disc.const_dof])) == 0.0


def test_degenerate_inputs_rejected(S2):
    with pytest.raises(GeometryDomainError):
        # reaches within 1e-2 of the equator: rejected by the solver
        solve_weighted_neumann(ball_domain(S2, math.pi / 2 - 0.005, resolution=48))


def test_hessian_deficit_and_equality_case(H2):
    # Cauchy-Schwarz bound for the solved field, and the ball equality case:
    # the trace-free part of hess f + K f g vanishes
    dom = ball_domain(H2, 1.0, resolution=96)
    sol = solve_weighted_neumann(dom)
    V = PotentialField(H2)
    bd = reilly_breakdown(dom, sol.f_field, V, H2.K)
    wv = weighted_integrals(dom).weighted_volume
    assert bd.lhs_bulk <= 0.5 * wv + 1e-9  # (n-1)/n = 1/2
    assert tracefree_deficit_norm(dom, sol.f_field, H2.K) < 1e-6


def test_holder_step_on_star_graph(H2):
    dom = star_domain(H2, fourier=[1.0, 0, 0, 0, 0, 0.05], resolution=96)
    sol = solve_weighted_neumann(dom)
    V = PotentialField(H2)
    bd = reilly_breakdown(dom, sol.f_field, V, H2.K)
    wv = weighted_integrals(dom).weighted_volume
    assert bd.lhs_bulk <= 0.5 * wv + 1e-9


def test_grouped_form_matches_boundary_groups(H2):
    # regrouping identity: mean-curvature term + quadratic form equals the
    # identity's boundary groups for the solved field
    for dom in (
        ball_domain(H2, 0.7, 0.5, resolution=96),
        star_domain(H2, fourier=[1.0, 0, 0, 0, 0, 0.05], resolution=96),
    ):
        sol = solve_weighted_neumann(dom)
        V = PotentialField(H2)
        bd = reilly_breakdown(dom, sol.f_field, V, H2.K)
        mct, quad = grouped_boundary_form(dom, sol.f_field, sol.c)
        assert quad >= -1e-9
        assert abs((mct + quad) - (bd.b_main + bd.b_vnu)) < 1e-7 * max(1.0, abs(bd.b_main))


def test_grouped_form_ball_equality(H2):
    # centered ball: z proportional to V on the boundary, so the quadratic
    # form vanishes and the mean-curvature term carries everything
    dom = ball_domain(H2, 1.0, resolution=96)
    sol = solve_weighted_neumann(dom)
    mct, quad = grouped_boundary_form(dom, sol.f_field, sol.c)
    wi = weighted_integrals(dom)
    assert abs(quad) < 1e-12
    assert mct == pytest.approx(sol.c**2 * wi.weighted_mean_curv, rel=1e-10)


def test_via_reilly_ball_equality_and_star_positivity(H2):
    rec = minkowski_via_reilly(ball_domain(H2, 1.0, resolution=96))
    assert rec.hypothesis_ok
    assert abs(rec.slack) < 1e-10
    assert rec.accounting_residual < 1e-10
    rec2 = minkowski_via_reilly(star_domain(H2, fourier=[1.0, 0, 0, 0, 0, 0.05], resolution=96))
    assert rec2.slack > 1e-4
    assert rec2.hessian_deficit > 0 and rec2.boundary_quadratic > 0
    assert rec2.accounting_residual < 1e-8


def test_via_reilly_gauge_independence(H2):
    # the chain bookkeeping is invariant under the alpha-V gauge freedom
    dom = ball_domain(H2, 0.7, 0.5, resolution=96)
    sol = solve_weighted_neumann(dom)
    rec = minkowski_via_reilly(dom, solution=sol)
    shifted = dataclasses.replace(sol, f_field=sol.f_field + 0.2 * PotentialField(H2))
    rec2 = minkowski_via_reilly(dom, solution=shifted)
    assert rec2.slack == pytest.approx(rec.slack, abs=1e-12)
    assert rec2.hessian_deficit == pytest.approx(rec.hessian_deficit, abs=1e-9)
    assert rec2.boundary_quadratic == pytest.approx(rec.boundary_quadratic, abs=1e-9)
