import math

import numpy as np
import pytest

from sfmink.domains import Domain, ball_domain, boundary_geometry, star_domain
from sfmink.errors import PreconditionError
from sfmink.fields import (
    AmbientCoordinateField,
    ConstantField,
    PotentialField,
    RadiusSquaredField,
    random_field,
    random_weight,
)
from sfmink.reilly import (
    boundary_identity_residuals,
    grouped_boundary_form,
    hessian_deficit,
    reilly_breakdown,
)
from sfmink.spaceform import SpaceForm


def rel_residual(bd):
    return abs(bd.residual) / max(abs(bd.lhs_bulk), 1.0)


def test_kernel_field_everything_vanishes(H2):
    # f = V, weight = V, K = ambient: both sides of the identity collapse
    dom = ball_domain(H2, 1.0, resolution=64)
    V = PotentialField(H2)
    bd = reilly_breakdown(dom, V, V, -1.0)
    assert bd.lhs_bulk == 0.0
    assert abs(bd.t_ricci) < 1e-12 and abs(bd.t_zero) < 1e-12
    assert rel_residual(bd) < 1e-13


def test_linear_field_is_kernel(H2):
    dom = ball_domain(H2, 1.0, resolution=64)
    lin = AmbientCoordinateField(H2, [1.0, 0.0])
    bd = reilly_breakdown(dom, lin, PotentialField(H2), -1.0)
    assert abs(bd.lhs_bulk) < 1e-13
    assert rel_residual(bd) < 1e-12


def test_classical_reilly_euclidean(E2):
    # weight 1, K = 0 on a Euclidean ball reduces to the classical formula
    dom = ball_domain(E2, 1.0, resolution=128)
    bd = reilly_breakdown(dom, RadiusSquaredField(E2), ConstantField(E2, 1.0), 0.0)
    assert bd.b_vnu == 0.0 and bd.t_ricci == 0.0 and bd.t_zero == 0.0
    assert rel_residual(bd) < 1e-8


def test_specialization_unweighted_terms_vanish_identically(E2):
    # with weight = 1 and K = 0 the extra groups vanish for any field
    dom = star_domain(E2, fourier=[1.0, 0, 0, 0.1], resolution=64)
    rng = np.random.default_rng(8)
    f = random_field(E2, rng)
    bd = reilly_breakdown(dom, f, ConstantField(E2, 1.0), 0.0)
    assert bd.b_vnu == 0.0 and bd.t_ricci == 0.0 and bd.t_zero == 0.0
    assert rel_residual(bd) < 1e-10


def test_weight_generality_exercises_extra_terms(H2):
    # a weight violating the Hessian law makes t_ricci/t_zero nonzero while
    # the identity still closes
    dom = star_domain(H2, fourier=[1.0, 0, 0, 0.07], resolution=96)
    rng = np.random.default_rng(9)
    f = random_field(H2, rng)
    w = random_weight(H2, rng)
    bd = reilly_breakdown(dom, f, w, -1.0)
    assert abs(bd.t_ricci) > 1e-6 or abs(bd.t_zero) > 1e-6
    assert rel_residual(bd) < 1e-10


@pytest.mark.parametrize("K_param", [-2.0, -1.0, 0.0, 0.5, 1.0])
def test_k_param_free_of_ambient(K_param, S2):
    dom = star_domain(S2, fourier=[0.6, 0, 0, 0.05], resolution=96)
    rng = np.random.default_rng(10)
    f = random_field(S2, rng)
    w = random_weight(S2, rng)
    bd = reilly_breakdown(dom, f, w, K_param)
    assert rel_residual(bd) < 1e-10


def test_positive_weight_precondition(H2):
    dom = ball_domain(H2, 1.0, resolution=32)
    with pytest.raises(PreconditionError):
        reilly_breakdown(dom, PotentialField(H2), ConstantField(H2, -1.0), -1.0)


def test_residual_refinement_order(H2):
    # a sharp field leaves the 64-sample rule unconverged; the residual must
    # then drop at least quadratically under angular refinement
    rng = np.random.default_rng(77)
    f = random_field(H2, rng, sharpness=14.0)
    w = random_weight(H2, rng, sharpness=14.0)
    rels = []
    for res in (64, 128):
        dom = ball_domain(H2, 0.7, 0.5, resolution=res)
        rels.append(rel_residual(reilly_breakdown(dom, f, w, 0.5)))
    if rels[0] > 1e-11:
        assert math.log2(rels[0] / max(rels[1], 1e-16)) >= 2.0


def test_boundary_identities_centered_ball(H2, S2):
    # all traces constant on centered spheres: residuals at round-off
    for space, R in ((H2, 1.0), (S2, math.pi / 4)):
        r_ss, r_rr = boundary_identity_residuals(ball_domain(space, R, resolution=64))
        assert r_ss < 1e-12 and r_rr < 1e-11


def test_boundary_identities_offcenter_and_star(H2, S2):
    for dom in (
        ball_domain(H2, 0.7, 0.5, resolution=256),
        star_domain(S2, fourier=[0.6, 0, 0, 0.05], resolution=256),
    ):
        r_ss, r_rr = boundary_identity_residuals(dom)
        assert r_ss < 1e-6 and r_rr < 1e-6


def test_grouped_boundary_form_requires_bc(H2):
    dom = ball_domain(H2, 1.0, resolution=64)
    with pytest.raises(PreconditionError):
        grouped_boundary_form(dom, RadiusSquaredField(H2), 0.3)


def test_hessian_deficit_nonnegative_for_any_field(H2):
    dom = star_domain(H2, fourier=[1.0, 0, 0, 0.07], resolution=64)
    rng = np.random.default_rng(12)
    for _ in range(5):
        f = random_field(H2, rng)
        d = hessian_deficit(dom, f, PotentialField(H2), H2.K)
        assert d >= -1e-12


def test_identity_n3_axisymmetric(H3):
    dom = star_domain(H3, cosine=[0.9, 0.0, 0.05], resolution=48)
    rng = np.random.default_rng(14)
    f = random_field(H3, rng)
    w = random_weight(H3, rng)
    bd = reilly_breakdown(dom, f, w, 0.5)
    assert rel_residual(bd) < 1e-9
    ball = ball_domain(H3, 0.8, resolution=48)
    bd2 = reilly_breakdown(ball, PotentialField(H3), PotentialField(H3), -1.0)
    assert bd2.lhs_bulk == 0.0 and rel_residual(bd2) < 1e-11
