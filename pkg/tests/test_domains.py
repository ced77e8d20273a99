import math

import numpy as np
import pytest

from sfmink.domains import (
    Domain,
    ball_domain,
    boundary_geometry,
    convexity_margin,
    horoconvexity_margin,
    principal_curvatures,
    star_domain,
)
from sfmink.errors import GeometryDomainError, UnsupportedSpaceError

# frozen closed-form oracle values
COTH1 = 1.3130352854993312
SINH1 = 1.1752011936438014
COSH1 = 1.5430806348152437
TANH1 = 0.7615941559557649
COTH10_MINUS_1 = 4.1223073843355e-09


def test_centered_ball_h2(H2):
    bg = boundary_geometry(ball_domain(H2, 1.0, resolution=64))
    assert np.allclose(bg.H, COTH1, atol=1e-12)
    assert np.allclose(bg.V, COSH1, atol=1e-14)
    assert np.allclose(bg.V_nu, SINH1, atol=1e-14)
    assert np.allclose(bg.h[:, 0, 0], COTH1, atol=1e-12)


def test_centered_ball_s2(S2):
    bg = boundary_geometry(ball_domain(S2, math.pi / 4, resolution=64))
    s22 = math.sqrt(2) / 2
    assert np.allclose(bg.H, 1.0, atol=1e-13)
    assert np.allclose(bg.V, s22, atol=1e-15)
    assert np.allclose(bg.V_nu, -s22, atol=1e-15)


def test_centered_ball_euclidean(E2):
    bg = boundary_geometry(ball_domain(E2, 2.0, resolution=32))
    assert np.allclose(bg.H, 0.5, atol=1e-15)
    assert np.allclose(bg.V, 1.0) and np.allclose(bg.V_nu, 0.0)
    assert convexity_margin(bg) == pytest.approx(0.5, abs=1e-14)


def test_normal_frame_orthonormality(H2, H3):
    for dom in (
        ball_domain(H2, 0.7, 0.5, resolution=64),
        star_domain(H2, fourier=[1.0, 0.02, 0.0, 0.0, 0.05], resolution=64),
        star_domain(H3, cosine=[1.0, 0.0, 0.06], resolution=48),
    ):
        bg = boundary_geometry(dom)
        assert np.max(np.abs(np.linalg.norm(bg.normal, axis=1) - 1.0)) < 1e-10
        for j in range(bg.space.dim - 1):
            dots = np.sum(bg.normal * bg.tangent_frame[:, j, :], axis=1)
            assert np.max(np.abs(dots)) < 1e-10
        # H = trace(h)/(n-1) exactly
        tr = np.trace(bg.h, axis1=1, axis2=2)
        assert np.array_equal(bg.H, tr / (bg.space.dim - 1))


def test_star_equals_ball(H2):
    bgs = boundary_geometry(star_domain(H2, fourier=[1.0], resolution=64))
    bgb = boundary_geometry(ball_domain(H2, 1.0, resolution=64))
    for a, b in ((bgs.H, bgb.H), (bgs.V, bgb.V), (bgs.V_nu, bgb.V_nu), (bgs.area_weight, bgb.area_weight)):
        assert np.max(np.abs(a - b)) < 1e-8


def test_offcenter_ball_constant_H(H2, H3):
    for dom, R in ((ball_domain(H2, 0.7, 0.5, resolution=128), 0.7),
                   (ball_domain(H3, 0.7, 0.3, resolution=64), 0.7)):
        bg = boundary_geometry(dom)
        coth = math.cosh(R) / math.sinh(R)
        assert np.max(np.abs(bg.H - coth)) < 1e-10
        # while the potential trace varies along the boundary
        assert np.max(bg.V) - np.min(bg.V) > 1e-2


def test_convexity_margin_ball(H2):
    bg = boundary_geometry(ball_domain(H2, 1.0, resolution=64))
    assert convexity_margin(bg) == pytest.approx(COTH1 - TANH1, abs=1e-12)


def test_horoconvexity_margins(H2):
    assert horoconvexity_margin(
        boundary_geometry(ball_domain(H2, 1.0, resolution=32))
    ) == pytest.approx(COTH1 - 1.0, abs=1e-12)
    assert horoconvexity_margin(
        boundary_geometry(ball_domain(H2, 10.0, resolution=32))
    ) == pytest.approx(COTH10_MINUS_1, rel=1e-6)
    big = boundary_geometry(star_domain(H2, fourier=[1.0, 0.0, 0.0, 0.3], resolution=64))
    assert horoconvexity_margin(big) < 0


def test_horoconvexity_requires_hyperbolic(E2):
    with pytest.raises(UnsupportedSpaceError):
        horoconvexity_margin(boundary_geometry(ball_domain(E2, 1.0, resolution=32)))


def test_star_margin_converges_under_doubling(H2):
    vals = []
    for res in (64, 128):
        bg = boundary_geometry(star_domain(H2, fourier=[1.0, 0, 0, 0, 0, 0.05], resolution=res))
        vals.append(convexity_margin(bg))
    assert vals[0] > 0 and vals[1] > 0
    assert abs(vals[0] - vals[1]) < 1e-3  # three digits settled


def test_hyperbolic_implication_horoconvex_implies_condition(H2):
    # horoconvexity implies the weighted-convexity condition, because the
    # potential satisfies V_nu < V in hyperbolic space
    rng = np.random.default_rng(31)
    for _ in range(8):
        eps = rng.uniform(0.0, 0.03)
        phase = rng.uniform(0, 2 * math.pi)
        four = [1.0, eps * math.cos(phase), eps * math.sin(phase), 0.0, eps / 2]
        bg = boundary_geometry(star_domain(H2, fourier=four, resolution=96))
        assert np.max(bg.V_nu - bg.V) < 0
        if horoconvexity_margin(bg) >= 0:
            assert convexity_margin(bg) >= -1e-9


def test_spherical_implication_convex_implies_condition(S2):
    rng = np.random.default_rng(32)
    for _ in range(8):
        eps = rng.uniform(0.0, 0.04)
        four = [0.6, 0.0, 0.0, eps]
        bg = boundary_geometry(star_domain(S2, fourier=four, resolution=96))
        assert np.max(bg.V_nu) <= 1e-9
        if np.min(principal_curvatures(bg)) > 0:
            assert convexity_margin(bg) >= np.min(principal_curvatures(bg)) - 1e-9


def test_resolution_doubling_second_order(H2):
    # aggregate geometric quantities settle at least quadratically
    areas = []
    for res in (32, 64, 128):
        bg = boundary_geometry(star_domain(H2, fourier=[1.0, 0, 0, 0, 0, 0.05], resolution=res))
        areas.append(float(np.sum(bg.area_weight)))
    e1, e2 = abs(areas[0] - areas[2]), abs(areas[1] - areas[2])
    assert e2 < max(e1 / 4.0, 1e-13)


def test_domain_invariant_violations(H2, S2):
    with pytest.raises(GeometryDomainError):
        ball_domain(H2, -1.0)
    with pytest.raises(GeometryDomainError):
        ball_domain(H2, 0.5, 0.6)  # base point outside
    with pytest.raises(GeometryDomainError):
        ball_domain(S2, 1.0, 0.8)  # leaves the hemisphere
    with pytest.raises(GeometryDomainError):
        star_domain(H2, fourier=[0.1, 0, 0, 0.2])  # radial function dips below 1e-3
    with pytest.raises(GeometryDomainError):
        Domain(H2, None, 4)  # resolution too small


def test_n3_profile_spline_matches_cosine(H3):
    coeffs = [1.0, 0.0, 0.05]
    phi = np.linspace(0, math.pi, 80)
    rho = np.cos(phi[:, None] * np.arange(3)) @ np.array(coeffs)
    dom_spline = star_domain(H3, profile=list(zip(phi.tolist(), rho.tolist())), resolution=48)
    dom_cos = star_domain(H3, cosine=coeffs, resolution=48)
    bg1 = boundary_geometry(dom_spline)
    bg2 = boundary_geometry(dom_cos)
    assert np.max(np.abs(bg1.H - bg2.H)) < 2e-4  # spline vs exact derivatives
    assert np.max(np.abs(bg1.V - bg2.V)) < 1e-6


def test_n3_ball_values(H3):
    bg = boundary_geometry(ball_domain(H3, 0.8, resolution=48))
    coth = math.cosh(0.8) / math.sinh(0.8)
    kappas = principal_curvatures(bg)
    assert np.max(np.abs(kappas - coth)) < 1e-12
    assert np.allclose(bg.V, math.cosh(0.8))
    assert np.allclose(bg.V_nu, math.sinh(0.8))
    # area sum equals the closed form omega_2 sinh^2 R
    area = float(np.sum(bg.area_weight))
    assert area == pytest.approx(4 * math.pi * math.sinh(0.8) ** 2, rel=1e-13)


def test_n3_profile_needs_enough_samples(H3):
    from sfmink.errors import PreconditionError

    with pytest.raises(PreconditionError):
        star_domain(H3, profile=[(0.0, 1.0), (math.pi / 2, 1.0), (math.pi, 1.0)], resolution=48)
