"""Independent oracles used by the tests.

Everything here computes expected values by a route disjoint from the
package internals under test: scipy ODE integration for the radial
Neumann solutions, adaptive quadrature for integrals, FFT curve
differentiation for geodesic curvature of sampled curves.
"""

import math

import numpy as np
from scipy.integrate import quad, solve_ivp


def cotlike(K, r):
    if K == -1:
        return math.cosh(r) / math.sinh(r)
    if K == 0:
        return 1.0 / r
    return math.cos(r) / math.sin(r)


def radial_neumann_oracle(K, n, R, f0, r_eval):
    """Integrate f'' + (n-1) cot_K(r) f' + K n f = 1 from a series start at
    the origin with f(0) = f0, f'(0) = 0; returns f at the requested radii.

    Every regular solution has the expansion f = f0 + (1 - K n f0) r^2/(2n)
    + O(r^4), which seeds the integrator away from the coordinate
    singularity.
    """

    def rhs(r, y):
        f, fp = y
        return [fp, 1.0 - K * n * f - (n - 1) * cotlike(K, r) * fp]

    eps = 1e-8
    a2 = (1.0 - K * n * f0) / (2 * n)
    y0 = [f0 + a2 * eps**2, 2 * a2 * eps]
    sol = solve_ivp(rhs, [eps, R], y0, rtol=1e-12, atol=1e-14, dense_output=True)
    assert sol.success
    return np.array([sol.sol(float(r))[0] for r in np.atleast_1d(r_eval)])


def ball_weighted_volume_quad(K, n, R):
    """omega_{n-1} * int_0^R cs(r) sn(r)^(n-1) dr by adaptive quadrature."""
    from sfmink.quadrature import sphere_area

    def integrand(r):
        if K == -1:
            return math.cosh(r) * math.sinh(r) ** (n - 1)
        if K == 0:
            return r ** (n - 1)
        return math.cos(r) * math.sin(r) ** (n - 1)

    val, _ = quad(integrand, 0.0, R, epsabs=1e-14, epsrel=1e-13)
    return sphere_area(n - 1) * val


def curve_curvature_from_samples(K, r, theta):
    """Geodesic curvature (outward convention) of a closed curve sampled at
    equispaced parameter values, via FFT derivatives of (r, theta - p).

    theta must wind once (theta(p) - p periodic).  Used as the independent
    check of the Riccati-evolved principal curvature.
    """
    N = r.size
    p = 2.0 * math.pi * np.arange(N) / N

    def dfft(vals):
        vhat = np.fft.rfft(vals)
        k = np.arange(vhat.size)
        vhat = vhat * (1j * k)
        if N % 2 == 0:
            vhat[-1] = 0.0
        return np.fft.irfft(vhat, n=N)

    rp, rpp = dfft(r), dfft(dfft(r))
    tper = theta - p
    tper = np.mod(tper + math.pi, 2 * math.pi) - math.pi
    tp = 1.0 + dfft(tper)
    tpp = dfft(dfft(tper))

    if K == -1:
        sn, cs = np.sinh(r), np.cosh(r)
    elif K == 0:
        sn, cs = r, np.ones_like(r)
    else:
        sn, cs = np.sin(r), np.cos(r)

    a_r = rpp - sn * cs * tp**2
    a_t = tpp + 2.0 * (cs / sn) * rp * tp
    w = np.sqrt(rp**2 + (sn * tp) ** 2)
    return sn * (rp * a_t - tp * a_r) / w**3
