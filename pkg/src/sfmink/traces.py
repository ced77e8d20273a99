"""Intrinsic differentiation of boundary traces.

Boundary quantities (restrictions of fields, potential traces) are sampled
on the boundary parameter grid; tangential derivatives and the intrinsic
Laplacian are computed spectrally from those samples - FFT on the periodic
theta grid for n=2, a discrete Legendre series on the Gauss nodes in
x = cos(phi) for axisymmetric n=3 - never from ambient extensions.
"""

import numpy as np


def fourier_derivative(vals):
    """d/dtheta of 2pi-periodic samples on an equispaced grid (spectral)."""
    vals = np.asarray(vals, dtype=float)
    N = vals.shape[-1]
    vhat = np.fft.rfft(vals)
    k = np.arange(vhat.shape[-1])
    vhat = vhat * (1j * k)
    if N % 2 == 0:
        vhat[..., -1] = 0.0  # Nyquist mode has no well-defined odd derivative
    return np.fft.irfft(vhat, n=N)


class LegendreGrid:
    """Discrete Legendre series on Gauss-Legendre nodes in x = cos(phi)."""

    def __init__(self, x, wts):
        self.x = np.asarray(x, dtype=float)
        self.wts = np.asarray(wts, dtype=float)
        N = self.x.size
        self.vander = np.polynomial.legendre.legvander(self.x, N - 1)  # (N, N)
        ell = np.arange(N)
        self.fwd = (self.vander * self.wts[:, None]).T * ((2 * ell + 1) / 2.0)[:, None]

    def coefficients(self, vals):
        return self.fwd @ np.asarray(vals, dtype=float)

    def derivative(self, vals):
        """d/dx of the sampled function, evaluated back at the nodes."""
        c = self.coefficients(vals)
        dc = np.polynomial.legendre.legder(c)
        return np.polynomial.legendre.legval(self.x, dc)


class BoundaryCalculus:
    """Tangential gradient and intrinsic Laplacian on a sampled boundary."""

    def __init__(self, bg):
        self.bg = bg
        self.n = bg.space.dim
        if self.n == 3:
            # boundary_parameters used GL in x = cos(phi) reversed to increasing
            # phi; recover the x-grid with its standard weights (sum = 2).
            x = np.cos(bg.ang)
            wts = bg.param_weight / (2.0 * np.pi)
            self._leg = LegendreGrid(x, wts)
            from .spaceform import warp

            self._sn, _ = warp(bg.space, bg.rho)

    def tangential_derivative(self, vals):
        """Arclength derivative along the meridian/tangent direction."""
        if self.n == 2:
            return fourier_derivative(vals) / self.bg.w
        # d/ds = (1/w) d/dphi = (-sin(phi)/w) d/dx
        sphi = np.sin(self.bg.ang)
        return -sphi * self._leg.derivative(vals) / self.bg.w

    def laplacian(self, vals):
        """Intrinsic boundary Laplacian of the sampled trace."""
        bg = self.bg
        if self.n == 2:
            return fourier_derivative(fourier_derivative(vals) / bg.w) / bg.w
        # axisymmetric surface of revolution:
        # Delta z = (1/(w sn)) d/dx [ sn (1 - x^2) / w * dz/dx ]
        x = np.cos(bg.ang)
        zx = self._leg.derivative(vals)
        flux = self._sn * (1.0 - x**2) / bg.w * zx
        return self._leg.derivative(flux) / (bg.w * self._sn)
