"""Distorted Fourier transform relative to H(omega).

Forward:  f_plus(xi) = <F, sigma3 Psi_plus(., xi)>,  f_minus(xi) = <F, sigma3 Psi_minus(., xi)>.
Inverse:  F = int f_plus Psi_plus dxi - int f_minus Psi_minus dxi.

Both directions use the separable form of the symbols m1, m2, so each
transform reduces to a handful of ordinary Fourier sums between the uniform
x grid and the offset xi grid. Those sums go through scipy's chirp-z
transform, which handles arbitrary start and spacing in O((N + M) log).
"""

from __future__ import annotations

import csv
from dataclasses import dataclass, field
from functools import cached_property

import numpy as np
from scipy.signal import CZT

from .errors import BoundaryMassError, GridMismatchError
from .grids import FrequencyGrid, SpatialGrid
from .operator import (SIGMA2, apply_pauli, fd_derivative, generalized_eigenfunctions, inner,
                       symbol_x_factor_derivatives, symbol_x_factors,
                       symbol_xi_factors, threshold_resonances)

INV_ROOT_2PI = 1.0 / np.sqrt(2.0 * np.pi)


@dataclass
class DistortedSpectrum:
    xi: np.ndarray
    f_plus: np.ndarray
    f_minus: np.ndarray
    omega_ref: float

    def copy_with(self, f_plus, f_minus) -> "DistortedSpectrum":
        return DistortedSpectrum(self.xi, f_plus, f_minus, self.omega_ref)

    def conjugation_residual(self) -> float:
        """max |f_minus(xi) + r(xi) conj f_plus(-xi)|, r = (|xi| - i s)^2 / (|xi| + i s)^2."""
        s = np.sqrt(self.omega_ref)
        a = np.abs(self.xi)
        r = (a - 1j * s) ** 2 / (a + 1j * s) ** 2
        return float(np.max(np.abs(self.f_minus + r * np.conj(self.f_plus[::-1]))))

    def to_csv(self, path) -> None:
        with open(path, "w", newline="") as fh:
            w = csv.writer(fh)
            w.writerow(["xi", "re_f_plus", "im_f_plus", "re_f_minus", "im_f_minus"])
            for row in zip(self.xi, self.f_plus.real, self.f_plus.imag,
                           self.f_minus.real, self.f_minus.imag):
                w.writerow([f"{v:.17g}" for v in row])

    @classmethod
    def from_csv(cls, path, omega_ref: float) -> "DistortedSpectrum":
        data = np.loadtxt(path, delimiter=",", skiprows=1, ndmin=2)
        return cls(data[:, 0], data[:, 1] + 1j * data[:, 2], data[:, 3] + 1j * data[:, 4], omega_ref)


@dataclass
class DiscreteCoefficients:
    d1: complex
    d2: complex
    d3: complex = 0j
    d4: complex = 0j


class _FourierSums:
    """sum_j g(x_j) e^{-i x_j xi_k} h and sum_k G(xi_k) e^{+i x_j xi_k} dxi via chirp-z."""

    def __init__(self, grid: SpatialGrid, freq: FrequencyGrid):
        self.grid, self.freq = grid, freq
        x0, h, n = grid.x[0], grid.spacing, grid.points
        q0, dq, m = freq.xi[0], freq.spacing, freq.points
        # scipy's CZT evaluates sum_n v_n a^{-n} w^{nk}
        self._fwd = CZT(n, m, w=np.exp(-1j * h * dq), a=np.exp(1j * h * q0))
        self._fwd_post = h * np.exp(-1j * x0 * freq.xi)
        self._inv = CZT(m, n, w=np.exp(1j * h * dq), a=1.0)
        self._inv_pre = np.exp(1j * x0 * freq.xi)
        self._inv_post = dq * np.exp(1j * (grid.x - x0) * q0)

    def forward(self, g: np.ndarray) -> np.ndarray:
        return self._fwd(g, axis=-1) * self._fwd_post

    def inverse(self, gq: np.ndarray) -> np.ndarray:
        return self._inv(gq * self._inv_pre, axis=-1) * self._inv_post


@dataclass
class DistortedTransform:
    """Forward/inverse transform for fixed omega on a pair of grids."""

    omega: float
    grid: SpatialGrid = field(default_factory=SpatialGrid)
    freq: FrequencyGrid = field(default_factory=FrequencyGrid)
    boundary_tol: float = 1e-10

    def __post_init__(self):
        self._sums = _FourierSums(self.grid, self.freq)

    @cached_property
    def x_factors(self) -> np.ndarray:
        return symbol_x_factors(self.omega, self.grid.x)

    @cached_property
    def xi_factors(self) -> np.ndarray:
        return symbol_xi_factors(self.omega, self.freq.xi)

    @cached_property
    def kernel(self):
        return generalized_eigenfunctions(self.omega, self.grid.x)

    # ------------------------------------------------------------ core

    def check_boundary(self, field_: np.ndarray) -> None:
        edge = max(np.max(np.abs(field_[..., :4])), np.max(np.abs(field_[..., -4:])))
        if edge > self.boundary_tol:
            raise BoundaryMassError(
                f"field is {edge:.3e} at |x| = L, above the boundary tolerance {self.boundary_tol:.1e}")

    def _component_sums(self, f: np.ndarray) -> np.ndarray:
        """Fourier sums of f times each x factor; shape (4, M)."""
        return self._sums.forward(self.x_factors * f)

    def forward(self, field_: np.ndarray, check: bool = True) -> DistortedSpectrum:
        field_ = np.asarray(field_, dtype=complex)
        self.grid.check(field_)
        if check:
            self.check_boundary(field_)
        b = np.conj(self.xi_factors)
        s1 = self._component_sums(field_[0])
        s2 = self._component_sums(field_[1])
        # conj m1 against f1 minus conj m2 against f2, and the swapped pairing
        plus = (np.sum(b[:3] * s1[:3], axis=0) - b[3] * s2[3]) * INV_ROOT_2PI
        minus = (b[3] * s1[3] - np.sum(b[:3] * s2[:3], axis=0)) * INV_ROOT_2PI
        return DistortedSpectrum(self.freq.xi, plus, minus, self.omega)

    def _synthesize(self, weights: np.ndarray) -> np.ndarray:
        """sum_k a_k(x) * int b_k(xi) w(xi) e^{i x xi} dxi / sqrt(2 pi) for each factor."""
        return self._sums.inverse(self.xi_factors * weights) * self.x_factors * INV_ROOT_2PI

    def inverse(self, spec: DistortedSpectrum) -> np.ndarray:
        if spec.f_plus.shape[-1] != self.freq.points:
            raise GridMismatchError("spectrum does not live on this frequency grid")
        p = self._synthesize(spec.f_plus)
        m = self._synthesize(spec.f_minus)
        top = np.sum(p[:3], axis=0) - m[3]
        bottom = p[3] - np.sum(m[:3], axis=0)
        return np.stack([top, bottom])

    # ------------------------------------------------------------ projections

    def project_discrete(self, field_: np.ndarray):
        """Even-sector coefficients (d1, d2) and P_e U = U - d1 Y1 - d2 Y2."""
        y1, y2, _, _ = self.kernel
        c = -2.0 / np.sqrt(self.omega)
        d1 = inner(field_, apply_pauli(SIGMA2, y2), self.grid) / c
        d2 = inner(field_, apply_pauli(SIGMA2, y1), self.grid) / c
        return DiscreteCoefficients(d1, d2), field_ - d1 * y1 - d2 * y2

    def project_discrete_full(self, field_: np.ndarray):
        """All four coefficients, for completeness checks on fields with odd parts."""
        y1, y2, y3, y4 = self.kernel
        c_even = -2.0 / np.sqrt(self.omega)
        c_odd = 4.0 * np.sqrt(self.omega)
        d1 = inner(field_, apply_pauli(SIGMA2, y2), self.grid) / c_even
        d2 = inner(field_, apply_pauli(SIGMA2, y1), self.grid) / c_even
        d3 = inner(field_, apply_pauli(SIGMA2, y4), self.grid) / c_odd
        d4 = inner(field_, apply_pauli(SIGMA2, y3), self.grid) / np.conj(c_odd)
        coeffs = DiscreteCoefficients(d1, d2, d3, d4)
        return coeffs, field_ - d1 * y1 - d2 * y2 - d3 * y3 - d4 * y4

    # ------------------------------------------------------------ dynamics

    def propagate(self, spec: DistortedSpectrum, t: float) -> DistortedSpectrum:
        """Spectral side of e^{itH}: f_plus e^{it(xi^2 + w)}, f_minus e^{-it(xi^2 + w)}."""
        return propagate(spec, t)

    def evolve_field(self, field_: np.ndarray, t: float, check: bool = True) -> np.ndarray:
        """e^{-itH(omega)} P_e F, the solution of i dV/dt = H V starting from P_e F."""
        return self.inverse(propagate(self.forward(field_, check=check), -t))

    def resonant_part(self, field_: np.ndarray, t: float) -> np.ndarray:
        """Leading t^{-1/2} threshold term of evolve_field at fixed x."""
        plus, minus = threshold_resonances(self.omega, self.grid.x)
        s3 = np.array([1.0, -1.0])[:, None]
        c_plus = np.exp(-0.25j * np.pi) / np.sqrt(4 * np.pi) * inner(field_, s3 * plus, self.grid)
        c_minus = -np.exp(0.25j * np.pi) / np.sqrt(4 * np.pi) * inner(field_, s3 * minus, self.grid)
        return (c_plus * np.exp(-1j * t * self.omega) * plus
                + c_minus * np.exp(1j * t * self.omega) * minus) / np.sqrt(t)

    # ------------------------------------------------------------ auxiliary actions

    def psi2_pairing(self, f: np.ndarray) -> np.ndarray:
        """<f, Psi_2(., xi)> on the frequency grid."""
        s = self._component_sums(np.asarray(f, dtype=complex))
        return np.conj(self.xi_factors[3]) * s[3] * INV_ROOT_2PI

    def sigma3_corrections(self, field_: np.ndarray):
        """L_{f2} and L_{f1}: F+[s3 F] = F+[F] + L_{f2}, F-[s3 F] = -F-[F] + L_{f1}."""
        return 2 * self.psi2_pairing(field_[1]), 2 * self.psi2_pairing(field_[0])

    def dx_corrections(self, field_: np.ndarray):
        """K_plus, K_minus with F+-[dF/dx] = i xi F+-[F] + K+-.

        K_plus = -(2 pi)^{-1/2} (<f1, e^{ix xi} dm1/dx> - <f2, e^{ix xi} dm2/dx>),
        K_minus = -(2 pi)^{-1/2} (<f1, e^{ix xi} dm2/dx> - <f2, e^{ix xi} dm1/dx>).
        The overall minus sign comes from moving the derivative off F.
        """
        da = symbol_x_factor_derivatives(self.omega, self.grid.x)
        b = np.conj(self.xi_factors)
        s1 = self._sums.forward(da * field_[0])
        s2 = self._sums.forward(da * field_[1])
        kp = np.sum(b[:3] * s1[:3], axis=0) - b[3] * s2[3]
        km = b[3] * s1[3] - np.sum(b[:3] * s2[:3], axis=0)
        return -kp * INV_ROOT_2PI, -km * INV_ROOT_2PI

    def pairing(self, f_field: np.ndarray, g_field: np.ndarray) -> complex:
        """<P_e F, G> from the spectral side: int f+ conj<G, Psi+> - int f- conj<G, Psi->."""
        sf = self.forward(f_field)
        s3 = np.array([1.0, -1.0])[:, None]
        sg = self.forward(s3 * g_field)
        return complex(self.freq.integrate(sf.f_plus * np.conj(sg.f_plus)
                                           - sf.f_minus * np.conj(sg.f_minus)))


def propagate(spec: DistortedSpectrum, t: float) -> DistortedSpectrum:
    phase = np.exp(1j * t * (spec.xi**2 + spec.omega_ref))
    return spec.copy_with(spec.f_plus * phase, spec.f_minus * np.conj(phase))


# ---------------------------------------------------------------- X-norm ingredients


def xi_derivative(values: np.ndarray, dxi: float) -> np.ndarray:
    """Fourth-order finite difference along the last axis (one-sided at the ends)."""
    return fd_derivative(values, dxi, order=1, accuracy=4)


def x_norm_diagnostics(spec: DistortedSpectrum) -> tuple[float, float]:
    """(sup |f+|, ||d f+/d xi||_{L2}) on the frequency grid."""
    if spec.xi.size < 2:
        return float(np.max(np.abs(spec.f_plus), initial=0.0)), 0.0
    dxi = spec.xi[1] - spec.xi[0]
    sup = float(np.max(np.abs(spec.f_plus)))
    deriv = xi_derivative(spec.f_plus, dxi)
    return sup, float(np.sqrt(dxi * np.sum(np.abs(deriv) ** 2)))
