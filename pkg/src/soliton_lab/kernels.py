"""Fourier transforms of sech^l and sech^l * tanh.

Convention: FT[f](xi) = (2 pi)^{-1/2} * integral of e^{-i x xi} f(x) dx.

Odd powers are polynomials in xi^2 times sqrt(pi/2) sech(pi xi / 2), even
powers are polynomials times sqrt(pi/2) xi cosech(pi xi / 2). Multiplying by
tanh turns FT[sech^l] into (xi / (l i)) FT[sech^l] because
d/dx sech^l = -l sech^l tanh.
"""

from __future__ import annotations

from dataclasses import dataclass
from math import factorial

import numpy as np

from .errors import DomainTooSmallError, UnsupportedKernelError

MAX_CLOSED_FORM_POWER = 8
ROOT_HALF_PI = np.sqrt(np.pi / 2.0)

# z / sinh(z) = sum c_k z^(2k) for small z
_X_CSCH_SERIES = (1.0, -1.0 / 6.0, 7.0 / 360.0, -31.0 / 15120.0)


@dataclass(frozen=True)
class SechKernelSpec:
    power: int
    with_tanh: bool = False

    def __post_init__(self):
        if not 1 <= self.power <= MAX_CLOSED_FORM_POWER:
            raise UnsupportedKernelError(
                f"closed forms cover powers 1..{MAX_CLOSED_FORM_POWER}, got {self.power}")

    def __call__(self, x):
        x = np.asarray(x, dtype=float)
        out = _sech(x) ** self.power
        return out * np.tanh(x) if self.with_tanh else out

    @property
    def label(self) -> str:
        return f"sech^{self.power}" + ("*tanh" if self.with_tanh else "")


def _sech(x):
    ax = np.abs(x)
    e = np.exp(-ax)
    return 2.0 * e / (1.0 + e * e)


def sech_scaled(z, scale: float = 1.0):
    """sech(pi z / (2 scale)), overflow-free."""
    return _sech(0.5 * np.pi * np.asarray(z, dtype=float) / scale)


def x_cosech(z, scale: float = 1.0):
    """z * cosech(pi z / (2 scale)), smooth and even, equal to 2 scale / pi at z = 0.

    For |z| < 1e-4 * scale a four-term series replaces the quotient so the
    removable singularity costs no digits.
    """
    z = np.asarray(z, dtype=float)
    a = 0.5 * np.pi / scale
    u = a * np.abs(z)
    small = np.abs(z) < 1e-4 * scale
    with np.errstate(divide="ignore", invalid="ignore", over="ignore"):
        e = np.exp(-u)
        direct = np.abs(z) * 2.0 * e / (-np.expm1(-2.0 * u))
    u2 = u * u
    series = sum(c * u2**k for k, c in enumerate(_X_CSCH_SERIES)) / a
    return np.where(small, series, direct)


def _rising_polynomial(xi, power):
    """Product over the recursion ladder from the base case up to `power`."""
    xi2 = np.asarray(xi, dtype=float) ** 2
    out = np.ones_like(xi2)
    start = 1 if power % 2 else 2
    for ell in range(start, power - 1, 2):
        out = out * (ell * ell + xi2)
    return out / factorial(power - 1)


def ft_sech_power(spec: SechKernelSpec, xi):
    """Closed-form FT of sech^l (real) or sech^l tanh (purely imaginary)."""
    xi = np.asarray(xi, dtype=float)
    ell = spec.power
    if ell % 2:
        base = ROOT_HALF_PI * sech_scaled(xi)
    else:
        base = ROOT_HALF_PI * x_cosech(xi)
    value = _rising_polynomial(xi, ell) * base
    if spec.with_tanh:
        return value * xi / (1j * ell)
    return value


def ft_sech_oracle(spec: SechKernelSpec, xi, half_length: float = 40.0,
                   points: int = 1 << 14, tail_tol: float = 1e-15):
    """Brute-force trapezoid value of (2 pi)^{-1/2} int e^{-i x xi} kernel(x) dx."""
    tail = float(np.cosh(half_length) ** -spec.power) if half_length < 700 else 0.0
    if tail > tail_tol:
        raise DomainTooSmallError(
            f"{spec.label} is {tail:.3e} at x = {half_length}, above {tail_tol:.1e}")
    if points < 1 << 14:
        raise DomainTooSmallError(f"oracle needs at least 2^14 points, got {points}")
    h = 2.0 * half_length / points
    x = -half_length + h * np.arange(points)
    kernel = np.cosh(x) ** (-float(spec.power))
    if spec.with_tanh:
        kernel = kernel * np.tanh(x)
    scalar = np.ndim(xi) == 0
    xi = np.atleast_1d(np.asarray(xi, dtype=float))
    phase = np.exp(-1j * np.outer(xi, x))
    values = h * (phase @ kernel) / np.sqrt(2.0 * np.pi)
    return values[0] if scalar else values


def all_specs():
    return [SechKernelSpec(p, t) for p in range(1, MAX_CLOSED_FORM_POWER + 1)
            for t in (False, True)]
