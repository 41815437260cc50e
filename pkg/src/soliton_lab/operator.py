"""Linearized operator around the cubic NLS ground state.

Vector fields are complex arrays of shape (2, N). The operator is

    H(omega) = diag(-d^2 + omega, d^2 - omega) + [[-2 phi^2, -phi^2], [phi^2, 2 phi^2]]

with phi = sqrt(2 omega) sech(sqrt(omega) x).
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import BranchCutError, ConfigError
from .grids import SpatialGrid

SIGMA1 = np.array([[0, 1], [1, 0]], dtype=complex)
SIGMA2 = np.array([[0, -1j], [1j, 0]], dtype=complex)
SIGMA3 = np.array([[1, 0], [0, -1]], dtype=complex)

FD_ORDER = 8


@dataclass(frozen=True)
class SolitonFrame:
    omega: float
    gamma: float = 0.0

    def __post_init__(self):
        if not self.omega > 0:
            raise ConfigError(f"omega must be positive, got {self.omega}")


def _sech(x):
    e = np.exp(-np.abs(x))
    return 2.0 * e / (1.0 + e * e)


def sech(x):
    return _sech(np.asarray(x, dtype=float))


# ---------------------------------------------------------------- soliton


def soliton_profile(omega: float, x) -> np.ndarray:
    s = np.sqrt(omega)
    return np.sqrt(2.0) * s * sech(s * np.asarray(x))


def soliton_domega(omega: float, x) -> np.ndarray:
    """d/d(omega) of the ground state, from differentiating sqrt(2w) sech(sqrt(w) x)."""
    s = np.sqrt(omega)
    y = s * np.asarray(x)
    sh = sech(y)
    return np.sqrt(2.0) / (2.0 * s) * (sh - y * sh * np.tanh(y))


def soliton_domega2(omega: float, x) -> np.ndarray:
    s = np.sqrt(omega)
    y = s * np.asarray(x)
    sh, th = sech(y), np.tanh(y)
    return np.sqrt(2.0) / (4.0 * s**3) * (-sh - y * sh * th - y * y * sh * (sh * sh - th * th))


def soliton_dx(omega: float, x) -> np.ndarray:
    s = np.sqrt(omega)
    y = s * np.asarray(x)
    sh = sech(y)
    return -np.sqrt(2.0) * omega * sh * np.tanh(y)


# ---------------------------------------------------------------- pairings


def inner(u: np.ndarray, v: np.ndarray, grid: SpatialGrid) -> complex:
    """<U, V> = int (u1 conj v1 + u2 conj v2) dx, conjugate-linear in V."""
    return complex(grid.integrate(np.sum(u * np.conj(v), axis=0)))


def apply_pauli(sigma: np.ndarray, field: np.ndarray) -> np.ndarray:
    return np.einsum("ij,j...->i...", sigma, field)


def j_invariant(u: np.ndarray) -> np.ndarray:
    return np.stack([u, np.conj(u)])


# ---------------------------------------------------------------- derivatives


def spectral_second_derivative(f: np.ndarray, grid: SpatialGrid) -> np.ndarray:
    k = grid.wavenumbers
    return np.fft.ifft(-(k * k) * np.fft.fft(f, axis=-1), axis=-1)


def spectral_derivative(f: np.ndarray, grid: SpatialGrid) -> np.ndarray:
    k = grid.wavenumbers
    return np.fft.ifft(1j * k * np.fft.fft(f, axis=-1), axis=-1)


def fd_weights(offsets, order: int) -> np.ndarray:
    """Weights w with sum w_j f(x + o_j h) ~ h^order * f^(order)(x)."""
    offsets = np.asarray(offsets, dtype=float)
    n = offsets.size
    vander = np.vander(offsets, n, increasing=True).T
    rhs = np.zeros(n)
    rhs[order] = float(np.prod(np.arange(1, order + 1)))
    return np.linalg.solve(vander, rhs)


def fd_derivative(f: np.ndarray, h: float, order: int = 2, accuracy: int = FD_ORDER) -> np.ndarray:
    """Finite-difference derivative along the last axis.

    Central stencils in the bulk, one-sided stencils of the same width at the
    two ends, so non-decaying fields are handled without wrap-around.
    """
    f = np.asarray(f)
    n = f.shape[-1]
    half = (accuracy + order - 1) // 2
    width = 2 * half + 1
    out = np.zeros(f.shape, dtype=np.result_type(f, float))
    central = fd_weights(np.arange(-half, half + 1), order)
    for j, w in enumerate(central):
        out[..., half:n - half] += w * f[..., j:n - width + 1 + j]
    for i in list(range(half)) + list(range(n - half, n)):
        start = min(max(i - half, 0), n - width)
        stencil = np.arange(start, start + width)
        w = fd_weights(stencil - i, order)
        out[..., i] = np.tensordot(f[..., stencil], w, axes=([-1], [0]))
    return out / h**order


# ---------------------------------------------------------------- operator


def potential_matrix(omega: float, x) -> np.ndarray:
    p2 = soliton_profile(omega, x) ** 2
    return np.array([[-2 * p2, -p2], [p2, 2 * p2]])


def apply_H(omega: float, field: np.ndarray, grid: SpatialGrid, decaying: bool = True) -> np.ndarray:
    """H(omega) applied to a (2, N) field.

    Decaying fields use the Fourier second derivative. Non-decaying ones use
    finite differences of order FD_ORDER with one-sided boundary stencils.
    """
    grid.check(field)
    if decaying:
        d2 = spectral_second_derivative(field, grid)
    else:
        d2 = fd_derivative(field, grid.spacing, 2)
    p2 = soliton_profile(omega, grid.x) ** 2
    u, v = field
    top = -d2[0] + omega * u - 2 * p2 * u - p2 * v
    bottom = d2[1] - omega * v + p2 * u + 2 * p2 * v
    return np.stack([top, bottom])


def generalized_eigenfunctions(omega: float, x):
    """Y1..Y4 spanning the generalized kernel; Y1, Y2 even, Y3, Y4 odd."""
    x = np.asarray(x, dtype=float)
    phi = soliton_profile(omega, x)
    dphi = soliton_domega(omega, x)
    phix = soliton_dx(omega, x)
    y1 = np.stack([1j * phi, -1j * phi])
    y2 = np.stack([dphi, dphi]).astype(complex)
    y3 = np.stack([phix, phix]).astype(complex)
    y4 = np.stack([1j * x * phi, -1j * x * phi])
    return y1, y2, y3, y4


def kernel_derivatives(omega: float, x):
    """d/d(omega) of Y1 and Y2."""
    dphi = soliton_domega(omega, x)
    d2phi = soliton_domega2(omega, x)
    return np.stack([1j * dphi, -1j * dphi]), np.stack([d2phi, d2phi]).astype(complex)


def threshold_resonances(omega: float, x):
    y = np.sqrt(omega) * np.asarray(x, dtype=float)
    plus = np.stack([np.tanh(y) ** 2, -sech(y) ** 2]).astype(complex)
    return plus, plus[::-1].copy()


# ---------------------------------------------------------------- Jost solutions


def branch_sqrt(w):
    """Square root analytic off [0, inf) with sqrt(-1) = i."""
    return 1j * np.sqrt(-np.asarray(w, dtype=complex))


@dataclass(frozen=True)
class JostQuadruple:
    """f1, f3 (decaying at +inf), g2, g4 (decaying at -inf) and their x-derivatives."""

    z: complex
    f1: np.ndarray
    f3: np.ndarray
    g2: np.ndarray
    g4: np.ndarray
    df1: np.ndarray
    df3: np.ndarray
    dg2: np.ndarray
    dg4: np.ndarray

    def wronskian(self, a: str, b: str) -> np.ndarray:
        """W[a, b] = a' . b - a . b' with the real (bilinear) dot product."""
        fa, fb = getattr(self, a), getattr(self, b)
        da, db = getattr(self, "d" + a), getattr(self, "d" + b)
        return np.sum(da * fb - fa * db, axis=0)


def _jost_pair(k, x, sign_tanh, sign_exp, top_is_square):
    """Solutions of the shape ((k + s*tanh)^2, -sech^2) e^{+-k x} and derivatives."""
    th = np.tanh(x)
    s2 = sech(x) ** 2
    e = np.exp(sign_exp * k * x)
    q = k + sign_tanh * th
    square = q * q * e
    dsquare = (2 * q * sign_tanh * s2 + sign_exp * k * q * q) * e
    small = -s2 * e
    dsmall = (2 * s2 * th - sign_exp * k * s2) * e
    if top_is_square:
        return np.stack([square, small]), np.stack([dsquare, dsmall])
    return np.stack([small, square]), np.stack([dsmall, dsquare])


def jost_solutions(z: complex, x, boundary: bool = False) -> JostQuadruple:
    """Closed-form Jost solutions of (H(1) - z) f = 0.

    `z` must stay off the real half-line [0, inf) where the branch is cut,
    unless `boundary` asks for the limit from the upper half plane.
    """
    z = complex(z)
    if z.imag == 0 and z.real >= 0 and not boundary:
        raise BranchCutError(f"z = {z} lies on the branch cut; pass boundary=True for the +i0 limit")
    x = np.asarray(x, dtype=float)
    if boundary and z.imag == 0:
        xi = np.sqrt(max(z.real - 1.0, 0.0))
        k_minus, k_plus = 1j * xi, np.sqrt(z.real + 1.0) + 0j
    else:
        k_minus, k_plus = branch_sqrt(1 - z), branch_sqrt(1 + z)
    f1, df1 = _jost_pair(k_minus, x, -1, +1, True)
    g2, dg2 = _jost_pair(k_minus, x, +1, -1, True)
    f3, df3 = _jost_pair(k_plus, x, +1, -1, False)
    g4, dg4 = _jost_pair(k_plus, x, -1, +1, False)
    return JostQuadruple(z, f1, f3, g2, g4, df1, df3, dg2, dg4)


def wronskian_closed_forms(z: complex):
    z = complex(z)
    return {
        ("f1", "g2"): 2 * z * z * branch_sqrt(1 - z),
        ("f3", "g4"): -2 * z * z * branch_sqrt(1 + z),
        ("f1", "g4"): 0j,
        ("f3", "g2"): 0j,
    }


def resolvent_kernel(z: complex, x, y) -> np.ndarray:
    """Kernel of (H(1) - z)^{-1} at (x, y); shape (..., 2, 2).

    Built from F = [f1 f3], G = [g2 g4] and the diagonal Wronskian matrix D:
    -F(x) D^{-1} G(y)^T sigma3 for x >= y and -G(x) D^{-1} F(y)^T sigma3 otherwise.
    For Im z < 0 the kernel is the conjugate of the one at conj(z), since H
    has real coefficients.
    """
    z = complex(z)
    if z.imag < 0:
        return np.conj(resolvent_kernel(np.conj(z), x, y))
    if abs(z) < 1e-8:
        raise BranchCutError("z = 0 is an eigenvalue of H(1)")
    x, y = np.broadcast_arrays(np.asarray(x, dtype=float), np.asarray(y, dtype=float))
    jx = jost_solutions(z, x)
    jy = jost_solutions(z, y)
    d = wronskian_closed_forms(z)
    dinv = np.array([1.0 / d[("f1", "g2")], 1.0 / d[("f3", "g4")]])

    def outer(a1, a3, b1, b3):
        # -[a1 a3] D^{-1} [b1 b3]^T sigma3, columns are 2-vectors
        m = -(dinv[0] * np.einsum("i...,j...->...ij", a1, b1)
              + dinv[1] * np.einsum("i...,j...->...ij", a3, b3))
        return m * np.array([1.0, -1.0])

    upper = outer(jx.f1, jx.f3, jy.g2, jy.g4)
    lower = outer(jx.g2, jx.g4, jy.f1, jy.f3)
    return np.where((x >= y)[..., None, None], upper, lower)


def jump_matrix(xi: float, x, omega: float = 1.0) -> np.ndarray:
    """E_omega(x, xi) = [F(sqrt(w) x, xi/sqrt(w)), G(sqrt(w) x, xi/sqrt(w))], shape (..., 2, 2)."""
    s = np.sqrt(omega)
    y = s * np.asarray(x, dtype=float)
    k = xi / s
    th, s2 = np.tanh(y), sech(y) ** 2
    den = (k - 1j) ** 2
    big_f = np.stack([(k + 1j * th) ** 2, s2 + 0j]) * np.exp(1j * y * k) / den
    big_g = np.stack([(k - 1j * th) ** 2, s2 + 0j]) * np.exp(-1j * y * k) / den
    return np.moveaxis(np.stack([big_f, big_g], axis=1), (0, 1), (-2, -1))


def resolvent_jump(xi: float, x, y, omega: float = 1.0) -> np.ndarray:
    """-(1 / (2 i xi)) E(x) E(y)^* sigma3 for xi > 0."""
    ex = jump_matrix(xi, x, omega)
    ey = jump_matrix(xi, y, omega)
    prod = ex @ np.conj(np.swapaxes(ey, -1, -2))
    return -prod * np.array([1.0, -1.0]) / (2j * xi)


# ---------------------------------------------------------------- distorted basis


def symbol_denominator(omega: float, xi):
    return (np.abs(xi) - 1j * np.sqrt(omega)) ** 2


def symbol_x_factors(omega: float, x) -> np.ndarray:
    """x-dependent factors (1, tanh, tanh^2, sech^2) of the separable symbols."""
    y = np.sqrt(omega) * np.asarray(x, dtype=float)
    th = np.tanh(y)
    return np.stack([np.ones_like(th), th, th * th, sech(y) ** 2])


def symbol_x_factor_derivatives(omega: float, x) -> np.ndarray:
    s = np.sqrt(omega)
    y = s * np.asarray(x, dtype=float)
    th, s2 = np.tanh(y), sech(y) ** 2
    return np.stack([np.zeros_like(th), s * s2, 2 * s * th * s2, -2 * s * s2 * th])


def symbol_xi_factors(omega: float, xi) -> np.ndarray:
    """xi-dependent factors pairing with `symbol_x_factors`.

    m1 = b0 + b1 tanh + b2 tanh^2 and m2 = b3 sech^2 (tanh, sech at sqrt(w) x).
    """
    xi = np.asarray(xi, dtype=float)
    den = symbol_denominator(omega, xi)
    s = np.sqrt(omega)
    return np.stack([xi * xi / den, 2j * s * xi / den, -omega / den, omega / den])


def m_symbols(omega: float, x, xi):
    """Direct evaluation of m1 and m2 on broadcast (x, xi)."""
    s = np.sqrt(omega)
    x, xi = np.broadcast_arrays(np.asarray(x, dtype=float), np.asarray(xi, dtype=float))
    y = s * x
    den = symbol_denominator(omega, xi)
    m1 = (xi + 1j * s * np.tanh(y)) ** 2 / den
    m2 = omega * sech(y) ** 2 / den
    return m1, m2


def m_symbols_separable(omega: float, x, xi):
    """m1, m2 rebuilt from the stored separable representation on an (x, xi) mesh."""
    a = symbol_x_factors(omega, x)
    b = symbol_xi_factors(omega, xi)
    m1 = np.einsum("kx,kq->xq", a[:3], b[:3])
    m2 = np.einsum("x,q->xq", a[3], b[3])
    return m1, m2


def psi_basis(omega: float, x, xi):
    """Psi_plus and Psi_minus = sigma1 Psi_plus, each of shape (2, ...)."""
    x, xi = np.broadcast_arrays(np.asarray(x, dtype=float), np.asarray(xi, dtype=float))
    m1, m2 = m_symbols(omega, x, xi)
    phase = np.exp(1j * x * xi) / np.sqrt(2 * np.pi)
    plus = np.stack([m1 * phase, m2 * phase])
    return plus, plus[::-1].copy()
