"""Quadratic and cubic spectral distributions.

Closed forms for the quadratic null-structure coefficient, the modulation
kernels nu, and the cubic symbols p, p1, p2 together with their separable
(tensorized) expansions. `mu_1111_pairing` evaluates the singular cubic
distribution against four test functions along two independent routes.
"""

from __future__ import annotations

from dataclasses import dataclass
from math import comb

import numpy as np

from .errors import ResolutionError
from .kernels import SechKernelSpec, ft_sech_power, sech_scaled, x_cosech
from .operator import m_symbols, sech, soliton_profile

# ---------------------------------------------------------------- quadratic


def q1_tilde(omega: float, xi):
    """Distorted transform (plus component) of the first quadratic coefficient.

    Carries the factor (omega - xi^2), so it vanishes at xi = +-sqrt(omega).
    """
    xi = np.asarray(xi, dtype=float)
    s = np.sqrt(omega)
    # factored so that xi = sqrt(omega) as a float gives an exact zero
    return q1_tilde_reduced(omega, xi) * ((s - np.abs(xi)) * (s + np.abs(xi)))


def q1_tilde_reduced(omega: float, xi):
    """q1_tilde / (omega - xi^2), with the division done on the formula."""
    xi = np.asarray(xi, dtype=float)
    s = np.sqrt(omega)
    return (xi * xi * (omega + xi * xi) / (24 * np.sqrt(np.pi) * omega**2 * (np.abs(xi) + 1j * s) ** 2)
            * sech_scaled(xi, s))


def threshold_values(omega: float, x):
    """Phi1(x) = Psi1(x, 0) and Phi2(x) = Psi2(x, 0)."""
    y = np.sqrt(omega) * np.asarray(x, dtype=float)
    norm = 1.0 / np.sqrt(2 * np.pi)
    return norm * np.tanh(y) ** 2, -norm * sech(y) ** 2


@dataclass
class QuadraticCoefficients:
    Q1: np.ndarray
    Q2: np.ndarray
    Q3: np.ndarray
    omega: float

    def q1_tilde_closed(self, xi):
        return q1_tilde(self.omega, xi)


def quadratic_coefficients(omega: float, grid) -> QuadraticCoefficients:
    """Coefficients of h1^2, h1 h2 and h2^2 in the quadratic nonlinearity.

    `grid` is a SpatialGrid or a bare array of sample points.
    """
    x = getattr(grid, "x", grid)
    phi = soliton_profile(omega, x)
    p1, p2 = threshold_values(omega, x)
    q1 = np.stack([-phi * (p1 * p1 + 2 * p1 * p2), phi * (p2 * p2 + 2 * p1 * p2)])
    mixed = 2 * phi * (p1 * p1 + p2 * p2 + p1 * p2)
    q2 = np.stack([mixed, -mixed])
    q3 = np.stack([-phi * (p2 * p2 + 2 * p1 * p2), phi * (p1 * p1 + 2 * p1 * p2)])
    return QuadraticCoefficients(q1, q2, q3, omega)


def _nu_common(omega, xi1, xi2):
    s = np.sqrt(omega)
    den = (np.abs(xi1) - 1j * s) ** 2 * (np.abs(xi2) - 1j * s) ** 2
    # ((xi1 + xi2)/s) cosech(pi (xi1 + xi2) / (2 s)) is x_cosech / s
    return s / 12.0 * x_cosech(xi1 + xi2, s) / s / den


def nu_kernels(omega: float, xi1, xi2):
    """(nu_pp, nu_pm, nu_mm) in closed form."""
    xi1 = np.asarray(xi1, dtype=float)
    xi2 = np.asarray(xi2, dtype=float)
    nu_pp = nu_pp_reduced(omega, xi1, xi2) * (xi1**2 + xi2**2 + 2 * omega)
    nu_pm = nu_pm_reduced(omega, xi1, xi2) * (xi1**2 - xi2**2)
    return nu_pp, nu_pm, -nu_pp


def nu_pp_reduced(omega, xi1, xi2):
    """nu_pp / (xi1^2 + xi2^2 + 2 omega)."""
    return (xi1**2 - 4 * xi1 * xi2 + xi2**2 - 2 * omega) * _nu_common(omega, xi1, xi2)


def nu_pm_reduced(omega, xi1, xi2):
    """nu_pm / (xi1^2 - xi2^2)."""
    return (xi1**2 + 2 * xi1 * xi2 + xi2**2 + 4 * omega) * _nu_common(omega, xi1, xi2)


def nu_quadrature(omega: float, xi1: float, xi2: float, half_length: float = 40.0, points: int = 1 << 14):
    """Trapezoid oracle for the defining integrals of nu_pp and nu_pm (no conjugations)."""
    h = 2 * half_length / points
    x = -half_length + h * np.arange(points)
    phi2 = soliton_profile(omega, x) ** 2
    a1, a2 = m_symbols(omega, x, xi1)
    b1, b2 = m_symbols(omega, x, xi2)
    phase = np.exp(1j * x * (xi1 + xi2)) / (2 * np.pi)
    pp = h * np.sum((a1 * b1 - a2 * b2) * phi2 * phase)
    pm = h * np.sum((a1 * b2 - a2 * b1) * phi2 * phase)
    return pp, pm


# -------------------------------------------------------------------- cubic
#
# Variables are rescaled by sqrt(omega). The cubic symbol of the quartic
# overlap of Psi_1 is H(T) = (x0 - iT)^2 (x1 + iT)^2 (x2 - iT)^2 (x3 + iT)^2
# with T = tanh(y), over the denominator p below.

# Sign pattern of the i*T term in each slot (conjugated slots carry -i).
_SLOT_SIGNS = (-1, 1, -1, 1)

# Separable expansions: (coefficient, factor per slot) with factor "q" for
# xi^2 - 1 and "l" for xi. Each slot also carries the (|xi| -+ i)^2 divisor.
P1_TERMS = (
    (1, "qqqq"), (16, "llll"),
    (4, "llqq"), (-4, "lqlq"), (4, "lqql"),
    (4, "qllq"), (-4, "qlql"), (4, "qqll"),
)
P2_TERMS = (
    (2, "qlqq"), (-2, "qqlq"), (2, "qqql"), (-2, "lqqq"),
    (8, "qlll"), (-8, "lqll"), (8, "llql"), (-8, "lllq"),
)


def cubic_p(x0, x1, x2, x3):
    """Denominator p: product of (|x| + i)^2 on conjugated slots, (|x| - i)^2 otherwise."""
    return ((np.abs(x0) + 1j) ** 2 * (np.abs(x1) - 1j) ** 2
            * (np.abs(x2) + 1j) ** 2 * (np.abs(x3) - 1j) ** 2)


def cubic_p1(x0, x1, x2, x3):
    q0, q1, q2, q3 = (np.asarray(v, dtype=float) ** 2 - 1 for v in (x0, x1, x2, x3))
    return (q0 * q1 * q2 * q3 + 16 * x0 * x1 * x2 * x3
            + 4 * (x0 * x1 * q2 * q3 - x0 * q1 * x2 * q3 + x0 * q1 * q2 * x3
                   + q0 * x1 * x2 * q3 - q0 * x1 * q2 * x3 + q0 * q1 * x2 * x3))


def cubic_p2(x0, x1, x2, x3):
    q0, q1, q2, q3 = (np.asarray(v, dtype=float) ** 2 - 1 for v in (x0, x1, x2, x3))
    return (2 * (q0 * x1 * q2 * q3 - q0 * q1 * x2 * q3 + q0 * q1 * q2 * x3 - x0 * q1 * q2 * q3)
            + 8 * (q0 * x1 * x2 * x3 - x0 * q1 * x2 * x3 + x0 * x1 * q2 * x3 - x0 * x1 * x2 * q3))


def cubic_symbol_ratios(xi, xi1, xi2, xi3):
    """(p1/p, p2/p) at rescaled frequencies."""
    den = cubic_p(xi, xi1, xi2, xi3)
    return cubic_p1(xi, xi1, xi2, xi3) / den, cubic_p2(xi, xi1, xi2, xi3) / den


def separable_factor(kind: str, xi):
    """Multiplier b(xi): (xi^2 - 1) or xi over (|xi| - i)^2. Bounded and Lipschitz."""
    xi = np.asarray(xi, dtype=float)
    num = xi * xi - 1 if kind == "q" else xi
    return num / (np.abs(xi) - 1j) ** 2


def separable_ratio(terms, xi, xi1, xi2, xi3):
    """Sum of c * conj b0(xi) b1(xi1) conj b2(xi2) b3(xi3) over the stored terms."""
    total = 0
    for coef, kinds in terms:
        total = total + coef * (np.conj(separable_factor(kinds[0], xi)) * separable_factor(kinds[1], xi1)
                                * np.conj(separable_factor(kinds[2], xi2)) * separable_factor(kinds[3], xi3))
    return total


def tanh_polynomial(xi, xi1, xi2, xi3):
    """Coefficients h_k (k = 0..8, leading axis) of H as a polynomial in T = tanh."""
    coeffs = None
    for sign, v in zip(_SLOT_SIGNS, (xi, xi1, xi2, xi3)):
        v = np.asarray(v, dtype=complex)
        b = sign * 1j
        quad = [v * v, 2 * b * v, np.full_like(v, b * b)]
        if coeffs is None:
            coeffs = quad
            continue
        out = [0] * (len(coeffs) + 2)
        for i, a in enumerate(coeffs):
            for j, c in enumerate(quad):
                out[i + j] = out[i + j] + a * c
        coeffs = out
    return np.stack(np.broadcast_arrays(*coeffs))


def sech_expansion(xi, xi1, xi2, xi3):
    """(even, odd): H = sum_l even_l S^{2l} + T sum_l odd_l S^{2l}, S = sech.

    Uses T^2 = 1 - S^2. even_0 = p1 and odd_0 = i p2; the l >= 1 entries form
    the regular part.
    """
    h = tanh_polynomial(xi, xi1, xi2, xi3)
    even = np.zeros((5,) + h.shape[1:], dtype=complex)
    odd = np.zeros((4,) + h.shape[1:], dtype=complex)
    for m in range(5):
        for ell in range(m + 1):
            even[ell] += h[2 * m] * comb(m, ell) * (-1) ** ell
    for m in range(4):
        for ell in range(m + 1):
            odd[ell] += h[2 * m + 1] * comb(m, ell) * (-1) ** ell
    return even, odd


# ------------------------------------------------------------- quadrature


def gauss_segments(breaks, nodes_per_segment: int):
    """Composite Gauss-Legendre nodes and weights over consecutive breakpoints."""
    t, w = np.polynomial.legendre.leggauss(nodes_per_segment)
    breaks = np.asarray(breaks, dtype=float)
    lo, hi = breaks[:-1, None], breaks[1:, None]
    half = 0.5 * (hi - lo)
    return (lo + half * (t + 1)).ravel(), (half * w).ravel()


def _split_line(reach: float, nodes_per_half: int, pieces: int = 1):
    breaks = np.concatenate([np.linspace(-reach, 0, pieces + 1), np.linspace(0, reach, pieces + 1)[1:]])
    return gauss_segments(breaks, nodes_per_half // pieces)


@dataclass
class MuPairing:
    """Two evaluations of the mu_1111 pairing and the pieces of the second."""

    direct: complex
    decomposed: complex
    delta_part: complex
    pv_part: complex
    regular_part: complex

    @property
    def relative_gap(self) -> float:
        return abs(self.direct - self.decomposed) / max(abs(self.direct), 1e-300)


def smeared_field(omega: float, g, x, xi, weights):
    """W(x) = integral of g(xi) Psi_1(x, xi) d xi by the given quadrature."""
    m1, _ = m_symbols(omega, x[:, None], xi[None, :])
    kernel = m1 * np.exp(1j * np.outer(x, xi)) / np.sqrt(2 * np.pi)
    return kernel @ (weights * g(xi))


def mu_1111_direct(omega: float, g, g1, g2, g3, reach: float = 8.5,
                   nodes_per_half: int = 400, x_reach: float = 60.0, x_step: float = 0.05):
    """Pairing as a single x-integral of conj(W) W1 conj(W2) W3."""
    if nodes_per_half < reach * x_reach / 2 + 20:
        raise ResolutionError(
            f"{nodes_per_half} nodes per half-line cannot resolve e^(i x xi) "
            f"for |x| <= {x_reach}, |xi| <= {reach}")
    xi, wxi = _split_line(reach, nodes_per_half)
    x, wx = gauss_segments(np.arange(-x_reach, x_reach + x_step / 2, 1.0), int(round(1.0 / x_step)))
    w0, w1, w2, w3 = (smeared_field(omega, f, x, xi, wxi) for f in (g, g1, g2, g3))
    return np.sum(wx * np.conj(w0) * w1 * np.conj(w2) * w3)


def _kinked_segments(lo, hi, kinks, n):
    """Gauss nodes on [lo, hi] split at the given kink locations (arrays broadcast)."""
    pts = np.sort(np.stack([np.clip(k, lo, hi) for k in kinks]), axis=0)
    breaks = np.concatenate([lo[None], pts, hi[None]], axis=0)
    t, w = np.polynomial.legendre.leggauss(n)
    u, wu = 0.5 * (t + 1), 0.5 * w
    a, b = breaks[:-1, ..., None], breaks[1:, ..., None]
    nodes = a + (b - a) * u
    weights = (b - a) * wu
    # segment axis folded into the node axis
    return np.moveaxis(nodes, 0, -2).reshape(nodes.shape[1:-1] + (-1,)), \
        np.moveaxis(weights, 0, -2).reshape(nodes.shape[1:-1] + (-1,))


def _nested_lines(reach, n):
    """Yield (k, wk, x3, w3) with k = xi3 - xi2 split at 0 and xi3 split at 0 and k.

    Both xi2 = xi3 - k and xi3 stay in [-reach, reach]; every kink of the
    integrands below lands on a segment boundary.
    """
    ks, wks = _split_line(2 * reach, 2 * n)
    for k, wk in zip(ks, wks):
        lo, hi = np.array(max(-reach, k - reach)), np.array(min(reach, k + reach))
        x3, w3 = _kinked_segments(lo, hi, (np.array(0.0), np.array(k)), n)
        yield k, wk, x3, w3


def _delta_part(omega, g, g1, g2, g3, reach, n):
    """delta part: 3D integral on xi = xi1 - xi2 + xi3, innermost xi1 split at 0 and at xi = 0."""
    s = np.sqrt(omega)
    total = 0
    for k, wk, x3, w3 in _nested_lines(reach, n):
        x2 = x3 - k
        lo = np.full(1, -reach)
        hi = np.full(1, reach)
        x1, w1 = _kinked_segments(lo, hi, (np.zeros(1), np.full(1, -k)), n)
        x1, w1 = x1[0][None, :], w1[0][None, :]
        x0 = x1 + k
        y0, y1, y2, y3 = x0 / s, x1 / s, x2[:, None] / s, x3[:, None] / s
        ratio = cubic_p1(y0, y1, y2, y3) / cubic_p(y0, y1, y2, y3)
        integrand = ratio * np.conj(g(x0)) * g1(x1) * (np.conj(g2(x2)) * g3(x3) * w3)[:, None]
        total = total + wk * np.sum(w1 * integrand)
    return total / (2 * np.pi)


def _pv_part(omega, g, g1, g2, g3, reach, n, tail_pieces=12, tail_nodes=8):
    """pv part after writing xi = c + s with c = xi1 - xi2 + xi3.

    The pv integral over s becomes int_0^inf [s cosech(a s)] (A(c+s) - A(c-s)) / s ds,
    smooth in s except for the kink at s = |c|. The result has a c log|c|
    singularity at c = 0, so c replaces xi1 as an integration variable with
    breaks at c = 0 and at xi1 = 0, and gets twice the nodes of the outer lines.
    """
    s_om = np.sqrt(omega)
    tail = 76.0 * s_om / np.pi  # s cosech(a s) < 1e-15 beyond this
    tail_t, tail_w = gauss_segments(np.linspace(0.0, tail, tail_pieces + 1), tail_nodes)
    unit_t, unit_w = gauss_segments(np.linspace(0.0, 1.0, tail_pieces // 2 + 1), tail_nodes)
    total = 0
    for k, wk, x3, w3 in _nested_lines(reach, n):
        x2 = x3 - k
        # xi1 = c - k
        cv, cw = _kinked_segments(np.array(k - reach), np.array(k + reach),
                                  (np.array(0.0), np.array(k)), 2 * n)
        x1 = cv - k
        c = cv[None, :, None]
        ac = np.abs(c)
        head = np.minimum(ac, tail)
        sv = np.concatenate([head * unit_t, np.broadcast_to(ac + tail_t, ac.shape[:-1] + tail_t.shape)], axis=-1)
        sw = np.concatenate([head * unit_w, np.broadcast_to(tail_w, ac.shape[:-1] + tail_w.shape)], axis=-1)
        y1 = x1[None, :, None] / s_om
        y2 = x2[:, None, None] / s_om
        y3 = x3[:, None, None] / s_om

        def amplitude(x0):
            y0 = x0 / s_om
            return cubic_p2(y0, y1, y2, y3) / cubic_p(y0, y1, y2, y3) * np.conj(g(x0))

        # zero-length segments put nodes at s = 0 with zero weight
        safe = np.where(sv > 0, sv, 1.0)
        inner = np.where(sv > 0, x_cosech(sv, s_om) * (amplitude(c + sv) - amplitude(c - sv)) / safe, 0.0)
        inner = np.sum(sw * inner, axis=-1)
        outer = (np.conj(g2(x2)) * g3(x3) * w3)[:, None] * (cw * g1(x1))[None, :]
        total = total + wk * np.sum(outer * inner)
    return total / (4 * np.pi * s_om)


_REG_KERNELS = tuple((SechKernelSpec(2 * ell), SechKernelSpec(2 * ell, True)) for ell in range(1, 5))


def _regular_part(omega, g, g1, g2, g3, reach, n):
    s = np.sqrt(omega)
    xs, ws = _split_line(reach, 2 * n)
    x1, x2, x3 = np.meshgrid(xs, xs, xs, indexing="ij")
    w123 = ws[:, None, None] * ws[None, :, None] * ws[None, None, :]
    rest = g1(x1) * np.conj(g2(x2)) * g3(x3) * w123
    total = 0
    for x0, w0 in zip(xs, ws):
        args = (x0 / s, x1 / s, x2 / s, x3 / s)
        even, odd = sech_expansion(*args)
        z = (x0 - x1 + x2 - x3) / s
        acc = 0
        for ell, (plain, tanh_k) in enumerate(_REG_KERNELS, start=1):
            acc = acc + even[ell] * ft_sech_power(plain, z)
            if ell < 4:
                acc = acc + odd[ell] * ft_sech_power(tanh_k, z)
        total = total + w0 * np.conj(g(x0)) * np.sum(rest * acc / cubic_p(*args))
    return total * np.sqrt(2 * np.pi) / ((2 * np.pi) ** 2 * s)


@dataclass(frozen=True)
class DecomposedNodes:
    """Gauss nodes per half-line per frequency variable, for each part.

    The regular part has an analytic kernel and converges fastest; the pv part
    carries kinks in the outer variables and limits the overall accuracy.
    """

    delta: int = 40
    pv: int = 16
    regular: int = 12


def mu_1111_decomposed(omega: float, g, g1, g2, g3, reach: float = 8.5,
                       nodes: DecomposedNodes = DecomposedNodes()):
    """Pairing as delta part + principal-value part + regular part; returns the three."""
    return (_delta_part(omega, g, g1, g2, g3, reach, nodes.delta),
            _pv_part(omega, g, g1, g2, g3, reach, nodes.pv),
            _regular_part(omega, g, g1, g2, g3, reach, nodes.regular))


def mu_1111_pairing(omega: float, g, g1, g2, g3, reach: float = 8.5,
                    direct_nodes: int = 400,
                    decomposed_nodes: DecomposedNodes = DecomposedNodes()) -> MuPairing:
    """Pairing of mu_1111 with conj(g) g1 conj(g2) g3, evaluated two independent ways.

    Test functions are callables of a real frequency array.
    """
    direct = mu_1111_direct(omega, g, g1, g2, g3, reach, direct_nodes)
    delta, pv, reg = mu_1111_decomposed(omega, g, g1, g2, g3, reach, decomposed_nodes)
    return MuPairing(direct, delta + pv + reg, delta, pv, reg)
