import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from soliton_lab.errors import BranchCutError, ConfigError, GridMismatchError
from soliton_lab.grids import SpatialGrid
from soliton_lab.operator import (SIGMA1, SIGMA2, SIGMA3, SolitonFrame, apply_H, apply_pauli,
                                  generalized_eigenfunctions, inner, jost_solutions, m_symbols,
                                  m_symbols_separable, psi_basis, resolvent_jump,
                                  resolvent_kernel, soliton_domega, soliton_profile,
                                  threshold_resonances, wronskian_closed_forms)

omegas = st.floats(min_value=0.5, max_value=2.0)


def fourier_d2(f, grid):
    k = 2 * np.pi * np.fft.fftfreq(grid.points, d=grid.spacing)
    return np.fft.ifft(-(k**2) * np.fft.fft(f, axis=-1), axis=-1)


def central_d2(f, h):
    """Sixth-order central second difference; three points at each end are left as nan."""
    w = (1 / 90, -3 / 20, 3 / 2, -49 / 18, 3 / 2, -3 / 20, 1 / 90)
    n = f.shape[-1]
    out = np.full(f.shape, np.nan, dtype=complex)
    out[..., 3:n - 3] = sum(c * f[..., j:n - 6 + j] for j, c in enumerate(w))
    return out / h**2


def H_by_hand(omega, x, field, d2):
    """H(omega) written out entry by entry, with a caller-supplied second derivative."""
    p2 = 2 * omega / np.cosh(math.sqrt(omega) * x) ** 2
    return np.stack([-d2[0] + omega * field[0] - 2 * p2 * field[0] - p2 * field[1],
                     d2[1] - omega * field[1] + p2 * field[0] + 2 * p2 * field[1]])


# ---------------------------------------------------------------- soliton


def test_soliton_peak_unit_frequency():
    assert soliton_profile(1.0, 0.0) == pytest.approx(math.sqrt(2), abs=1e-15)


def test_soliton_peak_frequency_four():
    assert soliton_profile(4.0, 0.0) == pytest.approx(2 * math.sqrt(2), abs=1e-15)


@pytest.mark.parametrize("omega", [0.7, 1.0, 1.7])
def test_soliton_solves_ground_state_equation(grid, omega):
    phi = soliton_profile(omega, grid.x)
    residual = -fourier_d2(phi, grid) + omega * phi - phi**3
    assert np.max(np.abs(residual)) <= 1e-8


@given(omegas, st.floats(min_value=-20, max_value=20))
def test_soliton_even_and_positive(omega, x):
    assert soliton_profile(omega, x) == soliton_profile(omega, -x)
    assert soliton_profile(omega, x) > 0


@given(omegas, st.floats(min_value=-8, max_value=8))
def test_domega_matches_difference_quotient(omega, x):
    h = 1e-6
    fd = (soliton_profile(omega + h, x) - soliton_profile(omega - h, x)) / (2 * h)
    assert soliton_domega(omega, x) == pytest.approx(fd, abs=1e-8)


def test_frame_requires_positive_omega():
    with pytest.raises(ConfigError):
        SolitonFrame(0.0)


# ---------------------------------------------------------------- generalized kernel


@pytest.mark.parametrize("omega", [1.0, 1.3])
def test_kernel_relations(grid, omega):
    y1, y2, _, _ = generalized_eigenfunctions(omega, grid.x)
    assert np.max(np.abs(apply_H(omega, y1, grid))) <= 1e-7
    assert np.max(np.abs(apply_H(omega, y2, grid) - 1j * y1)) <= 1e-7


@pytest.mark.parametrize("omega", [0.8, 1.0, 1.6])
def test_kernel_pairings(grid, omega):
    y1, y2, y3, y4 = generalized_eigenfunctions(omega, grid.x)
    assert inner(y1, apply_pauli(SIGMA2, y2), grid) == pytest.approx(-2 / math.sqrt(omega), abs=1e-10)
    assert inner(y3, apply_pauli(SIGMA2, y4), grid) == pytest.approx(4 * math.sqrt(omega), abs=1e-10)
    assert abs(inner(y1, apply_pauli(SIGMA2, y1), grid)) <= 1e-12


def test_kernel_parity_and_j_invariance(grid):
    for k, y in enumerate(generalized_eigenfunctions(1.2, grid.x)):
        assert np.array_equal(y[1], np.conj(y[0]))
        sign = 1 if k < 2 else -1
        assert np.max(np.abs(grid.reflect(y) - sign * y)) <= 1e-12


def test_apply_H_rejects_wrong_grid(grid):
    with pytest.raises(GridMismatchError):
        apply_H(1.0, np.zeros((2, 100), dtype=complex), grid)


# ---------------------------------------------------------------- threshold resonances


def test_threshold_resonance_values(grid):
    plus, minus = threshold_resonances(1.0, np.array([0.0, grid.half_length]))
    assert np.array_equal(plus[:, 0], [0, -1])
    assert np.array_equal(minus, apply_pauli(SIGMA1, plus))
    assert np.max(np.abs(plus[:, 1] - [1, 0])) <= 4 * math.exp(-2 * grid.half_length)


@pytest.mark.parametrize("omega", [1.0, 1.5])
def test_threshold_resonance_eigen_residual(grid, omega):
    plus, minus = threshold_resonances(omega, grid.x)
    inside = grid.interior(0.5)
    for field, lam in ((plus, omega), (minus, -omega)):
        residual = apply_H(omega, field, grid, decaying=False) - lam * field
        assert np.max(np.abs(residual[:, inside])) <= 1e-6


# ---------------------------------------------------------------- Jost solutions


@pytest.mark.parametrize("z", [2.25 + 0.1j, 0.5 + 1j, -0.7 + 0.4j])
def test_wronskians(z):
    x = np.linspace(-5, 5, 201)
    jost = jost_solutions(z, x)
    w12 = jost.wronskian("f1", "g2")
    w34 = jost.wronskian("f3", "g4")
    root = 1j * np.sqrt(-(1 - z))
    assert np.max(np.abs(w12 - 2 * z * z * root)) <= 1e-10 * max(1, abs(w12[0]))
    assert np.max(np.abs(w34 + 2 * z * z * 1j * np.sqrt(-(1 + z)))) <= 1e-10 * max(1, abs(w34[0]))
    assert np.max(np.abs(jost.wronskian("f1", "g4"))) <= 1e-10
    assert np.max(np.abs(jost.wronskian("f3", "g2"))) <= 1e-10
    assert np.max(np.abs(w12 - w12[100])) <= 1e-9 * max(1, abs(w12[0]))


def test_wronskian_closed_form_sign_convention():
    z = 2.25 + 0.1j
    assert wronskian_closed_forms(z)[("f1", "g2")] == pytest.approx(2 * z * z * 1j * np.sqrt(-(1 - z)))


def test_jost_decay_directions():
    # near the continuous spectrum Re k is small, so compare far out on both sides
    jost = jost_solutions(2.25 + 0.1j, np.array([-300.0, 0.0, 300.0]))
    for decays_right in ("f1", "f3"):
        f = np.max(np.abs(getattr(jost, decays_right)), axis=0)
        assert f[2] < 1e-5 * f[1] and f[0] > 1e5 * f[1]
    for decays_left in ("g2", "g4"):
        g = np.max(np.abs(getattr(jost, decays_left)), axis=0)
        assert g[0] < 1e-5 * g[1] and g[2] > 1e5 * g[1]


@pytest.mark.parametrize("z", [2.0, 0.0, 5.5])
def test_jost_branch_cut_rejected(z):
    with pytest.raises(BranchCutError):
        jost_solutions(z, np.zeros(3))


def test_jost_boundary_value_mode_allowed():
    jost = jost_solutions(2.0, np.zeros(3), boundary=True)
    assert np.all(np.isfinite(jost.f1))


def test_jost_solve_equation_by_finite_differences():
    h = 1e-3
    x = np.arange(-4, 4 + h / 2, h)
    z = 0.5 + 1j
    jost = jost_solutions(z, x)
    for name in ("f1", "f3", "g2", "g4"):
        f = getattr(jost, name)
        res = H_by_hand(1.0, x, f, central_d2(f, h)) - z * f
        assert np.nanmax(np.abs(res[:, 3:-3])) <= 1e-6 * np.max(np.abs(f))


# ---------------------------------------------------------------- resolvent


def test_resolvent_continuity_on_diagonal():
    pts = np.linspace(-3, 3, 13)
    z = 2.25 + 0.1j
    above = resolvent_kernel(z, pts, pts)
    below = resolvent_kernel(z, np.nextafter(pts, -np.inf), pts)
    assert np.max(np.abs(above - below)) <= 1e-10


def test_resolvent_column_solves_equation_off_diagonal():
    h = 1e-3
    x = np.arange(-5, 5 + h / 2, h)
    y0, z = 0.4, 2.25 + 0.1j
    col = np.moveaxis(resolvent_kernel(z, x, y0), 0, -1)
    mask = np.abs(x - y0) > 0.05
    for j in range(2):
        res = H_by_hand(1.0, x, col[:, j], central_d2(col[:, j], h)) - z * col[:, j]
        assert np.nanmax(np.abs(res[:, mask])) <= 1e-5


@pytest.mark.parametrize("xi", [0.5, 1.0, 2.0])
def test_resolvent_jump_across_cut(xi):
    x = np.linspace(-2.5, 2.5, 7)[:, None]
    y = np.linspace(-2.2, 2.8, 7)[None, :]
    z = xi * xi + 1
    jump = resolvent_kernel(z + 1e-6j, x, y) - resolvent_kernel(z - 1e-6j, x, y)
    assert np.max(np.abs(jump - resolvent_jump(xi, x, y))) <= 1e-4


def test_resolvent_rejects_zero():
    with pytest.raises(BranchCutError):
        resolvent_kernel(1e-12j, 0.0, 0.0)


# ---------------------------------------------------------------- distorted basis


@given(omegas, st.floats(min_value=-10, max_value=10))
def test_basis_at_zero_frequency(omega, x):
    plus, minus = psi_basis(omega, x, 0.0)
    y = math.sqrt(omega) * x
    norm = 1 / math.sqrt(2 * math.pi)
    assert plus[0] == pytest.approx(norm * math.tanh(y) ** 2, abs=1e-15)
    assert plus[1] == pytest.approx(-norm / math.cosh(y) ** 2, abs=1e-15)
    assert np.array_equal(minus, plus[::-1])


@pytest.mark.parametrize("xi", [0.5, 1.7, -0.5, -1.7])
@pytest.mark.parametrize("omega", [1.0, 1.4])
def test_basis_generalized_eigenfunctions(grid, omega, xi):
    plus, minus = psi_basis(omega, grid.x, xi)
    lam = xi * xi + omega
    inside = grid.interior(0.5)
    assert np.max(np.abs((apply_H(omega, plus, grid, decaying=False) - lam * plus)[:, inside])) <= 1e-5
    assert np.max(np.abs((apply_H(omega, minus, grid, decaying=False) + lam * minus)[:, inside])) <= 1e-5


@settings(max_examples=25, deadline=None)
@given(omegas, st.integers(min_value=0, max_value=2**31))
def test_symmetries_of_H(omega, seed):
    grid = SpatialGrid(30.0, 2048)
    rng = np.random.default_rng(seed)
    c = rng.normal(size=3) + 1j * rng.normal(size=3)
    x = grid.x
    u = np.exp(-0.5 * (x - rng.uniform(-1, 1)) ** 2) * (c[0] + c[1] * x + c[2] * x * x)
    field = np.stack([u, np.conj(u)])
    h_field = apply_H(omega, field, grid)
    scale = np.max(np.abs(h_field))
    anti = apply_pauli(SIGMA1, h_field) + apply_H(omega, apply_pauli(SIGMA1, field), grid)
    assert np.max(np.abs(anti)) <= 1e-8 * scale
    # adjoint of H for the <u1 conj v1 + u2 conj v2> pairing, written out by hand
    p2 = soliton_profile(omega, x) ** 2
    s3f = apply_pauli(SIGMA3, field)
    d2 = fourier_d2(s3f, grid)
    adjoint = np.stack([-d2[0] + omega * s3f[0] - 2 * p2 * s3f[0] + p2 * s3f[1],
                        d2[1] - omega * s3f[1] - p2 * s3f[0] + 2 * p2 * s3f[1]])
    assert np.max(np.abs(apply_pauli(SIGMA3, h_field) - adjoint)) <= 1e-8 * scale


@settings(max_examples=10, deadline=None)
@given(omegas, st.floats(min_value=0.3, max_value=1.5))
def test_scaling_relation(omega, xi):
    grid = SpatialGrid(20.0, 4096)
    s = math.sqrt(omega)
    g_scaled, _ = psi_basis(1.0, s * grid.x, xi)
    residual = apply_H(omega, g_scaled, grid, decaying=False) - omega * (xi * xi + 1) * g_scaled
    inside = grid.interior(0.5)
    assert np.max(np.abs(residual[:, inside])) <= 1e-6 * np.max(np.abs(g_scaled))


@pytest.mark.parametrize("omega", [0.5, 1.0, 2.0])
def test_symbol_bounds(omega):
    x = np.linspace(-20, 20, 201)[:, None]
    xi = (np.linspace(-20, 20, 400) + 0.05)[None, :]
    m1, m2 = m_symbols(omega, x, xi)
    d = 1e-6
    p1, p2 = m_symbols(omega, x, xi + d)
    q1, q2 = m_symbols(omega, x, xi - d)
    worst = max(np.max(np.abs(m1)), np.max(np.abs(m2)),
                np.max(np.abs(p1 - q1)) / (2 * d), np.max(np.abs(p2 - q2)) / (2 * d))
    assert worst <= 10


@given(omegas, st.lists(st.floats(-30, 30), min_size=1, max_size=20),
       st.lists(st.floats(-30, 30), min_size=1, max_size=20))
def test_separable_symbols_match_direct(omega, xs, xis):
    x, xi = np.array(xs), np.array(xis)
    a1, a2 = m_symbols(omega, x[:, None], xi[None, :])
    b1, b2 = m_symbols_separable(omega, x, xi)
    assert np.max(np.abs(a1 - b1)) <= 1e-13
    assert np.max(np.abs(a2 - b2)) <= 1e-13
