import json
import math

import numpy as np
import pytest
from conftest import dressed_gaussian
from hypothesis import given, settings
from hypothesis import strategies as st
from scipy.integrate import cumulative_trapezoid

from soliton_lab.diagnostics import (ProfileSeries, asymptotic_formula, chi0, decay_fit,
                                     diagnostics_document, extract_profile, japanese,
                                     local_decay_split, log_phase_integral, log_spaced_indices,
                                     modified_scattering_check, phase_corrected_minus,
                                     phase_corrected_profiles, trapezoid_cumulative, weighted_sup)
from soliton_lab.evolution import EvolutionConfig, run
from soliton_lab.grids import FrequencyGrid, SpatialGrid
from soliton_lab.modulation import ModulationTrace, TraceRow, track
from soliton_lab.operator import soliton_profile
from soliton_lab.transform import DistortedSpectrum, DistortedTransform

OMEGA = 1.0


def free_flow_trace(grid, freq, times, seed=3):
    """Trace whose radiation follows the linearized flow exactly, with frozen modulation."""
    tf = DistortedTransform(OMEGA, grid, freq)
    start = dressed_gaussian(grid.x, seed)
    trace = ModulationTrace(omega_ref=OMEGA)
    for t in times:
        trace.rows.append(TraceRow(t, omega=OMEGA, gamma=0.0, gamma_dot_minus_omega=0.0, omega_dot=0.0))
        trace.radiation.append(tf.evolve_field(start, t)[0])
    return trace, tf.forward(start)


def synthetic_series(spectra, times, theta=None):
    s = ProfileSeries(OMEGA)
    s.times = list(times)
    s.spectra = list(spectra)
    s.theta = list(theta if theta is not None else np.zeros(len(times)))
    return s


def constant_spectrum(xi, plus, minus=None):
    minus = np.zeros_like(plus) if minus is None else minus
    return DistortedSpectrum(xi, plus.astype(complex), minus.astype(complex), OMEGA)


# ---------------------------------------------------------------- profile


def test_profile_of_pure_soliton_vanishes(grid):
    traj = run(EvolutionConfig(grid=grid, dt=1e-3, t_end=1.0, snapshot_stride=250),
               soliton_profile(OMEGA, grid.x) + 0j)
    series = extract_profile(track(traj), grid)
    for spec in series.spectra:
        assert max(np.max(np.abs(spec.f_plus)), np.max(np.abs(spec.f_minus))) <= 1e-8
    assert np.max(np.abs(series.theta)) <= 1e-6


def test_profile_is_constant_under_the_linear_flow(grid, freq):
    # group velocity 2 xi carries the content near |xi| = 10 out of [-40, 40] soon after t = 1
    times = [0.0, 0.25, 0.5, 1.0]
    trace, start = free_flow_trace(grid, freq, times)
    series = extract_profile(trace, grid, freq=freq)
    for spec in series.spectra:
        assert np.max(np.abs(spec.f_plus - start.f_plus)) <= 1e-7
        assert np.max(np.abs(spec.f_minus - start.f_minus)) <= 1e-7
    assert series.theta == [0.0] * len(times)


def test_phases_start_at_one(grid, freq):
    trace, _ = free_flow_trace(grid, freq, [0.0, 0.5])
    series = extract_profile(trace, grid, freq=freq)
    w = phase_corrected_profiles(series)
    assert np.array_equal(w[0], series.spectra[0].f_plus)
    assert np.array_equal(phase_corrected_minus(series)[0], series.spectra[0].f_minus)


@settings(max_examples=20, deadline=None)
@given(st.lists(st.floats(min_value=-3, max_value=3), min_size=4, max_size=4), st.integers(0, 1000))
def test_phase_corrections_preserve_modulus(theta, seed):
    rng = np.random.default_rng(seed)
    xi = FrequencyGrid(4.0, 64).xi
    times = [0.5, 1.0, 2.0, 4.0]
    spectra = [constant_spectrum(xi, rng.normal(size=64) + 1j * rng.normal(size=64),
                                 rng.normal(size=64) + 1j * rng.normal(size=64)) for _ in times]
    series = synthetic_series(spectra, times, theta)
    for w, wm, spec in zip(phase_corrected_profiles(series), phase_corrected_minus(series), spectra):
        assert np.max(np.abs(np.abs(w) - np.abs(spec.f_plus))) <= 1e-13
        assert np.max(np.abs(np.abs(wm) - np.abs(spec.f_minus))) <= 1e-13


def test_log_phase_is_monotone_and_zero_before_one():
    xi = FrequencyGrid(4.0, 64).xi
    times = [0.25, 0.5, 1.0, 2.0, 4.0, 8.0]
    spectra = [constant_spectrum(xi, np.exp(-xi * xi) * (1 + 0.1 * k)) for k in range(len(times))]
    big = log_phase_integral(synthetic_series(spectra, times))
    assert np.all(big[0] == 0) and np.all(big[1] == 0) and np.all(big[2] == 0)
    for a, b in zip(big[2:-1], big[3:]):
        assert np.all(b >= a)


def test_log_phase_of_constant_profile_is_half_log():
    # 1/2 int_1^t |f|^2 / s ds = |f|^2 log(t) / 2 for constant f; trapezoid error is second order
    xi = FrequencyGrid(4.0, 64).xi
    times = np.linspace(1.0, 8.0, 2001)
    f = 0.3 * np.exp(-xi * xi)
    big = log_phase_integral(synthetic_series([constant_spectrum(xi, f)] * times.size, times))
    assert np.max(np.abs(big[-1] - 0.5 * np.abs(f) ** 2 * math.log(8.0))) <= 1e-7


def test_theta_accumulates_trapezoid_rates():
    t = np.sort(np.random.default_rng(1).uniform(0, 10, 40))
    rates = np.sin(t)
    assert np.max(np.abs(trapezoid_cumulative(t, rates) - cumulative_trapezoid(rates, t, initial=0))) <= 1e-14


# ---------------------------------------------------------------- local decay


def test_zero_profile_gives_zero_split(grid, freq):
    xi = freq.xi
    zero = constant_spectrum(xi, np.zeros_like(xi))
    projected = dressed_gaussian(grid.x, 2)
    split = local_decay_split(zero, 3.0, projected, OMEGA, grid)
    assert split.h1 == 0 and split.h2 == 0
    assert np.array_equal(split.R_u, projected[0])
    assert np.array_equal(split.R_ubar, projected[1])


def test_threshold_coefficient_quadrature(grid):
    # h1 for f_plus = e^{-xi^2} chi0 and t = 0: int chi0^2 e^{-xi^2} over a node-symmetric grid
    freq = FrequencyGrid(4.0, 4096)
    xi = freq.xi
    spec = constant_spectrum(xi, np.exp(-xi * xi))
    split = local_decay_split(spec, 0.0, np.zeros((2, grid.points), complex), 0.0, grid)
    from scipy.integrate import quad
    ref = quad(lambda v: chi0(v) * math.exp(-v * v), -2, 2, points=[-1, 1], epsabs=1e-13)[0]
    assert abs(split.h1 - ref) <= 1e-6


@given(st.floats(min_value=-50, max_value=50))
def test_chi0_shape(v):
    c = float(chi0(v))
    assert 0 <= c <= 1
    assert c == float(chi0(-v))
    if abs(v) <= 1:
        assert c == 1
    if abs(v) >= 2:
        assert c == 0


def test_chi0_is_monotone_and_smooth_at_the_joins():
    v = np.linspace(1, 2, 10001)
    c = chi0(v)
    assert np.all(np.diff(c) <= 0)
    h = 1e-4
    for edge in (1.0, 2.0):
        slope = (chi0(edge + h) - chi0(edge - h)) / (2 * h)
        curv = (chi0(edge + h) - 2 * chi0(edge) + chi0(edge - h)) / h**2
        assert abs(slope) <= 1e-7 and abs(curv) <= 1e-3


def test_weighted_sup():
    x = np.array([-2.0, 0.0, 3.0])
    assert weighted_sup(np.array([5.0, 0.5, 20.0]), x) == pytest.approx(2.0)


# ---------------------------------------------------------------- fits


def test_fit_recovers_known_exponent():
    t = np.linspace(1, 80, 791)
    rep = decay_fit(t, t**-0.5, band=(-0.6, -0.4))
    assert rep.exponent == pytest.approx(-0.5, abs=1e-12)
    assert rep.passed and rep.samples >= 8 and rep.residual <= 1e-12


@given(st.floats(min_value=-3, max_value=1), st.floats(min_value=0.1, max_value=10))
def test_fit_of_pure_power(p, c):
    t = np.geomspace(1, 100, 300)
    rep = decay_fit(t, c * t**p)
    assert abs(rep.exponent - p) <= 1e-10


def test_fit_outside_band_fails():
    t = np.geomspace(1, 100, 300)
    assert not decay_fit(t, t**-1.0, band=(-0.6, -0.4)).passed


def test_fit_with_too_few_samples_reports_nan():
    rep = decay_fit([6.0, 7.0, 8.0], [1.0, 0.5, 0.25])
    assert math.isnan(rep.exponent) and not rep.passed and rep.note


def test_fit_skips_nonpositive_values():
    t = np.geomspace(5, 100, 200)
    v = t**-1.5
    v[::7] = 0.0
    assert decay_fit(t, v).exponent == pytest.approx(-1.5, abs=1e-10)


def test_log_spaced_indices():
    t = np.linspace(0, 50, 5001)
    idx = log_spaced_indices(t, (5, 50))
    assert 8 <= idx.size <= 16
    assert np.all(np.diff(idx) > 0)
    assert t[idx[0]] == 5 and t[idx[-1]] == 50


# ---------------------------------------------------------------- modified scattering


def test_zero_profile_has_zero_cauchy_differences():
    xi = FrequencyGrid(4.0, 64).xi
    times = np.arange(0, 65, 1.0)
    series = synthetic_series([constant_spectrum(xi, np.zeros_like(xi))] * times.size, times)
    check = modified_scattering_check(series)
    assert check.differences == [0.0, 0.0, 0.0, 0.0]
    assert check.verdict == "non-increasing"


def test_growing_differences_are_flagged():
    xi = FrequencyGrid(4.0, 64).xi
    times = np.arange(0, 65, 1.0)
    spectra = [constant_spectrum(xi, np.full(xi.size, 1e-3 * t * t)) for t in times]
    check = modified_scattering_check(synthetic_series(spectra, times, np.zeros(times.size)))
    assert check.verdict == "increasing"


def test_short_run_is_skipped():
    xi = FrequencyGrid(4.0, 64).xi
    series = synthetic_series([constant_spectrum(xi, xi * 0)] * 3, [0, 1, 2])
    assert modified_scattering_check(series).verdict.startswith("skipped")


# ---------------------------------------------------------------- asymptotic formula


def test_asymptotic_formula_with_zero_profiles():
    x = np.linspace(-50, 50, 101)
    zero = lambda v: 0 * v  # noqa: E731
    assert np.all(asymptotic_formula(10.0, x, OMEGA, zero, zero, 0.3) == 0)


@pytest.mark.parametrize("t", [10.0, 40.0])
def test_asymptotic_amplitude_law(t):
    # with W_minus = 0 and |x| large, |u| = |W_plus(x / 2t)| / sqrt(2t)
    x = np.concatenate([np.linspace(-4 * t, -20, 200), np.linspace(20, 4 * t, 200)])
    w_plus = lambda v: np.exp(-v * v) * (1 + 0.5j * v)  # noqa: E731
    zero = lambda v: 0 * v  # noqa: E731
    u = asymptotic_formula(t, x, OMEGA, w_plus, zero, 0.7)
    assert np.max(np.abs(np.abs(u) - np.abs(w_plus(x / (2 * t))) / math.sqrt(2 * t))) <= 1e-14


def test_asymptotic_formula_accepts_tabulated_profiles():
    xi = FrequencyGrid(4.0, 2048).xi
    x = np.linspace(-30, 30, 61)
    f = lambda v: np.exp(-v * v) + 0j  # noqa: E731
    zero = lambda v: 0 * v  # noqa: E731
    a = asymptotic_formula(20.0, x, OMEGA, f, zero, 0.0)
    b = asymptotic_formula(20.0, x, OMEGA, (xi, f(xi)), (xi, zero(xi)), 0.0)
    # linear interpolation error h^2/8 sup|f''| with h = 1/256, amplified by the log-phase factor
    assert np.max(np.abs(a - b)) <= 1e-5


# ---------------------------------------------------------------- document


def test_document_is_strict_json_with_nulls(grid, freq):
    trace, _ = free_flow_trace(grid, freq, [0.0, 1.0])
    series = extract_profile(trace, grid, freq=freq)
    rep = decay_fit([1.0], [1.0])
    text = diagnostics_document("abc", [rep], [], modified_scattering_check(series), trace,
                                {"value": float("nan")})
    doc = json.loads(text, parse_constant=lambda c: pytest.fail(f"non-strict constant {c}"))
    assert doc["run_id"] == "abc"
    assert doc["value"] is None
    assert doc["decay_reports"][0]["exponent"] is None
    assert text == diagnostics_document("abc", [rep], [], modified_scattering_check(series), trace,
                                        {"value": float("nan")})


def test_japanese_bracket():
    assert japanese(0.0) == 1.0
    assert japanese(3.0) == pytest.approx(math.sqrt(10))


def test_grid_guard_for_transform_lookup(grid):
    xi = FrequencyGrid(6.0, 256).xi
    series = synthetic_series([constant_spectrum(xi, xi * 0)], [0.0])
    from soliton_lab.diagnostics import transform_for
    tf = transform_for(series, grid)
    assert np.array_equal(tf.freq.xi, xi)
    assert isinstance(grid, SpatialGrid)
