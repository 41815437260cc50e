"""Profiles, local-decay split, modified-scattering check and decay-law fits."""

from __future__ import annotations

import json
import math
from dataclasses import asdict, dataclass, field

import numpy as np

from .grids import FrequencyGrid, SpatialGrid
from .modulation import ModulationTrace
from .operator import j_invariant, m_symbols, sech
from .transform import DistortedSpectrum, DistortedTransform, propagate, x_norm_diagnostics

MIN_FIT_SAMPLES = 8
FIT_START = 5.0
X_NORM_WEIGHT = 0.1
DYADIC_TIMES = (4.0, 8.0, 16.0, 32.0)
CAUCHY_SLACK = 0.2


def japanese(t):
    return np.sqrt(1.0 + np.asarray(t, dtype=float) ** 2)


def chi0(xi):
    """Even C^2 bump: 1 on |xi| <= 1, 0 on |xi| >= 2, quintic smoothstep between."""
    a = np.clip(np.abs(np.asarray(xi, dtype=float)) - 1.0, 0.0, 1.0)
    return 1.0 - a**3 * (10.0 - 15.0 * a + 6.0 * a * a)


# ---------------------------------------------------------------- profile


@dataclass
class ProfileSeries:
    omega_bar: float
    times: list = field(default_factory=list)
    spectra: list = field(default_factory=list)
    theta: list = field(default_factory=list)
    projected: list = field(default_factory=list)
    discrete: list = field(default_factory=list)

    def __len__(self):
        return len(self.times)


def trapezoid_cumulative(times, values) -> np.ndarray:
    t = np.asarray(times, dtype=float)
    v = np.asarray(values, dtype=float)
    out = np.zeros_like(t)
    if t.size > 1:
        out[1:] = np.cumsum(0.5 * (v[1:] + v[:-1]) * np.diff(t))
    return out


def extract_profile(trace: ModulationTrace, grid: SpatialGrid, omega_bar: float | None = None,
                    freq: FrequencyGrid | None = None) -> ProfileSeries:
    """f_pm(t) = e^{+-it(xi^2 + omega_bar)} F_pm[P_e U(t)] for each decomposed snapshot."""
    rows = [(r, u) for r, u in zip(trace.rows, trace.radiation) if u is not None]
    if omega_bar is None:
        omega_bar = trace.omega_ref if math.isfinite(trace.omega_ref) else rows[-1][0].omega
    tf = DistortedTransform(omega_bar, grid, freq or FrequencyGrid())
    series = ProfileSeries(float(omega_bar))
    rates = []
    for row, u in rows:
        coeffs, pe = tf.project_discrete(j_invariant(u))
        spec = propagate(tf.forward(pe, check=False), row.t)
        series.times.append(row.t)
        series.spectra.append(spec)
        series.projected.append(pe)
        series.discrete.append(coeffs)
        rates.append(row.gamma_dot_minus_omega + row.omega - omega_bar)
    series.theta = list(trapezoid_cumulative(series.times, rates))
    return series


def transform_for(series: ProfileSeries, grid: SpatialGrid) -> DistortedTransform:
    spec = series.spectra[0]
    width = spec.xi[1] - spec.xi[0]
    freq = FrequencyGrid(float(-spec.xi[0] + 0.5 * width), spec.xi.size)
    return DistortedTransform(series.omega_bar, grid, freq)


# ---------------------------------------------------------------- local decay


@dataclass
class LocalDecaySplit:
    h1: complex
    h2: complex
    R_u: np.ndarray
    R_ubar: np.ndarray


def threshold_profiles(omega: float, x):
    """Phi1 = tanh^2 / sqrt(2 pi) and Phi2 = -sech^2 / sqrt(2 pi), scaled by omega."""
    y = np.sqrt(omega) * np.asarray(x)
    norm = 1.0 / np.sqrt(2 * np.pi)
    return norm * np.tanh(y) ** 2, -norm * sech(y) ** 2


def local_decay_split(profile: DistortedSpectrum, t: float, projected: np.ndarray,
                      omega_bar: float, grid: SpatialGrid) -> LocalDecaySplit:
    """h1 = e^{-it w} int e^{-it xi^2} chi0 f_plus, h2 = e^{it w} int e^{it xi^2} chi0 f_minus.

    Remainders R_u = u_e - h1 Phi1 + h2 Phi2 and R_ubar = conj(u)_e - h1 Phi2 + h2 Phi1,
    where (u_e, conj(u)_e) = P_e U.
    """
    xi = profile.xi
    dxi = xi[1] - xi[0]
    phase = np.exp(-1j * t * (xi * xi + omega_bar))
    weight = chi0(xi)
    h1 = complex(dxi * np.sum(weight * phase * profile.f_plus))
    h2 = complex(dxi * np.sum(weight * np.conj(phase) * profile.f_minus))
    p1, p2 = threshold_profiles(omega_bar, grid.x)
    return LocalDecaySplit(h1, h2, projected[0] - h1 * p1 + h2 * p2, projected[1] - h1 * p2 + h2 * p1)


def weighted_sup(values: np.ndarray, x) -> float:
    """sup_x <x>^{-2} |values|."""
    return float(np.max(np.abs(values) / (1.0 + np.asarray(x) ** 2)))


# ---------------------------------------------------------------- fits


@dataclass
class DecayReport:
    law: str
    exponent: float
    window: tuple
    residual: float
    samples: int
    band: tuple
    passed: bool
    note: str = ""

    def as_dict(self):
        d = asdict(self)
        d["window"] = list(self.window)
        d["band"] = list(self.band)
        return d


def log_spaced_indices(times, window, count: int = 16):
    """Indices of snapshots nearest to `count` logarithmically spaced targets in the window."""
    t = np.asarray(times, dtype=float)
    lo, hi = window
    inside = np.flatnonzero((t >= lo) & (t <= hi) & (t > 0))
    if inside.size == 0:
        return np.array([], dtype=int)
    targets = np.geomspace(t[inside[0]], t[inside[-1]], count)
    picks = {int(inside[np.argmin(np.abs(t[inside] - target))]) for target in targets}
    return np.array(sorted(picks), dtype=int)


def decay_fit(times, values, window=(FIT_START, math.inf), band=(-math.inf, math.inf),
              law: str = "power law") -> DecayReport:
    """Least-squares slope of log(value) against log(t) on log-spaced samples."""
    t = np.asarray(times, dtype=float)
    v = np.asarray(values, dtype=float)
    idx = log_spaced_indices(t, window)
    idx = idx[np.isfinite(v[idx]) & (v[idx] > 0)] if idx.size else idx
    win = (float(window[0]), float(window[1]) if math.isfinite(window[1]) else float(t.max(initial=0)))
    if idx.size < MIN_FIT_SAMPLES:
        return DecayReport(law, float("nan"), win, float("nan"), int(idx.size), tuple(band), False,
                           f"needs at least {MIN_FIT_SAMPLES} samples")
    lt, lv = np.log(t[idx]), np.log(v[idx])
    slope, intercept = np.polyfit(lt, lv, 1)
    resid = float(np.sqrt(np.mean((lv - (slope * lt + intercept)) ** 2)))
    passed = bool(band[0] <= slope <= band[1])
    return DecayReport(law, float(slope), win, resid, int(idx.size), tuple(band), passed)


# ---------------------------------------------------------------- modified scattering


@dataclass
class ScatteringCheck:
    times: list
    differences: list
    verdict: str
    report: DecayReport | None


def log_phase_integral(series: ProfileSeries, component: str = "f_plus") -> list:
    """Theta(t, xi) = 1/2 int_1^t |f(s, xi)|^2 / s ds by trapezoid (zero for t <= 1).

    `component` picks f_plus or f_minus.
    """
    out, acc, prev = [], None, None
    for t, spec in zip(series.times, series.spectra):
        dens = np.abs(getattr(spec, component)) ** 2 / max(t, 1e-300)
        if t < 1.0:
            out.append(np.zeros_like(dens))
            continue
        if acc is None:
            acc = np.zeros_like(dens)
        else:
            acc = acc + 0.25 * (dens + prev[1]) * (t - prev[0])
        prev = (t, dens)
        out.append(acc.copy())
    return out


def phase_corrected_profiles(series: ProfileSeries) -> list:
    """w_plus(t) = f_plus e^{i theta} e^{i Theta_plus}."""
    big_theta = log_phase_integral(series)
    return [spec.f_plus * np.exp(1j * th) * np.exp(1j * bt)
            for spec, th, bt in zip(series.spectra, series.theta, big_theta)]


def phase_corrected_minus(series: ProfileSeries) -> list:
    """w_minus(t) = f_minus e^{-i theta} e^{-i Theta_minus}, the partner of w_plus."""
    big_theta = log_phase_integral(series, "f_minus")
    return [spec.f_minus * np.exp(-1j * th) * np.exp(-1j * bt)
            for spec, th, bt in zip(series.spectra, series.theta, big_theta)]


def nearest_index(times, t):
    return int(np.argmin(np.abs(np.asarray(times) - t)))


def modified_scattering_check(series: ProfileSeries, dyadic=DYADIC_TIMES,
                              slack: float = CAUCHY_SLACK) -> ScatteringCheck:
    if len(series) < MIN_FIT_SAMPLES:
        return ScatteringCheck([], [], "skipped: fewer than 8 snapshots", None)
    w = phase_corrected_profiles(series)
    pairs, diffs = [], []
    last = series.times[-1]
    for t in dyadic:
        if 2 * t > last + 1e-9:
            break
        a, b = nearest_index(series.times, t), nearest_index(series.times, 2 * t)
        pairs.append(series.times[a])
        diffs.append(float(np.max(np.abs(w[b] - w[a]))))
    if len(diffs) < 2:
        return ScatteringCheck(pairs, diffs, "skipped: run too short for two dyadic pairs", None)
    ok = all(d2 <= (1 + slack) * d1 for d1, d2 in zip(diffs[:-1], diffs[1:]))
    verdict = "non-increasing" if ok else "increasing"
    report = DecayReport("dyadic Cauchy differences of w_plus", float("nan"),
                         (pairs[0], 2 * pairs[-1]), float("nan"), len(diffs), (-math.inf, 0.0), ok,
                         "verdict from successive ratios within slack")
    return ScatteringCheck(pairs, diffs, verdict, report)


# ---------------------------------------------------------------- asymptotics


def _sample(profile, xi):
    if callable(profile):
        return np.asarray(profile(xi), dtype=complex)
    grid_xi, values = profile
    values = np.asarray(values, dtype=complex)
    return np.interp(xi, grid_xi, values.real, 0, 0) + 1j * np.interp(xi, grid_xi, values.imag, 0, 0)


def asymptotic_formula(t: float, x, omega_inf: float, W_plus, W_minus, theta_inf: float):
    """Two-term long-time profile with logarithmic phase corrections.

    W_plus and W_minus are callables of xi or (xi, values) pairs for interpolation.
    """
    x = np.asarray(x, dtype=float)
    xi = x / (2 * t)
    wp = _sample(W_plus, xi)
    wm = _sample(W_minus, -xi)
    m1, _ = m_symbols(omega_inf, x, xi)
    _, m2 = m_symbols(omega_inf, x, -xi)
    pref = 1.0 / np.sqrt(2 * t)
    plus = (pref * np.exp(-1j * t * omega_inf) * np.exp(1j * x * x / (4 * t)) * np.exp(-0.25j * np.pi)
            * m1 * wp * np.exp(-1j * theta_inf) * np.exp(-0.5j * np.log(t) * np.abs(wp) ** 2))
    minus = (pref * np.exp(1j * t * omega_inf) * np.exp(-1j * x * x / (4 * t)) * np.exp(0.25j * np.pi)
             * m2 * wm * np.exp(1j * theta_inf) * np.exp(0.5j * np.log(t) * np.abs(wm) ** 2))
    return plus - minus


def asymptotic_gap(series: ProfileSeries, radiation, t_target: float, grid: SpatialGrid) -> dict:
    """Compare u(t) with the asymptotic formula built from the last w_plus, w_minus.

    `radiation` maps snapshot times to u. The last recorded profile stands in
    for the t -> infinity limits.
    """
    i = nearest_index(series.times, t_target)
    t = series.times[i]
    xi = series.spectra[-1].xi
    w_plus = phase_corrected_profiles(series)[-1]
    w_minus = phase_corrected_minus(series)[-1]
    u = radiation[t]
    u_inf = asymptotic_formula(t, grid.x, series.omega_bar, (xi, w_plus), (xi, w_minus),
                               series.theta[-1])
    sup_u = float(np.max(np.abs(u)))
    return {"t": t, "sup_u": sup_u, "sup_gap": float(np.max(np.abs(u - u_inf))),
            "bound": 3.0 * sup_u * t ** -0.1}


# ---------------------------------------------------------------- document


def _clean(value):
    if isinstance(value, float):
        return value if math.isfinite(value) else None
    if isinstance(value, dict):
        return {k: _clean(v) for k, v in value.items()}
    if isinstance(value, (list, tuple)):
        return [_clean(v) for v in value]
    if isinstance(value, (np.floating,)):
        return _clean(float(value))
    if isinstance(value, (np.integer,)):
        return int(value)
    if isinstance(value, (np.bool_,)):
        return bool(value)
    return value


def x_norm_series(series: ProfileSeries) -> list:
    out = []
    for t, spec in zip(series.times, series.spectra):
        sup, deriv = x_norm_diagnostics(spec)
        out.append({"t": t, "sup": sup, "deriv_l2": deriv,
                    "x_norm": sup + float(japanese(t)) ** -X_NORM_WEIGHT * deriv})
    return out


def diagnostics_document(run_id: str, reports: list, xnorm: list, scattering: ScatteringCheck,
                         trace: ModulationTrace, extra: dict | None = None) -> str:
    doc = {
        "run_id": run_id,
        "decay_reports": [r.as_dict() for r in reports],
        "x_norm_series": xnorm,
        "scattering_verdict": {
            "verdict": scattering.verdict,
            "times": scattering.times,
            "differences": scattering.differences,
        },
        "omega_series": [{"t": r.t, "omega": r.omega} for r in trace.rows],
    }
    if extra:
        doc.update(extra)
    return json.dumps(_clean(doc), sort_keys=True, indent=1) + "\n"
