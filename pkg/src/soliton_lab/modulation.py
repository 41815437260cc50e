"""Modulated-soliton decomposition psi = e^{i gamma} (phi_omega + u).

(omega, gamma) are fixed by the even orthogonality conditions
<U, sigma2 Y1> = <U, sigma2 Y2> = 0 with U = (u, conj u). With phi real these
reduce to

    K1 = -2 int phi Re(e^{-i gamma} psi) + 8 sqrt(omega) = 0,
    K2 = -2 int d_omega phi Im(e^{-i gamma} psi)        = 0,

solved by damped Newton with the analytic Jacobian.
"""

from __future__ import annotations

import csv
from dataclasses import asdict, dataclass, field

import numpy as np

from .errors import DecompositionError, IllConditionedError
from .evolution import Trajectory, check_even, energy, mass
from .grids import SpatialGrid
from .operator import (SIGMA1, SIGMA2, SolitonFrame, apply_pauli,
                       generalized_eigenfunctions, inner, j_invariant,
                       kernel_derivatives, soliton_domega, soliton_domega2,
                       soliton_profile)
from .transform import DistortedTransform

NEWTON_TOL = 1e-12
NEWTON_MAX_ITER = 50
CONDITION_LIMIT = 1e6
REALNESS_TOL = 1e-10


def c_omega(omega: float) -> float:
    return 2.0 / np.sqrt(omega)


def orthogonality_residuals(u: np.ndarray, omega: float, grid: SpatialGrid):
    """(<U, sigma2 Y1>, <U, sigma2 Y2>) evaluated with the generic pairing."""
    U = j_invariant(u)
    y1, y2, _, _ = generalized_eigenfunctions(omega, grid.x)
    return (inner(U, apply_pauli(SIGMA2, y1), grid),
            inner(U, apply_pauli(SIGMA2, y2), grid))


def _functional(psi, omega, gamma, grid):
    v = np.exp(-1j * gamma) * psi
    phi = soliton_profile(omega, grid.x)
    dphi = soliton_domega(omega, grid.x)
    re, im = v.real, v.imag
    k = np.array([-2 * grid.integrate(phi * re) + 8 * np.sqrt(omega),
                  -2 * grid.integrate(dphi * im)])
    jac = np.array([
        [-2 * grid.integrate(dphi * re) + 4 / np.sqrt(omega), -2 * grid.integrate(phi * im)],
        [-2 * grid.integrate(soliton_domega2(omega, grid.x) * im), 2 * grid.integrate(dphi * re)],
    ])
    return k, jac


def decompose(psi: np.ndarray, guess: SolitonFrame, grid: SpatialGrid,
              tol: float = NEWTON_TOL, max_iter: int = NEWTON_MAX_ITER):
    """Return (frame, u) with u = e^{-i gamma} psi - phi_omega orthogonal to sigma2 Y1, sigma2 Y2."""
    psi = np.asarray(psi, dtype=complex)
    grid.check(psi)
    check_even(psi, grid)
    omega, gamma = float(guess.omega), float(guess.gamma)
    k, jac = _functional(psi, omega, gamma, grid)
    norm = np.max(np.abs(k))
    for _ in range(max_iter):
        if norm <= tol:
            break
        delta = np.linalg.solve(jac, -k)
        step = 1.0
        while True:
            trial_omega = omega + step * delta[0]
            if trial_omega > 0:
                k_new, jac_new = _functional(psi, trial_omega, gamma + step * delta[1], grid)
                new_norm = np.max(np.abs(k_new))
                if new_norm < norm or step < 1e-6:
                    break
            step *= 0.5
            if step < 1e-6:
                raise DecompositionError(
                    f"line search stalled at residual {norm:.3e}", tuple(k))
        omega, gamma = trial_omega, gamma + step * delta[1]
        k, jac, norm = k_new, jac_new, new_norm
    if norm > tol:
        raise DecompositionError(
            f"no convergence in {max_iter} iterations, residuals {k[0]:.3e}, {k[1]:.3e}", tuple(k))
    gamma = float(np.angle(np.exp(1j * gamma)))
    u = np.exp(-1j * gamma) * psi - soliton_profile(omega, grid.x)
    return SolitonFrame(float(omega), gamma), u


# ---------------------------------------------------------------- modulation ODE


def nonlinearity(U: np.ndarray, omega: float, x) -> np.ndarray:
    """Quadratic plus cubic part of the radiation equation."""
    phi = soliton_profile(omega, x)
    u, ub = U[0], U[1]
    quad = np.stack([-phi * (u * u + 2 * u * ub), phi * (ub * ub + 2 * u * ub)])
    cubic = np.stack([-u * ub * u, ub * u * ub])
    return quad + cubic


def modulation_matrix(U: np.ndarray, omega: float, grid: SpatialGrid) -> np.ndarray:
    y1, y2, _, _ = generalized_eigenfunctions(omega, grid.x)
    dy1, dy2 = kernel_derivatives(omega, grid.x)
    c = c_omega(omega)
    corr = np.array([
        [inner(U, apply_pauli(SIGMA1, y1), grid), inner(U, apply_pauli(SIGMA2, dy1), grid)],
        [inner(U, apply_pauli(SIGMA1, y2), grid), inner(U, apply_pauli(SIGMA2, dy2), grid)],
    ])
    return np.array([[0, c], [c, 0]]) + corr


def _real(values, label):
    values = np.asarray(values)
    scale = max(1.0, float(np.max(np.abs(values))))
    if np.max(np.abs(values.imag)) > REALNESS_TOL * scale:
        raise IllConditionedError(f"{label} has imaginary part {np.max(np.abs(values.imag)):.3e}")
    return values.real


def modulation_rhs(U: np.ndarray, frame: SolitonFrame, grid: SpatialGrid):
    """(gamma_dot - omega, omega_dot) from the 2x2 modulation system."""
    omega = frame.omega
    y1, y2, _, _ = generalized_eigenfunctions(omega, grid.x)
    iN = 1j * nonlinearity(U, omega, grid.x)
    rhs = _real([inner(iN, apply_pauli(SIGMA2, y1), grid),
                 inner(iN, apply_pauli(SIGMA2, y2), grid)], "modulation right side")
    matrix = _real(modulation_matrix(U, omega, grid), "modulation matrix")
    cond = np.linalg.cond(matrix)
    if not cond <= CONDITION_LIMIT:
        raise IllConditionedError(f"modulation matrix condition number {cond:.3e} exceeds {CONDITION_LIMIT:.0e}")
    sol = np.linalg.solve(matrix, rhs)
    return float(sol[0]), float(sol[1])


# ---------------------------------------------------------------- expansions


def mass_expansion_residual(u: np.ndarray, omega: float, grid: SpatialGrid) -> float:
    """M[phi + u] - M[phi] - M[u] + <U, sigma2 Y1>."""
    phi = soliton_profile(omega, grid.x)
    r1, _ = orthogonality_residuals(u, omega, grid)
    value = mass(phi + u, grid) - mass(phi, grid) - mass(u, grid) + r1
    return float(abs(value))


def energy_expansion_residual(u: np.ndarray, omega: float, grid: SpatialGrid) -> float:
    """E[phi + u] - E[phi] - E[u] - (omega/2)<U, sigma2 Y1> + quadratic and cubic phi terms."""
    phi = soliton_profile(omega, grid.x)
    ub = np.conj(u)
    r1, _ = orthogonality_residuals(u, omega, grid)
    quad = 0.25 * grid.integrate(phi**2 * (u * u + 4 * u * ub + ub * ub))
    cubic = 0.5 * grid.integrate(phi * (u * u * ub + u * ub * ub))
    value = (energy(phi + u, grid) - energy(phi, grid) - energy(u, grid)
             - 0.5 * omega * r1 + quad + cubic)
    return float(abs(value))


# ---------------------------------------------------------------- trace


TRACE_COLUMNS = (
    "t", "omega", "gamma", "gamma_dot_minus_omega", "omega_dot",
    "d1_re", "d1_im", "d2_re", "d2_im",
    "orth1_re", "orth1_im", "orth2_re", "orth2_im",
    "u_sup", "mass_residual", "energy_residual", "status",
)


@dataclass
class TraceRow:
    t: float
    omega: float = float("nan")
    gamma: float = float("nan")
    gamma_dot_minus_omega: float = float("nan")
    omega_dot: float = float("nan")
    d1: complex = complex("nan")
    d2: complex = complex("nan")
    orth1: complex = complex("nan")
    orth2: complex = complex("nan")
    u_sup: float = float("nan")
    mass_residual: float = float("nan")
    energy_residual: float = float("nan")
    status: str = "ok"

    def as_csv(self):
        vals = (self.t, self.omega, self.gamma, self.gamma_dot_minus_omega, self.omega_dot,
                self.d1.real, self.d1.imag, self.d2.real, self.d2.imag,
                self.orth1.real, self.orth1.imag, self.orth2.real, self.orth2.imag,
                self.u_sup, self.mass_residual, self.energy_residual)
        return [f"{v:.17g}" for v in vals] + [self.status]


@dataclass
class ModulationTrace:
    rows: list = field(default_factory=list)
    radiation: list = field(default_factory=list)
    omega_ref: float = float("nan")

    def column(self, name):
        if name in ("d1", "d2", "orth1", "orth2"):
            return np.array([getattr(r, name) for r in self.rows], dtype=complex)
        return np.array([getattr(r, name) for r in self.rows], dtype=float)

    @property
    def ok(self) -> bool:
        return all(r.status == "ok" for r in self.rows)

    def to_csv(self, path) -> None:
        with open(path, "w", newline="") as fh:
            writer = csv.writer(fh, lineterminator="\n")
            writer.writerow(TRACE_COLUMNS)
            for row in self.rows:
                writer.writerow(row.as_csv())


def track(trajectory: Trajectory, guess: SolitonFrame | None = None,
          omega_ref: float | None = None) -> ModulationTrace:
    """Decompose every snapshot with warm starts and record the diagnostics.

    Discrete components d1, d2 are measured against H(omega_ref), with
    omega_ref defaulting to the last decomposed omega. Against H(omega(t))
    they vanish identically by the orthogonality conditions.
    """
    grid = trajectory.grid
    trace = ModulationTrace()
    frame = guess or SolitonFrame(omega_from_mass(trajectory.fields[0], grid), 0.0)
    for t, psi in zip(trajectory.times, trajectory.fields):
        row = TraceRow(t)
        try:
            frame, u = decompose(psi, frame, grid)
        except (DecompositionError, ValueError) as exc:
            row.status = f"decomposition failed: {exc}"
            trace.rows.append(row)
            trace.radiation.append(None)
            continue
        U = j_invariant(u)
        row.omega, row.gamma = frame.omega, frame.gamma
        row.orth1, row.orth2 = orthogonality_residuals(u, frame.omega, grid)
        try:
            row.gamma_dot_minus_omega, row.omega_dot = modulation_rhs(U, frame, grid)
        except IllConditionedError as exc:
            row.status = f"modulation system: {exc}"
        row.u_sup = float(np.max(np.abs(u)))
        row.mass_residual = mass_expansion_residual(u, frame.omega, grid)
        row.energy_residual = energy_expansion_residual(u, frame.omega, grid)
        trace.rows.append(row)
        trace.radiation.append(u)
    omegas = [r.omega for r in trace.rows if np.isfinite(r.omega)]
    if omega_ref is None and omegas:
        omega_ref = omegas[-1]
    trace.omega_ref = float(omega_ref) if omega_ref is not None else float("nan")
    if omegas:
        tf = DistortedTransform(trace.omega_ref, grid)
        for row, u in zip(trace.rows, trace.radiation):
            if u is not None:
                coeffs, _ = tf.project_discrete(j_invariant(u))
                row.d1, row.d2 = complex(coeffs.d1), complex(coeffs.d2)
    return trace


def omega_from_mass(psi, grid):
    """omega from M = 4 sqrt(omega), the soliton mass law."""
    return max((mass(psi, grid) / 4.0) ** 2, 1e-6)


def trace_summary(trace: ModulationTrace) -> dict:
    return {"omega_ref": trace.omega_ref, "rows": [asdict(r) for r in trace.rows]}
