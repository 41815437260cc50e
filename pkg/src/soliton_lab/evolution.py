"""Split-step Fourier integrator for i psi_t + psi_xx + |psi|^2 psi = 0.

The linear flow is applied exactly in Fourier space (multiplier e^{-i dt k^2});
the nonlinear flow is the exact pointwise phase rotation e^{i dt |psi|^2}.
"""

from __future__ import annotations

import configparser
import struct
from dataclasses import dataclass, field, replace
from pathlib import Path

import numpy as np

from .errors import BlowupError, ConfigError, ParityError
from .grids import SpatialGrid
from .operator import soliton_profile

SCHEMES = ("strang", "yoshida4")
PERTURBATION_KINDS = ("none", "gaussian", "sech_cos", "random_even", "file")
SNAPSHOT_FORMATS = ("binary", "csv")
RANDOM_MODES = 8
NONLINEAR_PHASE_LIMIT = np.pi / 2
ODD_TOLERANCE = 1e-10
BLOWUP_FACTOR = 10.0
BOUNDARY_FRACTION = 0.1
BINARY_MAGIC = b"NLS1"

_CBRT2 = 2.0 ** (1.0 / 3.0)
_YOSHIDA = (1.0 / (2.0 - _CBRT2), -_CBRT2 / (2.0 - _CBRT2), 1.0 / (2.0 - _CBRT2))


def mass(psi: np.ndarray, grid: SpatialGrid) -> float:
    return float(grid.integrate(np.abs(psi) ** 2))


def energy(psi: np.ndarray, grid: SpatialGrid) -> float:
    """E = int (1/2 |psi_x|^2 - 1/4 |psi|^4), derivative taken spectrally."""
    dpsi = np.fft.ifft(1j * grid.wavenumbers * np.fft.fft(psi))
    return float(grid.integrate(0.5 * np.abs(dpsi) ** 2 - 0.25 * np.abs(psi) ** 4))


@dataclass(frozen=True)
class EvolutionConfig:
    grid: SpatialGrid = field(default_factory=SpatialGrid)
    dt: float = 1e-3
    t_end: float = 10.0
    snapshot_stride: int = 1000
    symmetrize: bool = True
    # Strang at dt = 1e-3 leaves a 1e-5 phase drift on the soliton by t = 10
    scheme: str = "yoshida4"

    def __post_init__(self):
        if not self.dt > 0:
            raise ConfigError(f"dt: must be positive, got {self.dt}")
        if not self.t_end >= 0:
            raise ConfigError(f"t_end: must be non-negative, got {self.t_end}")
        steps = self.t_end / self.dt
        if abs(steps - round(steps)) > 1e-9 * max(1.0, steps):
            raise ConfigError(f"t_end: {self.t_end} is not an integer multiple of dt = {self.dt}")
        if self.snapshot_stride < 1:
            raise ConfigError(f"snapshot_stride: must be >= 1, got {self.snapshot_stride}")
        if self.scheme not in SCHEMES:
            raise ConfigError(f"scheme: expected one of {SCHEMES}, got {self.scheme!r}")

    @property
    def steps(self) -> int:
        return int(round(self.t_end / self.dt))

    def check_phase(self, psi0: np.ndarray) -> None:
        """Nonlinear phase per substep must stay below pi/2.

        The linear multiplier is exact for every k, so it sets no restriction.
        """
        phase = self.dt * float(np.max(np.abs(psi0)) ** 2)
        if phase > NONLINEAR_PHASE_LIMIT:
            raise ConfigError(
                f"dt: nonlinear phase {phase:.3g} per step exceeds {NONLINEAR_PHASE_LIMIT:.3g}")


class SplitStepper:
    """Strang or fourth-order Yoshida composition of the two exact subflows."""

    def __init__(self, grid: SpatialGrid, scheme: str = "strang"):
        if scheme not in SCHEMES:
            raise ConfigError(f"scheme: expected one of {SCHEMES}, got {scheme!r}")
        self.grid = grid
        self.scheme = scheme
        self._k2 = grid.wavenumbers ** 2
        self._cache: dict[float, np.ndarray] = {}

    def _linear(self, psi, dt):
        mult = self._cache.get(dt)
        if mult is None:
            mult = self._cache[dt] = np.exp(-1j * dt * self._k2)
        return np.fft.ifft(mult * np.fft.fft(psi))

    @staticmethod
    def _nonlinear(psi, dt):
        return psi * np.exp(1j * dt * np.abs(psi) ** 2)

    def strang(self, psi, dt):
        psi = self._nonlinear(psi, 0.5 * dt)
        psi = self._linear(psi, dt)
        return self._nonlinear(psi, 0.5 * dt)

    def step(self, psi: np.ndarray, dt: float) -> np.ndarray:
        if self.scheme == "strang":
            return self.strang(psi, dt)
        for weight in _YOSHIDA:
            psi = self.strang(psi, weight * dt)
        return psi


def step(psi: np.ndarray, dt: float, grid: SpatialGrid, scheme: str = "strang") -> np.ndarray:
    return SplitStepper(grid, scheme).step(psi, dt)


@dataclass
class Trajectory:
    times: list = field(default_factory=list)
    fields: list = field(default_factory=list)
    mass: list = field(default_factory=list)
    energy: list = field(default_factory=list)
    boundary_mass: list = field(default_factory=list)
    grid: SpatialGrid | None = None

    def record(self, t, psi, grid):
        self.times.append(float(t))
        self.fields.append(psi.copy())
        self.mass.append(mass(psi, grid))
        self.energy.append(energy(psi, grid))
        outer = np.abs(grid.x) > (1 - BOUNDARY_FRACTION) * grid.half_length
        self.boundary_mass.append(float(grid.spacing * np.sum(np.abs(psi[outer]) ** 2)))

    def mass_drift(self) -> float:
        m = np.asarray(self.mass)
        return float(np.max(np.abs(m - m[0])) / m[0]) if m[0] else float(np.max(np.abs(m)))

    def energy_drift(self) -> float:
        e = np.asarray(self.energy)
        return float(np.max(np.abs(e - e[0])) / max(abs(e[0]), 1e-300))

    def boundary_contaminated(self, tol: float = 1e-8) -> bool:
        return bool(max(self.boundary_mass, default=0.0) > tol)


def check_even(psi: np.ndarray, grid: SpatialGrid, tol: float = ODD_TOLERANCE) -> None:
    odd = np.sqrt(grid.integrate(np.abs(grid.odd_part(psi)) ** 2))
    total = np.sqrt(grid.integrate(np.abs(psi) ** 2))
    if odd > tol * max(total, 1.0):
        raise ParityError(f"initial data has odd component of L2 norm {odd:.3e}; only even data is supported")


def run(config: EvolutionConfig, psi0: np.ndarray) -> Trajectory:
    grid = config.grid
    psi = np.asarray(psi0, dtype=complex).copy()
    grid.check(psi)
    check_even(psi, grid)
    config.check_phase(psi)
    stepper = SplitStepper(grid, config.scheme)
    limit = BLOWUP_FACTOR * float(np.max(np.abs(psi)))
    traj = Trajectory(grid=grid)
    traj.record(0.0, psi, grid)
    for n in range(1, config.steps + 1):
        psi = stepper.step(psi, config.dt)
        if config.symmetrize:
            psi = grid.even_part(psi)
        peak = float(np.max(np.abs(psi)))
        if not np.isfinite(peak) or peak > limit:
            traj.record(n * config.dt, psi, grid)
            raise BlowupError(f"sup|psi| = {peak:.3e} exceeds {limit:.3e} at t = {n * config.dt:.6g}",
                              n * config.dt, traj)
        if n % config.snapshot_stride == 0 or n == config.steps:
            traj.record(n * config.dt, psi, grid)
    return traj


# ------------------------------------------------------------ initial data


@dataclass(frozen=True)
class RunSpec:
    """Everything read from a configuration file."""

    evolution: EvolutionConfig
    omega0: float = 1.0
    gamma0: float = 0.0
    perturbation_kind: str = "gaussian"
    perturbation_amplitude: float = 0.01
    perturbation_file: str | None = None
    seed: int = 0
    snapshot_format: str = "binary"
    diagnostics: bool = True
    omega_ref: float | None = None
    max_freq: float = 12.0
    output_directory: str | None = None

    def perturbation(self) -> np.ndarray:
        x = self.evolution.grid.x
        if self.perturbation_kind == "file":
            return self.perturbation_amplitude * read_perturbation_file(self.perturbation_file, x)
        if self.perturbation_kind == "random_even":
            return random_even_perturbation(self.perturbation_amplitude, x, self.seed)
        return make_perturbation(self.perturbation_kind, self.perturbation_amplitude, x)

    def initial_data(self) -> np.ndarray:
        x = self.evolution.grid.x
        return np.exp(1j * self.gamma0) * (soliton_profile(self.omega0, x) + self.perturbation())

    def echo(self) -> str:
        """Canonical key = value text; parsing it back gives the same RunSpec."""
        evo = self.evolution
        items = {
            "grid.n": evo.grid.points,
            "grid.half_length": evo.grid.half_length,
            "dt": evo.dt,
            "t_end": evo.t_end,
            "snapshot_stride": evo.snapshot_stride,
            "scheme": evo.scheme,
            "symmetrize": evo.symmetrize,
            "omega0": self.omega0,
            "gamma0": self.gamma0,
            "perturbation.kind": self.perturbation_kind,
            "perturbation.amplitude": self.perturbation_amplitude,
            "seed": self.seed,
            "output.snapshot_format": self.snapshot_format,
            "diagnostics.enabled": self.diagnostics,
            "diagnostics.max_freq": self.max_freq,
        }
        if self.perturbation_file is not None:
            items["perturbation.file"] = self.perturbation_file
        if self.omega_ref is not None:
            items["diagnostics.omega_ref"] = self.omega_ref
        if self.output_directory is not None:
            items["output.directory"] = self.output_directory
        lines = []
        for key in sorted(items):
            value = items[key]
            if isinstance(value, bool):
                text = "true" if value else "false"
            elif isinstance(value, float):
                text = f"{value:.17g}"
            else:
                text = str(value)
            lines.append(f"{key} = {text}")
        return "\n".join(lines) + "\n"


def make_perturbation(kind: str, amplitude: float, x: np.ndarray) -> np.ndarray:
    if kind == "none":
        return np.zeros_like(x, dtype=complex)
    if kind == "gaussian":
        return amplitude * np.exp(-x * x / 4).astype(complex)
    if kind == "sech_cos":
        return (amplitude / np.cosh(x) * np.cos(2 * x)).astype(complex)
    raise ConfigError(f"perturbation.kind: expected one of {PERTURBATION_KINDS}, got {kind!r}")


def random_even_perturbation(amplitude: float, x: np.ndarray, seed: int) -> np.ndarray:
    """amplitude * e^{-x^2/4} * sum_k c_k cos(k x / 2) with complex c_k drawn from `seed`.

    Coefficients are normalised so the peak modulus is exactly `amplitude`.
    """
    rng = np.random.default_rng(seed)
    coeffs = rng.normal(size=RANDOM_MODES) + 1j * rng.normal(size=RANDOM_MODES)
    k = 0.5 * np.arange(RANDOM_MODES)
    shape = np.exp(-x * x / 4) * (np.cos(np.outer(x, k)) @ coeffs)
    peak = np.max(np.abs(shape))
    return amplitude * shape / peak if peak > 0 else shape


def read_field_file(path):
    """(x, psi, t) from an NLS1 record or a CSV with columns x, re, im."""
    path = Path(path)
    try:
        head = path.read_bytes()[:4]
    except OSError as exc:
        raise ConfigError(f"cannot read {path}: {exc}") from exc
    if head == BINARY_MAGIC:
        return read_snapshot_binary(path)
    return read_snapshot_csv(path)


def read_perturbation_file(path, x: np.ndarray) -> np.ndarray:
    """Perturbation from a file, linearly interpolated onto x and zero outside its range."""
    if path is None:
        raise ConfigError("perturbation.file: required when perturbation.kind = file")
    xs, values, _ = read_field_file(path)
    order = np.argsort(xs)
    xs, values = xs[order], values[order]
    return (np.interp(x, xs, values.real, 0.0, 0.0)
            + 1j * np.interp(x, xs, values.imag, 0.0, 0.0))


# Documented keys and their parsers.
_KEYS = {
    "grid.n": int,
    "grid.half_length": float,
    "dt": float,
    "t_end": float,
    "omega0": float,
    "gamma0": float,
    "perturbation.kind": str,
    "perturbation.amplitude": float,
    "perturbation.file": str,
    "seed": int,
    "snapshot_stride": int,
    "scheme": str,
    "symmetrize": bool,
    "output.snapshot_format": str,
    "output.directory": str,
    "diagnostics.enabled": bool,
    "diagnostics.omega_ref": float,
    "diagnostics.max_freq": float,
}


def _parse_bool(key, text):
    low = text.strip().lower()
    if low in ("1", "true", "yes", "on"):
        return True
    if low in ("0", "false", "no", "off"):
        return False
    raise ConfigError(f"{key}: expected a boolean, got {text!r}")


def _line_of(text: str, key: str) -> str:
    for number, line in enumerate(text.splitlines(), start=1):
        if line.split("=", 1)[0].strip() == key:
            return f"line {number}: "
    return ""


def parse_config_text(text: str, base_dir=None) -> RunSpec:
    """Parse `key = value` lines (comments with # or ;) into a RunSpec.

    Relative perturbation file paths resolve against `base_dir`.
    """
    parser = configparser.ConfigParser(interpolation=None, comment_prefixes=("#", ";"))
    parser.optionxform = str
    try:
        parser.read_string("[run]\n" + text)
    except configparser.Error as exc:
        raise ConfigError(f"malformed configuration: {exc}") from exc
    values = {}
    for key, text_value in parser["run"].items():
        where = _line_of(text, key)
        if key not in _KEYS:
            raise ConfigError(f"{where}{key}: unknown configuration key")
        kind = _KEYS[key]
        if kind is bool:
            values[key] = _parse_bool(where + key, text_value)
            continue
        try:
            values[key] = kind(text_value)
        except (TypeError, ValueError) as exc:
            raise ConfigError(f"{where}{key}: cannot parse {text_value!r} as {kind.__name__}") from exc
    try:
        return _build_spec(values, base_dir)
    except ConfigError as exc:
        key = str(exc).split(":", 1)[0]
        where = _line_of(text, key)
        raise ConfigError(f"{where}{exc}") from None


def _build_spec(values: dict, base_dir) -> RunSpec:
    grid = SpatialGrid(values.get("grid.half_length", 40.0), values.get("grid.n", 4096))
    evo = EvolutionConfig(
        grid=grid,
        dt=values.get("dt", 1e-3),
        t_end=values.get("t_end", 10.0),
        snapshot_stride=values.get("snapshot_stride", 1000),
        symmetrize=values.get("symmetrize", True),
        scheme=values.get("scheme", "yoshida4"),
    )
    omega0 = values.get("omega0", 1.0)
    if not omega0 > 0:
        raise ConfigError(f"omega0: must be positive, got {omega0}")
    kind = values.get("perturbation.kind", "gaussian")
    if kind not in PERTURBATION_KINDS:
        raise ConfigError(f"perturbation.kind: expected one of {PERTURBATION_KINDS}, got {kind!r}")
    amplitude = values.get("perturbation.amplitude", 0.01)
    if not amplitude >= 0:
        raise ConfigError(f"perturbation.amplitude: must be non-negative, got {amplitude}")
    pfile = values.get("perturbation.file")
    if kind == "file":
        if pfile is None:
            raise ConfigError("perturbation.file: required when perturbation.kind = file")
        path = Path(pfile)
        if not path.is_absolute() and base_dir is not None:
            path = Path(base_dir) / path
        if not path.is_file():
            raise ConfigError(f"perturbation.file: {path} does not exist")
        pfile = str(path)
    fmt = values.get("output.snapshot_format", "binary")
    if fmt not in SNAPSHOT_FORMATS:
        raise ConfigError(f"output.snapshot_format: expected one of {SNAPSHOT_FORMATS}, got {fmt!r}")
    omega_ref = values.get("diagnostics.omega_ref")
    if omega_ref is not None and not omega_ref > 0:
        raise ConfigError(f"diagnostics.omega_ref: must be positive, got {omega_ref}")
    max_freq = values.get("diagnostics.max_freq", 12.0)
    if not max_freq > 0:
        raise ConfigError(f"diagnostics.max_freq: must be positive, got {max_freq}")
    return RunSpec(evo, omega0, values.get("gamma0", 0.0), kind, amplitude, pfile,
                   values.get("seed", 0), fmt, values.get("diagnostics.enabled", True),
                   omega_ref, max_freq, values.get("output.directory"))


def load_config(path) -> RunSpec:
    try:
        text = Path(path).read_text()
    except OSError as exc:
        raise ConfigError(f"cannot read configuration {path}: {exc}") from exc
    return parse_config_text(text, base_dir=Path(path).parent)


def with_evolution(spec: RunSpec, **changes) -> RunSpec:
    return replace(spec, evolution=replace(spec.evolution, **changes))


# ---------------------------------------------------------- snapshot output


def write_snapshot_csv(path, x, psi, t: float) -> None:
    with open(path, "w") as fh:
        fh.write(f"# t = {t:.17g}\n")
        fh.write("x,re_psi,im_psi\n")
        for xv, pv in zip(x, psi):
            fh.write(f"{xv:.17g},{pv.real:.17g},{pv.imag:.17g}\n")


def write_snapshot_binary(path, x, psi, t: float) -> None:
    """NLS1 record: magic, <u4 point count, <f8 time, then x, Re psi, Im psi as <f8 columns."""
    x = np.asarray(x, dtype="<f8")
    psi = np.asarray(psi, dtype=complex)
    with open(path, "wb") as fh:
        fh.write(BINARY_MAGIC)
        fh.write(struct.pack("<Id", x.size, t))
        for col in (x, psi.real, psi.imag):
            fh.write(np.ascontiguousarray(col, dtype="<f8").tobytes())


def read_snapshot_csv(path):
    """Return (x, psi, t) from a snapshot CSV; t is nan when the header line is absent."""
    t = float("nan")
    try:
        lines = Path(path).read_text().splitlines()
    except OSError as exc:
        raise ConfigError(f"cannot read {path}: {exc}") from exc
    if lines and lines[0].startswith("# t ="):
        t = float(lines[0].split("=", 1)[1])
    rows = [ln for ln in lines if ln.strip() and not ln.lstrip().startswith("#")]
    if rows and not rows[0].lstrip()[:1].isdigit() and rows[0].lstrip()[:1] not in "+-.":
        rows = rows[1:]
    try:
        data = np.loadtxt(rows, delimiter=",", ndmin=2, usecols=(0, 1, 2))
    except (IndexError, ValueError) as exc:
        raise ConfigError(f"{path}: not a snapshot CSV ({exc})") from exc
    if data.shape[0] == 0:
        raise ConfigError(f"{path}: snapshot CSV has no data rows")
    return data[:, 0].copy(), data[:, 1] + 1j * data[:, 2], t


def read_snapshot_binary(path):
    """Return (x, psi, t) from an NLS1 record."""
    data = Path(path).read_bytes()
    if data[:4] != BINARY_MAGIC:
        raise ConfigError(f"{path}: not an NLS1 record")
    n, t = struct.unpack_from("<Id", data, 4)
    cols = np.frombuffer(data, dtype="<f8", offset=16, count=3 * n).reshape(3, n)
    return cols[0].copy(), cols[1] + 1j * cols[2], t
