"""Command-line entry point: verify, simulate, decompose, report.

Exit codes: 0 success, 1 check failure or missing artifact, 2 usage or configuration error.
"""

from __future__ import annotations

import argparse
import csv
import json
import math
import os
import sys
from pathlib import Path

import numpy as np

from .errors import ConfigError, DecompositionError, ParityError, SolitonLabError
from .evolution import load_config, parse_config_text, read_field_file
from .grids import SpatialGrid
from .modulation import decompose, omega_from_mass, orthogonality_residuals
from .operator import SolitonFrame, j_invariant
from .pipeline import (DEFAULT_CONFIG_TEXT, OMEGA_WEIGHT, missing_artifacts, read_diagnostics,
                       read_profile_samples, read_trace, simulate, write_run)
from .transform import DistortedTransform
from .verification import SUITES, checks_for, run_checks, suite_report

EXIT_OK, EXIT_FAILED, EXIT_USAGE = 0, 1, 2
THREADS_ENV = "SOLITON_LAB_THREADS"


class UsageError(Exception):
    pass


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        raise UsageError(f"{self.prog}: {message}")


def thread_cap() -> int:
    raw = os.environ.get(THREADS_ENV)
    if raw is None:
        return os.cpu_count() or 1
    try:
        value = int(raw)
    except ValueError:
        raise UsageError(f"{THREADS_ENV} must be a positive integer, got {raw!r}") from None
    if value < 1:
        raise UsageError(f"{THREADS_ENV} must be a positive integer, got {raw!r}")
    return value


def resolve_jobs(requested: int | None) -> int:
    cap = thread_cap()
    if requested is not None and requested < 1:
        raise UsageError(f"--jobs must be positive, got {requested}")
    return min(requested or 1, cap)


def _fmt(value) -> str:
    return f"{value:.17g}"


def _dump(doc) -> str:
    return json.dumps(doc, sort_keys=True, indent=1, allow_nan=False) + "\n"


# ---------------------------------------------------------------- verify


def cmd_verify(args) -> int:
    suite = args.suite_option or args.suite or "all"
    if suite != "all" and suite not in SUITES:
        raise UsageError(f"unknown suite {suite!r}; choose from {', '.join(SUITES + ('all',))}")
    results = run_checks(checks_for(suite), resolve_jobs(args.jobs))
    report = suite_report(suite, results)
    text = _dump(report)
    if args.out:
        Path(args.out).write_text(text)
    else:
        sys.stdout.write(text)
    for r in results:
        status = "PASS" if r.passed else "FAIL"
        print(f"{status} {r.suite}/{r.name}: {r.basis}", file=sys.stderr)
    return EXIT_OK if report["passed"] else EXIT_FAILED


# ---------------------------------------------------------------- simulate


def cmd_simulate(args) -> int:
    if args.config:
        spec = load_config(args.config)
    else:
        spec = parse_config_text(DEFAULT_CONFIG_TEXT)
    out = args.out or spec.output_directory
    if not out:
        raise UsageError("simulate needs --out or output.directory in the configuration")
    result = simulate(spec, omega_ref=args.omega_ref)
    write_run(result, out)
    print(f"run {result.run_id} written to {out}")
    for check in result.checks:
        print(check.line())
    if result.error:
        print(result.error, file=sys.stderr)
    return EXIT_OK if result.passed else EXIT_FAILED


# ---------------------------------------------------------------- decompose


def grid_from_samples(x: np.ndarray) -> SpatialGrid:
    """Recover the periodic grid from its sample points x_j = -L + j h."""
    n = x.size
    grid = SpatialGrid(float(-x[0]), n)
    if not np.allclose(grid.x, x, rtol=0, atol=1e-9 * max(1.0, grid.half_length)):
        raise ConfigError("snapshot x column is not a symmetric periodic grid x_j = -L + 2 L j / N")
    return grid


def cmd_decompose(args) -> int:
    x, psi, t = read_field_file(args.snapshot)
    grid = grid_from_samples(x)
    guess = SolitonFrame(args.omega_ref if args.omega_ref else omega_from_mass(psi, grid), 0.0)
    try:
        frame, u = decompose(psi, guess, grid)
    except ParityError as exc:
        raise ConfigError(str(exc)) from exc
    except DecompositionError as exc:
        print(f"decomposition failed: {exc}", file=sys.stderr)
        return EXIT_FAILED
    r1, r2 = orthogonality_residuals(u, frame.omega, grid)
    coeffs, _ = DistortedTransform(frame.omega, grid).project_discrete(j_invariant(u))
    doc = {
        "t": None if math.isnan(t) else float(t),
        "omega": frame.omega,
        "gamma": frame.gamma,
        "u_sup": float(np.max(np.abs(u))),
        "orthogonality_residuals": [abs(r1), abs(r2)],
        "discrete_components_own_omega": [abs(coeffs.d1), abs(coeffs.d2)],
    }
    sys.stdout.write(_dump(doc))
    if args.out:
        with open(args.out, "w", newline="") as fh:
            w = csv.writer(fh, lineterminator="\n")
            w.writerow(["x", "re_u", "im_u"])
            for xv, uv in zip(grid.x, u):
                w.writerow([_fmt(xv), _fmt(uv.real), _fmt(uv.imag)])
    return EXIT_OK


# ---------------------------------------------------------------- report


def _write_columns(path, header, rows) -> None:
    with open(path, "w", newline="") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(header)
        for row in rows:
            w.writerow([_fmt(v) for v in row])


def cmd_report(args) -> int:
    run_dir = Path(args.run_dir)
    missing = missing_artifacts(run_dir)
    if missing:
        print(f"missing artifacts in {run_dir}: {', '.join(missing)}", file=sys.stderr)
        return EXIT_FAILED
    out = Path(args.out) if args.out else run_dir / "report"
    out.mkdir(parents=True, exist_ok=True)
    diag = read_diagnostics(run_dir)
    trace = read_trace(run_dir)
    t = trace["t"]
    jt = np.sqrt(1 + t * t)
    _write_columns(out / "radiation_decay.csv", ["t", "sup_u_times_sqrt_jt"],
                   zip(t, trace["u_sup"] * np.sqrt(jt)))
    _write_columns(out / "omega_convergence.csv", ["t", "omega_gap_times_jt_0.8"],
                   zip(t, np.abs(trace["omega"] - trace["omega"][-1]) * jt**OMEGA_WEIGHT))
    samples = read_profile_samples(run_dir)
    times = sorted(samples)
    if times:
        xi = samples[times[0]][0]
        _write_columns(out / "profile_abs.csv", ["xi"] + [f"abs_f_plus_t={_fmt(s)}" for s in times],
                       zip(xi, *(samples[s][1] for s in times)))
        _write_columns(out / "profile_phase.csv", ["xi"] + [f"arg_w_plus_t={_fmt(s)}" for s in times],
                       zip(xi, *(samples[s][2] for s in times)))
    lines = [f"run {diag['run_id']}"]
    if diag.get("error"):
        lines.append(f"run error: {diag['error']}")
    failed = bool(diag.get("error"))
    for check in diag.get("acceptance_checks", []):
        status = "PASS" if check["passed"] else "FAIL"
        failed |= not check["passed"]
        lines.append(f"{status} {check['name']}: value {_num(check['value'])}, "
                     f"tolerance {_num(check['tolerance'])}")
    for rep in diag.get("decay_reports", []):
        status = "PASS" if rep["passed"] else "FAIL"
        lines.append(f"{status} fit {rep['law']}: exponent {_num(rep['exponent'])}, "
                     f"band [{_edge(rep['band'][0], '-inf')}, {_edge(rep['band'][1], 'inf')}]")
    verdict = diag.get("scattering_verdict", {}).get("verdict")
    lines.append(f"scattering verdict: {verdict}")
    text = "\n".join(lines) + "\n"
    (out / "summary.txt").write_text(text)
    sys.stdout.write(text)
    return EXIT_FAILED if failed else EXIT_OK


def _edge(value, unbounded: str) -> str:
    """Band edges are stored as null when unbounded."""
    return unbounded if value is None else _fmt(float(value))


def _num(value) -> str:
    if value is None:
        return "nan"
    return _fmt(float(value))


# ---------------------------------------------------------------- entry


def build_parser() -> argparse.ArgumentParser:
    parser = _Parser(prog="soliton-lab", description=__doc__.splitlines()[0])
    sub = parser.add_subparsers(dest="command", parser_class=_Parser)

    v = sub.add_parser("verify", help="run verification suites and print a JSON report")
    v.add_argument("suite", nargs="?", help=f"one of {', '.join(SUITES)}, all")
    v.add_argument("--suite", dest="suite_option", help="same as the positional suite")
    v.add_argument("--jobs", type=int, help=f"parallel checks, capped by {THREADS_ENV}")
    v.add_argument("--out", help="write the JSON report here instead of stdout")
    v.set_defaults(func=cmd_verify)

    s = sub.add_parser("simulate", help="run the perturbed-soliton pipeline")
    s.add_argument("--config", help="key = value configuration file (default: built-in pipeline config)")
    s.add_argument("--out", help="run directory")
    s.add_argument("--omega-ref", type=float, help="fixed reference omega for the profile")
    s.add_argument("--jobs", type=int, help="accepted for symmetry; a single trajectory runs serially")
    s.set_defaults(func=cmd_simulate)

    d = sub.add_parser("decompose", help="decompose one snapshot file (NLS1 or CSV)")
    d.add_argument("snapshot")
    d.add_argument("--omega-ref", type=float, help="initial guess for omega (default: from the mass)")
    d.add_argument("--out", help="write the radiation u as CSV")
    d.set_defaults(func=cmd_decompose)

    r = sub.add_parser("report", help="summarise a run directory and emit plot-ready CSVs")
    r.add_argument("run_dir")
    r.add_argument("--out", help="directory for the CSVs (default: RUN_DIR/report)")
    r.set_defaults(func=cmd_report)
    return parser


def main(argv=None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
        if not getattr(args, "command", None):
            raise UsageError(parser.format_usage().strip())
        if getattr(args, "jobs", None) is not None:
            resolve_jobs(args.jobs)
        return args.func(args)
    except UsageError as exc:
        print(exc, file=sys.stderr)
        return EXIT_USAGE
    except ConfigError as exc:
        print(f"configuration error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except SolitonLabError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_FAILED


if __name__ == "__main__":
    sys.exit(main())
