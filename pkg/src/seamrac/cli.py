"""Command-line entry point: ``seamrac {simulate,ideal,sweep,lyapunov,validate}``.

Exit codes: 0 success, 1 run or validation failure, 2 usage or config error.
"""

from __future__ import annotations

import argparse
import sys
from dataclasses import replace
from pathlib import Path

import numpy as np

from .config import format_config, parse_config
from .errors import NotHurwitz, ParseError, SeaError, SimulationFault, SolveSingular, ValidationError
from .lyapunov import is_spd, residual, solve_lyapunov
from .plot import STANDARD_PLOTS, emit_plot
from .sim import METRIC_NAMES, metrics, run_closed_loop, run_ideal_mrac
from .sweep import parse_grid, run_sweep, table_columns
from .traceio import write_metrics, write_trace
from .validate import run_validation

EXIT_OK, EXIT_FAIL, EXIT_USAGE = 0, 1, 2


def _load(path):
    cfg = parse_config(path)
    if cfg.controller.use_fixed_P:
        print("warning: use_fixed_P is set; that P does not solve the Lyapunov equation "
              "for a positive definite Q (see `validate`)", file=sys.stderr)
    return cfg


def _out_dir(cfg, override):
    out = Path(override if override else cfg.output.dir)
    out.mkdir(parents=True, exist_ok=True)
    return out


def _write_outputs(cfg, trace, out, stats, plots=True):
    write_trace(trace, out / cfg.output.trace)
    if stats is not None:
        write_metrics([stats], out / cfg.output.metrics, list(METRIC_NAMES))
    (out / "effective_config.ini").write_text(format_config(cfg), encoding="utf-8")
    if plots and cfg.output.plots and len(trace):
        for name, cols in STANDARD_PLOTS.items():
            emit_plot(trace, cols, out / f"{name}.svg", title=name)


def _print_metrics(stats):
    for name in METRIC_NAMES:
        print(f"{name:>14s} = {stats[name]!r}")


def cmd_simulate(args):
    cfg = _load(args.config)
    if args.duration is not None:
        cfg = replace(cfg, simulation=replace(cfg.simulation, duration=args.duration))
    cfg = replace(cfg, simulation=replace(cfg.simulation, mode="full_cascade"))
    out = _out_dir(cfg, args.out)
    sim = cfg.simulation
    try:
        trace = run_closed_loop(cfg)
    except SimulationFault as exc:
        print(f"error: {exc}", file=sys.stderr)
        if exc.trace is not None:
            _write_outputs(cfg, exc.trace, out, None, plots=False)
        return EXIT_FAIL
    stats = metrics(trace, sim.transient_cutoff, sim.settle_band)
    _write_outputs(cfg, trace, out, stats)
    _print_metrics(stats)
    print(f"wrote {len(trace)} records to {out}")
    return EXIT_OK


def cmd_ideal(args):
    cfg = _load(args.config)
    if args.duration is not None:
        cfg = replace(cfg, simulation=replace(cfg.simulation, duration=args.duration))
    cfg = replace(cfg, simulation=replace(cfg.simulation, mode="ideal_mrac"))
    out = _out_dir(cfg, args.out)
    sim = cfg.simulation
    try:
        trace = run_ideal_mrac(cfg, start_at_ideal=args.start_at_ideal)
    except SimulationFault as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_FAIL
    stats = metrics(trace, sim.transient_cutoff, sim.settle_band)
    _write_outputs(cfg, trace, out, stats)
    _print_metrics(stats)
    rise = float(np.diff(trace["v_clf"]).max()) if len(trace) > 1 else 0.0
    monotone = rise <= 1e-9
    print(f"CLF largest per-step increase {rise!r}: {'non-increasing' if monotone else 'INCREASES'}")
    return EXIT_OK if monotone else EXIT_FAIL


def cmd_sweep(args):
    cfg = _load(args.config)
    grid = parse_grid(args.grid)
    rows = run_sweep(cfg, grid, workers=args.workers)
    out = _out_dir(cfg, args.out)
    columns = table_columns(grid)
    path = out / "sweep.csv"
    write_metrics(rows, path, columns)
    for row in rows:
        print(", ".join(f"{c}={row[c]!r}" for c in columns if c != "error")
              + (f" ({row['error']})" if row["error"] else ""))
    print(f"wrote {len(rows)} rows to {path}")
    return EXIT_OK if all(r["status"] == "ok" for r in rows) else EXIT_FAIL


def _matrix(text, name):
    try:
        values = [float(v) for v in text.replace(";", ",").split(",")]
    except ValueError:
        raise ValidationError(name, f"expected four comma-separated numbers, got {text!r}") from None
    if len(values) != 4:
        raise ValidationError(name, f"expected four entries, got {len(values)}")
    return np.array(values).reshape(2, 2)


def cmd_lyapunov(args):
    A = _matrix(args.am, "am")
    Q = _matrix(args.q, "q")
    try:
        P = solve_lyapunov(A, Q)
    except (NotHurwitz, SolveSingular) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    np.set_printoptions(precision=17)
    print("P =")
    for row in P:
        print("  " + "  ".join(repr(float(v)) for v in row))
    print(f"residual max|PA + A^T P + Q| = {residual(P, A, Q)!r}")
    print(f"P positive definite: {is_spd(P)}")
    return EXIT_OK


def cmd_validate(args):
    cfg = _load(args.config) if args.config else None
    results = run_validation(cfg)
    for r in results:
        print(f"[{'PASS' if r.ok else 'FAIL'}] {r.name}: {r.detail}")
        if r.warning:
            print(f"       warning: {r.warning}")
    return EXIT_OK if all(r.ok for r in results) else EXIT_FAIL


def build_parser():
    parser = argparse.ArgumentParser(prog="seamrac",
                                     description="SEA hip-joint MRAC + back-stepping simulator")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("simulate", help="full-cascade closed-loop run")
    p.add_argument("config")
    p.add_argument("--out", help="output directory (default: [output] dir)")
    p.add_argument("--duration", type=float, help="override the simulated time in seconds")
    p.set_defaults(func=cmd_simulate)

    p = sub.add_parser("ideal", help="MRAC with the hip torque applied directly; CLF diagnostics")
    p.add_argument("config")
    p.add_argument("--out")
    p.add_argument("--duration", type=float)
    p.add_argument("--start-at-ideal", action="store_true", help="start gains at the matching solution")
    p.set_defaults(func=cmd_ideal)

    p = sub.add_parser("sweep", help="gain sweep over a grid file")
    p.add_argument("config")
    p.add_argument("grid")
    p.add_argument("--workers", type=int, default=1, help="parallel worker processes")
    p.add_argument("--out")
    p.set_defaults(func=cmd_sweep)

    p = sub.add_parser("lyapunov", help="solve P A + A^T P = -Q")
    p.add_argument("--am", required=True, help="a11,a12,a21,a22")
    p.add_argument("--q", default="1,0,0,1", help="q11,q12,q21,q22 (default identity)")
    p.set_defaults(func=cmd_lyapunov)

    p = sub.add_parser("validate", help="run the invariant suite")
    p.add_argument("config", nargs="?", help="optional config to validate against")
    p.set_defaults(func=cmd_validate)
    return parser


def main(argv=None):
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return args.func(args)
    except (ParseError, ValidationError) as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except SeaError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_FAIL


if __name__ == "__main__":
    sys.exit(main())
