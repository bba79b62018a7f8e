"""Cartesian gain sweeps over full-cascade runs."""

from __future__ import annotations

import configparser
import itertools
import math
from concurrent.futures import ProcessPoolExecutor
from dataclasses import replace
from pathlib import Path

from .config import validate
from .errors import ParseError, SeaError
from .sim import METRIC_NAMES, metrics, run_closed_loop

GRID_KEYS = ("gamma_x11", "gamma_x22", "gamma_r", "gamma_theta", "k1", "k2")


def apply_cell(cfg, params):
    """Return ``cfg`` with the swept parameters substituted."""
    a, b = cfg.adaptation, cfg.backstepping
    gx = [list(row) for row in a.gamma_x]
    if "gamma_x11" in params:
        gx[0][0] = params["gamma_x11"]
    if "gamma_x22" in params:
        gx[1][1] = params["gamma_x22"]
    gt = a.gamma_theta
    if "gamma_theta" in params:
        g = params["gamma_theta"]
        gt = ((g, gt[0][1]), (gt[1][0], g))
    a = replace(a, gamma_x=tuple(tuple(row) for row in gx), gamma_theta=gt,
                gamma_r=params.get("gamma_r", a.gamma_r))
    b = replace(b, k1=params.get("k1", b.k1), k2=params.get("k2", b.k2))
    return validate(replace(cfg, adaptation=a, backstepping=b))


def grid_cells(grid):
    """Grid points in deterministic order: keys in GRID_KEYS order, last key fastest."""
    unknown = set(grid) - set(GRID_KEYS)
    if unknown:
        raise ValueError(f"unknown sweep keys: {sorted(unknown)}")
    keys = [k for k in GRID_KEYS if k in grid]
    for values in itertools.product(*(grid[k] for k in keys)):
        yield dict(zip(keys, values))


def run_cell(cfg, index, params):
    """One grid cell; failures become a row with status ``error``."""
    row = {"index": index, **params}
    try:
        cell_cfg = apply_cell(cfg, params)
        sim = cell_cfg.simulation
        trace = run_closed_loop(cell_cfg)
        row.update(metrics(trace, sim.transient_cutoff, sim.settle_band))
        row["status"] = "ok"
        row["error"] = ""
    except SeaError as exc:
        row.update({name: math.nan for name in METRIC_NAMES})
        row["status"] = "error"
        row["error"] = f"{type(exc).__name__}: {exc}"
    return row


def _run_cell_args(args):
    return run_cell(*args)


def run_sweep(cfg, grid, workers=1):
    """Metrics table for every grid cell, ordered by grid index.

    ``workers > 1`` runs cells in separate processes; the table is the same
    either way.
    """
    jobs = [(cfg, i, params) for i, params in enumerate(grid_cells(grid))]
    if workers and workers > 1 and len(jobs) > 1:
        with ProcessPoolExecutor(max_workers=workers) as pool:
            return list(pool.map(_run_cell_args, jobs))
    return [run_cell(*job) for job in jobs]


def table_columns(grid):
    keys = [k for k in GRID_KEYS if k in grid]
    return ["index", *keys, *METRIC_NAMES, "status", "error"]


def parse_grid_text(text):
    """``[grid]`` section, one ``key = v1, v2, ...`` line per swept parameter."""
    parser = configparser.ConfigParser(interpolation=None, strict=True, inline_comment_prefixes=("#",),
                                       default_section="__unused_default__")
    parser.optionxform = str
    try:
        parser.read_string(text)
    except configparser.Error as exc:
        raise ParseError(f"grid syntax error: {exc.message.splitlines()[0]}",
                         line=getattr(exc, "lineno", None)) from None
    if parser.sections() != ["grid"]:
        raise ParseError("grid file must contain exactly one [grid] section")
    grid = {}
    for key, raw in parser.items("grid"):
        if key not in GRID_KEYS:
            raise ParseError("unknown sweep key", key=key)
        try:
            values = [float(v) for v in raw.split(",")]
        except ValueError:
            raise ParseError("expected a comma-separated list of numbers", key=key) from None
        grid[key] = values
    if not grid:
        raise ParseError("grid is empty")
    return grid


def parse_grid(path):
    try:
        text = Path(path).read_text(encoding="utf-8")
    except OSError as exc:
        raise ParseError(f"cannot read grid file: {exc}") from None
    return parse_grid_text(text)
