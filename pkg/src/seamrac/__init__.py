"""Deterministic simulation of an SEA-driven hip joint under MRAC + back-stepping control."""

from .config import RunConfig, default_config, format_config, parse_config, parse_config_text
from .errors import SeaError
from .geometry import LinkageParams, geometry_eval
from .sim import COLUMNS, SimTrace, metrics, run_closed_loop, run_ideal_mrac

__all__ = [
    "COLUMNS", "LinkageParams", "RunConfig", "SeaError", "SimTrace", "default_config",
    "format_config", "geometry_eval", "metrics", "parse_config", "parse_config_text",
    "run_closed_loop", "run_ideal_mrac",
]
