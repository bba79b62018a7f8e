"""Reference hip-angle trajectories."""

from __future__ import annotations

import csv
import math
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

from .errors import BadCsv, ValidationError

KINDS = ("parametric_walk", "csv", "constant", "step", "sine")


def load_reference_csv(path):
    """Read ``t_seconds, angle_radians`` rows; a non-numeric first row is a header."""
    path = Path(path)
    if not path.is_file():
        raise FileNotFoundError(f"reference CSV not found: {path}")
    times, angles = [], []
    with path.open(newline="", encoding="ascii") as fh:
        for lineno, row in enumerate(csv.reader(fh), start=1):
            if not row or all(not c.strip() for c in row):
                continue
            if len(row) != 2:
                raise BadCsv(f"{path}:{lineno}: expected 2 columns, got {len(row)}")
            try:
                t, a = float(row[0]), float(row[1])
            except ValueError:
                if lineno == 1 and not times:
                    continue
                raise BadCsv(f"{path}:{lineno}: non-numeric value") from None
            if not (math.isfinite(t) and math.isfinite(a)):
                raise BadCsv(f"{path}:{lineno}: non-finite value")
            times.append(t)
            angles.append(a)
    if len(times) < 2:
        raise BadCsv(f"{path}: need at least two samples")
    t = np.array(times)
    if np.any(np.diff(t) <= 0):
        raise BadCsv(f"{path}: time column must be strictly increasing")
    return t, np.array(angles)


@dataclass(frozen=True)
class ReferenceTrajectory:
    """Desired hip angle r(t).

    ``parametric_walk`` is a stand-in gait: two harmonics of one cycle,
    ``amplitude sin(2 pi t/T) + amplitude2 sin(4 pi t/T + phase2) + offset``.
    Outside its time span a CSV trajectory holds its end values.
    """

    kind: str = "parametric_walk"
    amplitude: float = 0.25
    amplitude2: float = 0.10
    period: float = 2.0
    phase: float = 0.0
    phase2: float = 0.6
    offset: float = 0.0
    value: float = 0.2
    t_step: float = 0.0
    path: str = ""
    _samples: tuple = field(default=None, repr=False, compare=False)

    def __post_init__(self):
        if self.kind not in KINDS:
            raise ValidationError("reference_kind", f"unknown kind {self.kind!r}")
        if self.kind in ("parametric_walk", "sine") and not self.period > 0:
            raise ValidationError("positive", "reference period must be > 0")
        if self.kind == "csv":
            if not self.path:
                raise ValidationError("reference_path", "csv reference needs a path")
            object.__setattr__(self, "_samples", load_reference_csv(self.path))

    def __call__(self, t):
        kind = self.kind
        if kind == "parametric_walk":
            w = 2.0 * math.pi / self.period
            return (self.amplitude * math.sin(w * t + self.phase)
                    + self.amplitude2 * math.sin(2.0 * w * t + self.phase2) + self.offset)
        if kind == "constant":
            return self.value
        if kind == "step":
            return self.value if t >= self.t_step else 0.0
        if kind == "sine":
            return self.amplitude * math.sin(2.0 * math.pi * t / self.period + self.phase) + self.offset
        ts, rs = self._samples
        return float(np.interp(t, ts, rs))

    def bound(self):
        """An upper bound on sup |r(t)|."""
        kind = self.kind
        if kind == "parametric_walk":
            return abs(self.amplitude) + abs(self.amplitude2) + abs(self.offset)
        if kind in ("constant", "step"):
            return abs(self.value)
        if kind == "sine":
            return abs(self.amplitude) + abs(self.offset)
        return float(np.abs(self._samples[1]).max())


def reference_waveform(ref, t):
    return ref(t)
