"""Run configuration: INI-style sections, typed values, full defaults.

Grammar (documented in README): ``[section]`` headers, ``key = value``
lines, ``#``/``;`` comments.  Values are floats, booleans
(``true``/``false``), bare strings, vectors ``a, b`` and matrices
``a, b; c, d`` (rows split by ``;``).  ``zeta`` and ``voltage_scale`` also
accept ``auto``.  Unknown sections and keys are rejected.
"""

from __future__ import annotations

import configparser
import math
import re
from dataclasses import dataclass, field, fields, replace
from pathlib import Path

import numpy as np

from .errors import ParseError, SeaError, ValidationError
from .geometry import LinkageParams, check_operating_range
from .lyapunov import is_hurwitz, is_spd
from .plant import DisturbanceProfile, MotorParams
from .reference import ReferenceTrajectory

_DEFAULT_LINKAGE = LinkageParams()


@dataclass(frozen=True)
class PlantSection:
    mass: float = 2.0
    damping: float = 0.5
    stiffness: float = 20000.0
    gravity: float = 9.81
    mass_ratio: float = 1.0


@dataclass(frozen=True)
class GeometrySection:
    d1: float = _DEFAULT_LINKAGE.d1
    d2: float = _DEFAULT_LINKAGE.d2
    d3: float = _DEFAULT_LINKAGE.d3
    d4: float = _DEFAULT_LINKAGE.d4
    d5: float = _DEFAULT_LINKAGE.d5
    d6: float = _DEFAULT_LINKAGE.d6
    d7: float = _DEFAULT_LINKAGE.d7
    beta_offset: float = _DEFAULT_LINKAGE.beta_offset


_M = MotorParams()


@dataclass(frozen=True)
class MotorSection:
    R: float = _M.R
    L_ind: float = _M.L_ind
    K_T: float = _M.K_T
    K_EMF: float = _M.K_EMF
    B_M: float = _M.B_M
    J_M: float = _M.J_M
    J_s: float = _M.J_s
    m0: float = _M.m0
    n: float = _M.n
    lead: float = _M.lead
    eta1: float = _M.eta1
    eta2: float = _M.eta2
    zeta: float | None = field(default=47.535, metadata={"auto": True})
    voltage_scale: float | None = field(default=5.68, metadata={"auto": True})


FIXED_P = ((0.375, 0.25), (0.25, 0.1875))


@dataclass(frozen=True)
class ControllerSection:
    A_m: tuple = ((0.0, 1.0), (-6.0, -4.0))
    B_m: tuple = (0.0, 6.0)
    Q: tuple = ((1.0, 0.0), (0.0, 1.0))
    use_fixed_P: bool = False
    fixed_P: tuple = FIXED_P
    f2_without_zeta: bool = False
    model_mass: float = 2.0
    model_damping: float = 0.5
    xm_init: str = field(default="plant", metadata={"choices": ("plant", "zero")})


@dataclass(frozen=True)
class AdaptationSection:
    gamma_x: tuple = ((4000.0, 0.0), (0.0, 50.0))
    gamma_r: float = 2000.0
    gamma_theta: tuple = ((50.0, 0.0), (0.0, 50.0))
    kx0: tuple = (0.0, 0.0)
    kr0: float = 0.0
    theta0: tuple = (0.0, 0.0)
    integrator: str = field(default="euler", metadata={"choices": ("euler", "rk4")})
    freeze: bool = False


@dataclass(frozen=True)
class BacksteppingSection:
    k1: float = 30.0
    k2: float = 10.0
    derivative_tau: float = 0.1


@dataclass(frozen=True)
class SimConfig:
    dt_physics: float = 1e-4
    dt_control: float = 0.01
    duration: float = 20.0
    x1_0: float = 0.2
    x2_0: float = 0.0
    z1_0: float = 0.0
    z2_0: float = 0.0
    mode: str = field(default="full_cascade", metadata={"choices": ("full_cascade", "ideal_mrac")})
    transient_cutoff: float = 2.0
    settle_band: float = 0.05

    @property
    def substeps(self):
        return int(round(self.dt_control / self.dt_physics))

    @property
    def n_records(self):
        return int(math.floor(self.duration / self.dt_control + 1e-9)) + 1

    @property
    def initial_state(self):
        return (self.x1_0, self.x2_0, self.z1_0, self.z2_0)


@dataclass(frozen=True)
class OutputSection:
    dir: str = "out"
    trace: str = "trace.csv"
    metrics: str = "metrics.csv"
    plots: bool = True


@dataclass(frozen=True)
class RunConfig:
    plant: PlantSection = PlantSection()
    motor: MotorSection = MotorSection()
    geometry: GeometrySection = GeometrySection()
    controller: ControllerSection = ControllerSection()
    adaptation: AdaptationSection = AdaptationSection()
    backstepping: BacksteppingSection = BacksteppingSection()
    simulation: SimConfig = SimConfig()
    reference: ReferenceTrajectory = ReferenceTrajectory()
    disturbance: DisturbanceProfile = DisturbanceProfile()
    output: OutputSection = OutputSection()

    # derived parameter objects

    def linkage(self):
        g, p = self.geometry, self.plant
        return LinkageParams(d1=g.d1, d2=g.d2, d3=g.d3, d4=g.d4, d5=g.d5, d6=g.d6, d7=g.d7,
                             beta_offset=g.beta_offset, k=p.stiffness, m=p.mass,
                             damping=p.damping, g=p.gravity)

    def model_linkage(self):
        """Controller-side parameters: true geometry, model mass and damping."""
        c = self.controller
        return replace(self.linkage(), m=c.model_mass, damping=c.model_damping)

    def motor_params(self):
        m = self.motor
        return MotorParams(**{f.name: getattr(m, f.name) for f in fields(MotorParams)})


_SECTION_TYPES = {
    "plant": PlantSection, "motor": MotorSection, "geometry": GeometrySection,
    "controller": ControllerSection, "adaptation": AdaptationSection,
    "backstepping": BacksteppingSection, "simulation": SimConfig,
    "reference": ReferenceTrajectory, "disturbance": DisturbanceProfile,
    "output": OutputSection,
}


def _public_fields(cls):
    return [f for f in fields(cls) if not f.name.startswith("_")]


def _parse_float(text, key):
    try:
        value = float(text)
    except ValueError:
        raise ValueError(f"expected a number, got {text!r}") from None
    if not math.isfinite(value):
        raise ValueError(f"expected a finite number, got {text!r}")
    return value


def _parse_value(text, default, f, key):
    text = text.strip()
    if f.metadata.get("auto") and text.lower() == "auto":
        return None
    if isinstance(default, bool):
        low = text.lower()
        if low in ("true", "yes", "on", "1"):
            return True
        if low in ("false", "no", "off", "0"):
            return False
        raise ValueError(f"expected true/false, got {text!r}")
    if isinstance(default, (int, float)) or default is None:
        return _parse_float(text, key)
    if isinstance(default, str):
        choices = f.metadata.get("choices")
        if choices and text not in choices:
            raise ValidationError(key, f"must be one of {', '.join(choices)}; got {text!r}")
        return text
    if isinstance(default, tuple):
        if default and isinstance(default[0], tuple):
            rows = [r for r in text.split(";")]
            mat = tuple(tuple(_parse_float(c, key) for c in r.split(",")) for r in rows)
            if len({len(r) for r in mat}) != 1:
                raise ValueError("matrix rows differ in length")
            return mat
        if not text:
            return ()
        return tuple(_parse_float(c, key) for c in text.split(","))
    raise TypeError(f"unsupported field type for {key}")


def _format_value(value):
    if value is None:
        return "auto"
    if isinstance(value, bool):
        return "true" if value else "false"
    if isinstance(value, float):
        return repr(value)
    if isinstance(value, tuple):
        if value and isinstance(value[0], tuple):
            return "; ".join(", ".join(repr(float(c)) for c in row) for row in value)
        return ", ".join(repr(float(c)) for c in value)
    return str(value)


def _line_of(text, section, key=None):
    """Line number of ``[section]`` or of ``key`` inside that section."""
    current = None
    for lineno, line in enumerate(text.splitlines(), start=1):
        stripped = line.strip()
        header = re.fullmatch(r"\[\s*(.+?)\s*\]", stripped)
        if header:
            current = header.group(1)
            if key is None and current == section:
                return lineno
        elif key is not None and current == section and re.match(rf"{re.escape(key)}\s*[=:]", stripped):
            return lineno
    return None


def parse_config_text(text, base_dir="."):
    """Parse config text into a validated, fully-defaulted :class:`RunConfig`."""
    parser = configparser.ConfigParser(interpolation=None, strict=True,
                                       comment_prefixes=("#", ";"), inline_comment_prefixes=("#",),
                                       default_section="__unused_default__")
    parser.optionxform = str
    try:
        parser.read_string(text)
    except configparser.Error as exc:
        raise ParseError(f"syntax error: {exc.message.splitlines()[0]}",
                         line=getattr(exc, "lineno", None)) from None

    sections = {}
    for name in parser.sections():
        if name not in _SECTION_TYPES:
            raise ParseError(f"unknown section [{name}]",
                             line=_line_of(text, name))
        cls = _SECTION_TYPES[name]
        known = {f.name: f for f in _public_fields(cls)}
        defaults = cls()
        kwargs = {}
        for key, raw in parser.items(name):
            if key not in known:
                raise ParseError(f"unknown key in [{name}]", key=key,
                                 line=_line_of(text, name, key))
            f = known[key]
            try:
                kwargs[key] = _parse_value(raw, getattr(defaults, key), f, f"{name}.{key}")
            except ValueError as exc:
                raise ParseError(str(exc), key=f"{name}.{key}",
                                 line=_line_of(text, name, key)) from None
        if name == "reference" and "path" in kwargs and kwargs["path"]:
            path = Path(kwargs["path"])
            if not path.is_absolute():
                path = Path(base_dir) / path
            kwargs["path"] = str(path.resolve())
        try:
            sections[name] = cls(**kwargs)
        except ValidationError:
            raise
        except FileNotFoundError as exc:
            raise ValidationError("reference_path", str(exc)) from None
        except SeaError as exc:
            raise ValidationError(name, str(exc)) from None
    cfg = RunConfig(**sections)
    validate(cfg)
    return cfg


def parse_config(path):
    path = Path(path)
    try:
        text = path.read_text(encoding="utf-8")
    except OSError as exc:
        raise ParseError(f"cannot read config: {exc}") from None
    return parse_config_text(text, base_dir=path.parent)


def validate(cfg):
    """Cross-field checks; raises ValidationError naming the constraint."""
    sim = cfg.simulation
    if not sim.duration > 0:
        raise ValidationError("duration_positive", "duration must be > 0")
    if not (sim.dt_physics > 0 and sim.dt_control > 0):
        raise ValidationError("step_positive", "time steps must be > 0")
    ratio = sim.dt_control / sim.dt_physics
    if round(ratio) < 1 or abs(ratio - round(ratio)) > 1e-9 * max(1.0, ratio):
        raise ValidationError("dt_multiple",
                              f"dt_control {sim.dt_control!r} is not an integer multiple of "
                              f"dt_physics {sim.dt_physics!r} (ratio {ratio!r})")
    if not 0 <= sim.transient_cutoff:
        raise ValidationError("cutoff", "transient_cutoff must be >= 0")

    c = cfg.controller
    A_m = np.array(c.A_m, dtype=float)
    if A_m.shape != (2, 2):
        raise ValidationError("shape", "A_m must be 2x2")
    if len(c.B_m) != 2:
        raise ValidationError("shape", "B_m must have 2 entries")
    if not is_hurwitz(A_m):
        raise ValidationError("hurwitz", f"A_m = {c.A_m} is not Hurwitz")
    for name, mat in (("Q", c.Q), ("fixed_P", c.fixed_P),
                      ("gamma_x", cfg.adaptation.gamma_x),
                      ("gamma_theta", cfg.adaptation.gamma_theta)):
        arr = np.array(mat, dtype=float)
        if arr.shape != (2, 2) or not is_spd(arr):
            raise ValidationError("spd", f"{name} = {mat} is not symmetric positive definite")
    for name, value in (("model_mass", c.model_mass), ("model_damping", c.model_damping),
                        ("gamma_r", cfg.adaptation.gamma_r), ("k1", cfg.backstepping.k1),
                        ("k2", cfg.backstepping.k2), ("mass_ratio", cfg.plant.mass_ratio)):
        if not value > 0:
            raise ValidationError("positive", f"{name} must be > 0")
    if cfg.backstepping.derivative_tau < 0:
        raise ValidationError("nonnegative", "derivative_tau must be >= 0")
    a = cfg.adaptation
    if len(a.kx0) != 2 or len(a.theta0) != 2:
        raise ValidationError("shape", "kx0 and theta0 need 2 entries")
    m = cfg.motor
    for name in ("zeta", "voltage_scale"):
        value = getattr(m, name)
        if value is not None and not value > 0:
            raise ValidationError("positive", f"{name} must be > 0 or auto")

    linkage = cfg.linkage()
    cfg.model_linkage()
    cfg.motor_params()
    check_operating_range(linkage)
    return cfg


def format_config(cfg):
    """Render every key of every section; re-parsing yields an equal RunConfig."""
    lines = []
    for sec in fields(RunConfig):
        section = getattr(cfg, sec.name)
        lines.append(f"[{sec.name}]")
        for f in _public_fields(type(section)):
            lines.append(f"{f.name} = {_format_value(getattr(section, f.name))}")
        lines.append("")
    return "\n".join(lines)


def default_config():
    return validate(RunConfig())
