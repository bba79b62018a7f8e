"""Coupled limb + SEA plant.

State ``(x1, x2, z1, z2)``: hip angle, hip rate, SEA torque and its rate.
The limb is a damped point-mass pendulum driven by the SEA torque and an
external disturbance; the SEA torque follows from the spring deflection
dynamics ``dd(Delta) + zeta d(Delta) + omega^2 Delta = u_eq - F_R / m_C``
rewritten through ``Delta = tau_SEA * G(phi)``.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, fields
from typing import NamedTuple

import numpy as np

from .errors import InsufficientTrace, ValidationError
from .geometry import eval_fast

# Identified motor set plus one (n, lead, L_ind, J_s, m0) completion that
# reproduces J_eq = 1.574e-4, a1 = 5.68 and a0 = 270 (see README).
ZETA_IDENTIFIED = 47.535
VOLTAGE_SCALE_IDENTIFIED = 5.68


class PlantState(NamedTuple):
    x1: float
    x2: float
    z1: float
    z2: float


@dataclass(frozen=True)
class MotorParams:
    R: float = 5.56
    L_ind: float = 0.0154584
    K_T: float = 0.202
    K_EMF: float = 0.202
    B_M: float = 16.5e-5
    J_M: float = 1.57e-4
    J_s: float = 1.27687e-6
    m0: float = 0.1
    n: float = 2.08054
    lead: float = 0.01
    eta1: float = 0.9
    eta2: float = 0.9

    def __post_init__(self):
        for f in fields(self):
            value = getattr(self, f.name)
            if not (math.isfinite(value) and value > 0):
                raise ValidationError("positive", f"motor parameter {f.name} must be > 0, got {value!r}")
        for name in ("eta1", "eta2"):
            if getattr(self, name) > 1:
                raise ValidationError("efficiency", f"{name} must lie in (0, 1]")


@dataclass(frozen=True)
class SeaFilterConstants:
    zeta: float
    omega: float
    mass_ratio: float = 1.0
    voltage_scale: float = VOLTAGE_SCALE_IDENTIFIED

    def __post_init__(self):
        for f in fields(self):
            value = getattr(self, f.name)
            if not (math.isfinite(value) and value > 0):
                raise ValidationError("positive", f"{f.name} must be > 0, got {value!r}")


@dataclass(frozen=True)
class DisturbanceProfile:
    """Bounded external hip torque tau_D(t).

    ``piecewise`` holds ``values[i]`` from ``times[i]`` until the next
    breakpoint and is zero before ``times[0]``.
    """

    kind: str = "zero"
    amplitude: float = 0.0
    frequency: float = 0.0
    phase: float = 0.0
    times: tuple = ()
    values: tuple = ()

    def __post_init__(self):
        if self.kind not in ("zero", "constant", "sinusoid", "piecewise"):
            raise ValidationError("disturbance_kind", f"unknown kind {self.kind!r}")
        if not math.isfinite(self.amplitude) or self.amplitude < 0:
            raise ValidationError("bounded", "disturbance amplitude must be finite and >= 0")
        if self.kind == "piecewise":
            if len(self.times) != len(self.values) or not self.times:
                raise ValidationError("piecewise", "times and values must be non-empty and equal length")
            if any(b <= a for a, b in zip(self.times, self.times[1:])):
                raise ValidationError("piecewise", "times must be strictly increasing")
            if max(abs(v) for v in self.values) > self.amplitude:
                raise ValidationError("bounded", "piecewise values exceed amplitude")

    def __call__(self, t):
        kind = self.kind
        if kind == "zero":
            return 0.0
        if kind == "constant":
            return self.amplitude
        if kind == "sinusoid":
            return self.amplitude * math.sin(2.0 * math.pi * self.frequency * t + self.phase)
        value = 0.0
        for tb, vb in zip(self.times, self.values):
            if t >= tb:
                value = vb
            else:
                break
        return value


def equivalent_inertia(mp):
    """Motor-side inertia including screw and nut: J_M + J_s/(n^2 eta1) + l^2 m0/(4 pi^2 n^2 eta1 eta2)."""
    n2 = mp.n * mp.n
    return (mp.J_M + mp.J_s / (n2 * mp.eta1)
            + mp.lead ** 2 * mp.m0 / (4.0 * math.pi ** 2 * n2 * mp.eta1 * mp.eta2))


def filter_coefficients(mp):
    """Return ``(a1, a0)``, the nut-velocity coefficients of the voltage equation.

    The inductive ``L_ind * J_eq`` acceleration term is dropped.
    """
    scale = 2.0 * math.pi * mp.n / (mp.lead * mp.K_T)
    j_eq = equivalent_inertia(mp)
    a1 = scale * (mp.R * j_eq + mp.L_ind * mp.B_M)
    a0 = scale * (mp.B_M * mp.R + mp.K_EMF * mp.K_T)
    return a1, a0


def sea_filter_constants(mp, linkage, mass_ratio=1.0, zeta=ZETA_IDENTIFIED,
                         voltage_scale=VOLTAGE_SCALE_IDENTIFIED):
    """Build the SEA filter constants.

    ``zeta`` / ``voltage_scale`` of ``None`` derive the value from the motor
    parameters; a number overrides it.  omega = sqrt(k / m_C) with
    ``m_C = m / mass_ratio``, fixed for the whole run.
    """
    a1, a0 = filter_coefficients(mp)
    if zeta is None:
        zeta = a0 / a1
    if voltage_scale is None:
        voltage_scale = a1
    omega = math.sqrt(linkage.k * mass_ratio / linkage.m)
    return SeaFilterConstants(zeta=zeta, omega=omega, mass_ratio=mass_ratio,
                              voltage_scale=voltage_scale)


def limb_rhs(s, tau_d, p):
    """Return ``(dx1, dx2)`` for the hip pendulum."""
    x1, x2, z1 = s[0], s[1], s[2]
    lam = 1.0 / (p.m * p.d3 * p.d3)
    return x2, -p.damping * lam * x2 - (p.g / p.d3) * math.sin(x1) + lam * (tau_d + z1)


def sea_drift(x1, x2, z1, z2, geom, phi_ddot, fc, p, f2_without_zeta=False):
    """Drift of the SEA torque-rate equation: everything except ``u_eq / G``.

    ``geom`` is ``eval_fast(x1, p)``.  ``f2_without_zeta`` drops the zeta
    terms for a reduced controller model; the plant itself always keeps them.
    """
    _, _, sin_gamma, G, G1, G2 = geom
    g_dot = G1 * x2
    g_ddot = G2 * x2 * x2 + G1 * phi_ddot
    w2 = fc.omega * fc.omega
    gravity = fc.mass_ratio * p.g * p.d3 * math.sin(x1) / (p.d6 * sin_gamma)
    if f2_without_zeta:
        return (-2.0 * z2 * g_dot - z1 * (g_ddot + w2 * G) - gravity) / G
    zeta = fc.zeta
    return (-z2 * (2.0 * g_dot + zeta * G)
            - z1 * (g_ddot + w2 * G + zeta * g_dot)
            - gravity) / G


def sea_rhs(s, phi_ddot, u_eq, fc, p):
    """Return ``(dz1, dz2)``.

    ``phi_ddot`` must come from :func:`limb_rhs` at the same state: the
    second time derivative of G depends on the hip acceleration.
    """
    x1, x2, z1, z2 = s[0], s[1], s[2], s[3]
    geom = eval_fast(x1, p)
    return z2, sea_drift(x1, x2, z1, z2, geom, phi_ddot, fc, p) + u_eq / geom[3]


def coupled_rhs(t, s, u_eq, dist, p, fc):
    """Full plant derivative; the limb is evaluated first because the SEA needs its acceleration."""
    dx1, dx2 = limb_rhs(s, dist(t), p)
    dz1, dz2 = sea_rhs(s, dx2, u_eq, fc, p)
    return dx1, dx2, dz1, dz2


def sea_end_velocity(x1, x2, p):
    """Rate of change of the SEA length, dL/dt = (d6 S / L) * x2."""
    L, sin_delta = eval_fast(x1, p)[:2]
    return p.d6 * sin_delta * x2


def virtual_to_voltage(u_eq, x_c_dot, f_l_trace, dt, mp, fc):
    """Reconstruct the motor input voltage from the virtual control.

    Diagnostic only.  The load torque ``T_L = l F_L / (2 pi n eta1 eta2)``
    is differentiated by backward difference; the first sample reuses the
    first difference.  All array arguments must share one length.
    """
    f_l = np.asarray(f_l_trace, dtype=float)
    if f_l.ndim != 1 or f_l.size < 2:
        raise InsufficientTrace("load-force trace needs at least two samples")
    t_l = mp.lead * f_l / (2.0 * math.pi * mp.n * mp.eta1 * mp.eta2)
    t_l_dot = np.empty_like(t_l)
    t_l_dot[1:] = np.diff(t_l) / dt
    t_l_dot[0] = t_l_dot[1]
    u_v = fc.zeta * np.asarray(x_c_dot, dtype=float) - np.asarray(u_eq, dtype=float)
    return fc.voltage_scale * u_v + (mp.R * t_l - mp.L_ind * t_l_dot) / mp.K_T
