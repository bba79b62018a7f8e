"""Hip linkage geometry: SEA length, transmission gain and its derivatives.

The SEA spans an anchor at distance ``r = hypot(d4, d5)`` from the hip pivot
and a point C on a lever of length ``d6`` that rotates with the limb.  With
``beta = phi + beta_offset`` the squared SEA length is::

    Q(phi) = d4^2 + d5^2 + d6^2 + 2 d6 (d4 sin(beta) - d5 cos(beta))

which is the law of cosines for the triangle (r, d6, L).  ``delta`` is the
interior angle at C, between the lever and the SEA axis.  Writing
``S = d4 cos(beta) + d5 sin(beta)`` gives ``sin(delta) = S / L`` and
``dQ/dphi = 2 d6 S``, so every quantity below is a rational function of Q and
S and differentiates in closed form.

The angle conventions are reconstructions: the original figure that defines
beta, delta and gamma is not available.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, fields

from .errors import DegenerateAngle, InfeasibleGeometry, ValidationError

# Radicand floor for Q = L^2, in m^2.
FEASIBILITY_EPS = 1e-9
# Admissible sines live in (SINE_EPS, 1 + SINE_EPS].
SINE_EPS = 1e-9

OPERATING_RANGE = (-0.6, 0.6)

_D4, _D5 = 0.035, 0.118
# Lever angle past the perpendicular at phi = 0.  sin_gamma <= 1 needs
# psi = beta - atan2(d5, d4) above about -0.19 rad and sin_delta > 0 needs
# psi < pi/2; 0.65 keeps phi in [-0.6, 0.6] well inside both limits.
LEVER_OFFSET = 0.65


@dataclass(frozen=True)
class LinkageParams:
    """Geometric and physical constants of the single-joint limb.

    ``d1`` and ``d2`` are carried for completeness; no modelled equation
    uses them.  The default ``beta_offset`` keeps both linkage sines inside
    (0, 1] with margin over the whole operating range.
    """

    d1: float = 0.0280
    d2: float = 0.0525
    d3: float = 0.0525
    d4: float = _D4
    d5: float = _D5
    d6: float = 0.040
    d7: float = math.hypot(_D4, _D5)
    beta_offset: float = math.atan2(_D5, _D4) + LEVER_OFFSET
    k: float = 20000.0
    m: float = 2.0
    damping: float = 0.5
    g: float = 9.81

    def __post_init__(self):
        for f in fields(self):
            if f.name == "beta_offset":
                continue
            value = getattr(self, f.name)
            if not (math.isfinite(value) and value > 0):
                raise ValidationError(
                    "positive", f"linkage parameter {f.name} must be > 0, got {value!r}"
                )
        if not math.isfinite(self.beta_offset):
            raise ValidationError("finite", "beta_offset must be finite")

    @property
    def inertia(self):
        """Point-mass limb inertia m*d3^2 about the hip."""
        return self.m * self.d3 ** 2

    @property
    def anchor_radius(self):
        return math.hypot(self.d4, self.d5)


@dataclass(frozen=True)
class GeometryEval:
    L_sea: float
    sin_delta: float
    sin_gamma: float
    G: float
    dG_dphi: float
    d2G_dphi2: float


def _radicand(beta, p):
    return (p.d4 ** 2 + p.d5 ** 2 + p.d6 ** 2
            + 2.0 * p.d6 * (p.d4 * math.sin(beta) - p.d5 * math.cos(beta)))


def _checked_sine(value, name, phi):
    if not (SINE_EPS < value <= 1.0 + SINE_EPS):
        raise DegenerateAngle(f"{name} = {value!r} at phi = {phi!r}")
    return value


def lsea_length(phi, p):
    """SEA length L(phi) in metres."""
    q = _radicand(phi + p.beta_offset, p)
    if q < FEASIBILITY_EPS:
        raise InfeasibleGeometry(f"SEA length radicand {q!r} below {FEASIBILITY_EPS} at phi = {phi!r}")
    return math.sqrt(q)


def angle_sines(phi, p):
    """Return ``(sin_delta, sin_gamma)`` at joint angle ``phi``.

    ``sin_gamma`` is defined as ``d7 * sin_delta / L`` so that both closed
    forms of the reaction force coincide.
    """
    L = lsea_length(phi, p)
    beta = phi + p.beta_offset
    s = p.d4 * math.cos(beta) + p.d5 * math.sin(beta)
    sin_delta = _checked_sine(s / L, "sin_delta", phi)
    sin_gamma = _checked_sine(p.d7 * sin_delta / L, "sin_gamma", phi)
    return sin_delta, sin_gamma


def gravity_reaction_torque(phi, p):
    return p.m * p.g * p.d3 * math.sin(phi)


def reaction_force(phi, p):
    """Reaction force along the SEA at point C, in newtons."""
    _, sin_gamma = angle_sines(phi, p)
    return gravity_reaction_torque(phi, p) / (p.d6 * sin_gamma)


def eval_fast(phi, p):
    """Geometry evaluation for the integrator inner loop.

    Returns ``(L, sin_delta, sin_gamma, G, dG, d2G)`` as plain floats and
    performs the same feasibility checks as the public functions.
    """
    beta = phi + p.beta_offset
    sb = math.sin(beta)
    cb = math.cos(beta)
    d4, d5, d6 = p.d4, p.d5, p.d6
    q = d4 * d4 + d5 * d5 + d6 * d6 + 2.0 * d6 * (d4 * sb - d5 * cb)
    if q < FEASIBILITY_EPS:
        raise InfeasibleGeometry(f"SEA length radicand {q!r} below {FEASIBILITY_EPS} at phi = {phi!r}")
    L = math.sqrt(q)
    s = d4 * cb + d5 * sb
    s1 = d5 * cb - d4 * sb
    sin_delta = s / L
    if not (SINE_EPS < sin_delta <= 1.0 + SINE_EPS):
        raise DegenerateAngle(f"sin_delta = {sin_delta!r} at phi = {phi!r}")
    sin_gamma = p.d7 * sin_delta / L
    if not (SINE_EPS < sin_gamma <= 1.0 + SINE_EPS):
        raise DegenerateAngle(f"sin_gamma = {sin_gamma!r} at phi = {phi!r}")

    # G = -c Q/S with Q' = 2 d6 S, Q'' = 2 d6 S', S'' = -S
    c = 1.0 / (p.k * d6 * p.d7)
    q1 = 2.0 * d6 * s
    q2 = 2.0 * d6 * s1
    num = q1 * s - q * s1
    u = q / s
    u1 = num / (s * s)
    u2 = (q2 * s + q * s) / (s * s) - 2.0 * s1 * num / (s * s * s)
    return L, sin_delta, sin_gamma, -c * u, -c * u1, -c * u2


def geometry_eval(phi, p):
    """Transmission gain G(phi) = -L / (k d6 d7 sin(delta)) and its derivatives."""
    return GeometryEval(*eval_fast(phi, p))


def torque_from_deflection(delta, phi, p):
    """SEA torque produced by a spring deflection ``delta`` (m)."""
    L, sin_delta = lsea_length(phi, p), angle_sines(phi, p)[0]
    return delta * (-p.k * p.d6 * p.d7 * sin_delta / L)


def deflection_from_torque(tau, phi, p):
    return tau * geometry_eval(phi, p).G


def check_operating_range(p, lo=OPERATING_RANGE[0], hi=OPERATING_RANGE[1], points=121):
    """Raise if the linkage is singular anywhere on a uniform grid over [lo, hi]."""
    for i in range(points):
        phi = lo + (hi - lo) * i / (points - 1)
        try:
            ev = eval_fast(phi, p)
        except (InfeasibleGeometry, DegenerateAngle) as exc:
            raise ValidationError("triangle_feasibility", str(exc)) from None
        if not ev[3] < 0.0:
            raise ValidationError("transmission_sign", f"G({phi!r}) = {ev[3]!r} is not negative")
