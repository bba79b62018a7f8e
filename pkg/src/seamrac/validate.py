"""Self-contained invariant checks behind the ``validate`` command.

Every check is deterministic: random states come from a fixed seed and the
simulations are short built-in scenarios.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, replace

import numpy as np

from .config import RunConfig
from .controller import backstep_ueq, backstep_v1, hip_matrix, ideal_gains
from .geometry import OPERATING_RANGE, eval_fast
from .integrate import rk4_step
from .lyapunov import implied_q, is_spd, leading_minors, residual, solve_lyapunov
from .plant import limb_rhs, sea_drift
from .sim import build_setup, run_ideal_mrac


@dataclass
class CheckResult:
    name: str
    ok: bool
    detail: str
    warning: str = ""


def coordinate_geometry(phi, p):
    """Independent (L, sin_delta, G) from explicit point coordinates.

    Pivot at the origin, anchor at ``(d5, -d4)`` and the lever tip at
    ``d6 (cos beta, sin beta)``; sin_delta is the signed sine of the angle
    at the lever tip between the lever and the SEA axis.
    """
    beta = phi + p.beta_offset
    cx, cy = p.d6 * math.cos(beta), p.d6 * math.sin(beta)
    ax, ay = p.d5, -p.d4
    length = math.hypot(ax - cx, ay - cy)
    cross = (0.0 - cx) * (ay - cy) - (0.0 - cy) * (ax - cx)
    sin_delta = cross / (p.d6 * length)
    G = -length / (p.k * p.d6 * p.d7 * sin_delta)
    return length, sin_delta, G


def five_point_derivative(y, dt):
    """d/dt of uniformly sampled data from local quartic fits.

    Central five-point stencils in the interior, one-sided five-point
    stencils at the two ends on each side; exact for polynomials of degree 4.
    """
    y = np.asarray(y, dtype=float)
    n = y.size
    if n < 5:
        raise ValueError("need at least five samples")
    out = np.empty(n)
    out[2:-2] = (y[:-4] - 8.0 * y[1:-3] + 8.0 * y[3:-1] - y[4:]) / (12.0 * dt)
    # weights for offsets 0..4 evaluated at offset 0 and 1
    w0 = np.array([-25.0, 48.0, -36.0, 16.0, -3.0]) / 12.0
    w1 = np.array([-3.0, -10.0, 18.0, -6.0, 1.0]) / 12.0
    out[0] = w0 @ y[:5] / dt
    out[1] = w1 @ y[:5] / dt
    out[-1] = -(w0 @ y[::-1][:5]) / dt
    out[-2] = -(w1 @ y[::-1][:5]) / dt
    return out


def check_lyapunov(cfg):
    A_m = np.array(cfg.controller.A_m, dtype=float)
    Q = np.array(cfg.controller.Q, dtype=float)
    P = solve_lyapunov(A_m, Q)
    res = residual(P, A_m, Q)
    ok = res <= 1e-12 * max(1.0, np.abs(Q).max()) and is_spd(P)
    return CheckResult("lyapunov_solve", ok, f"residual {res:.3e}, P = {P.tolist()}")


def check_supplied_p(cfg):
    """Report whether the configured fixed P corresponds to any positive definite Q."""
    A_m = np.array(cfg.controller.A_m, dtype=float)
    P = np.array(cfg.controller.fixed_P, dtype=float)
    Qi = implied_q(P, A_m)
    minors = leading_minors(Qi)
    definite = is_spd(Qi)
    detail = (f"supplied P implies Q = {Qi.tolist()}, leading minors {minors}, "
              f"det {np.linalg.det(Qi):.6g}")
    warning = "" if definite else "supplied P is not a Lyapunov solution for any positive definite Q"
    # only a failure when the run actually uses the supplied P
    ok = definite or not cfg.controller.use_fixed_P
    return CheckResult("supplied_P", ok, detail, warning)


def check_geometry_derivatives(cfg, points=121):
    p = cfg.linkage()
    lo, hi = OPERATING_RANGE
    worst1 = worst2 = worst_oracle = 0.0
    h1, h2 = 1e-5, 1e-4
    for i in range(points):
        phi = lo + (hi - lo) * i / (points - 1)
        _, sin_delta, _, G, dG, d2G = eval_fast(phi, p)
        _, sd_o, G_o = coordinate_geometry(phi, p)
        worst_oracle = max(worst_oracle, abs(G - G_o) / abs(G_o), abs(sin_delta - sd_o))
        gp = coordinate_geometry(phi + h1, p)[2]
        gm = coordinate_geometry(phi - h1, p)[2]
        fd1 = (gp - gm) / (2.0 * h1)
        gp2 = coordinate_geometry(phi + h2, p)[2]
        gm2 = coordinate_geometry(phi - h2, p)[2]
        fd2 = (gp2 - 2.0 * G_o + gm2) / (h2 * h2)
        worst1 = max(worst1, abs(dG - fd1) / max(abs(dG), 1e-12))
        worst2 = max(worst2, abs(d2G - fd2) / max(abs(d2G), 1e-12))
    ok = worst1 <= 1e-6 and worst2 <= 1e-4 and worst_oracle <= 1e-12
    return CheckResult("geometry_derivatives", ok,
                       f"max rel err dG {worst1:.2e}, d2G {worst2:.2e}, oracle {worst_oracle:.2e}")


def check_backstepping(cfg, samples=10_000, seed=0):
    """Closed-loop inner error dynamics equal their design at random states."""
    setup = build_setup(cfg)
    p, fc, acfg = setup.model, setup.model_fc, setup.adaptation
    rng = np.random.default_rng(seed)
    worst = 0.0
    for _ in range(samples):
        x1 = rng.uniform(*OPERATING_RANGE)
        x2, z1, z2 = rng.uniform(-3, 3), rng.uniform(-5, 5), rng.uniform(-200, 200)
        e = rng.uniform(-0.2, 0.2, size=2)
        v_x, v_x_dot, v1_dot = rng.uniform(-5, 5), rng.uniform(-50, 50), rng.uniform(-500, 500)
        state = (x1, x2, z1, z2)
        geom = eval_fast(x1, p)
        phi_ddot = limb_rhs(state, 0.0, p)[1]
        v1 = backstep_v1(e, z1, v_x, v_x_dot, acfg)
        u = backstep_ueq(state, geom, v_x, v1, v1_dot, acfg, fc, p, phi_ddot)
        z2_dot = sea_drift(x1, x2, z1, z2, geom, phi_ddot, fc, p) + u / geom[3]
        lhs = z2_dot - v1_dot
        rhs = -acfg.k2 * (z2 - v1) - (z1 - v_x)
        scale = max(1.0, abs(z2_dot), abs(v1_dot))
        worst = max(worst, abs(lhs - rhs) / scale)
    return CheckResult("backstepping_cancellation", bool(worst <= 1e-10),
                       f"max scaled residual {worst:.2e} over {samples} states")


def check_matching(cfg):
    setup = build_setup(cfg)
    A, lam = hip_matrix(setup.linkage)
    A_m = setup.A_m
    kx, kr = ideal_gains(A, np.array([0.0, 1.0]), lam, A_m, setup.B_m)
    closed = A + lam * np.outer([0.0, 1.0], kx)
    err = float(np.abs(closed - A_m).max())
    short = replace(cfg, simulation=replace(cfg.simulation, duration=2.0),
                    adaptation=replace(cfg.adaptation, freeze=True))
    trace = run_ideal_mrac(short, start_at_ideal=True)
    traj = float(max(np.abs(trace["e1"]).max(), np.abs(trace["e2"]).max()))
    ok = err <= 1e-10 and traj <= 1e-8
    return CheckResult("matching", ok, f"closed-loop matrix err {err:.2e}, trajectory err {traj:.2e}")


def check_clf(cfg, duration=5.0):
    short = replace(cfg, simulation=replace(cfg.simulation, duration=duration))
    trace = run_ideal_mrac(short)
    rise = float(np.diff(trace["v_clf"]).max())
    return CheckResult("clf_monotone", rise <= 1e-9, f"largest per-step increase {rise:.3e}")


def check_rk4_order():
    errors = []
    steps = (0.1, 0.05, 0.025, 0.0125)
    for h in steps:
        y = (1.0,)
        n = int(round(1.0 / h))
        for k in range(n):
            y = rk4_step(lambda t, s: (-s[0],), y, k * h, h)
        errors.append(abs(y[0] - math.exp(-1.0)))
    slope = float(np.polyfit(np.log(steps), np.log(errors), 1)[0])
    return CheckResult("rk4_order", slope >= 3.8, f"fitted order {slope:.3f}")


def run_validation(cfg=None):
    cfg = cfg or RunConfig()
    checks = (check_lyapunov, check_supplied_p, check_geometry_derivatives,
              check_backstepping, check_matching, check_clf)
    results = []
    for check in checks:
        try:
            results.append(check(cfg))
        except Exception as exc:  # a crashing check is a failed check
            results.append(CheckResult(check.__name__.removeprefix("check_"), False,
                                       f"{type(exc).__name__}: {exc}"))
    results.append(check_rk4_order())
    return results
