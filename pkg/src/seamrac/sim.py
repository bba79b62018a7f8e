"""Fixed-step closed-loop simulation and run metrics.

The plant is integrated with RK4 substeps of ``dt_physics`` while the
controller output is held for ``dt_control`` (zero-order hold).  Runs are
fully deterministic: no randomness, no wall-clock dependence.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .config import RunConfig
from .controller import (AdaptationConfig, AdaptiveGains, CascadeController, ReferenceModel,
                         clf_value, hip_matrix, ideal_gains)
from .errors import (DegenerateAngle, EmptyTrace, GeometryFault, InfeasibleGeometry,
                     NonFiniteDerivative, NonFiniteState, UnknownColumn)
from .geometry import eval_fast
from .integrate import rk4_step
from .lyapunov import solve_lyapunov
from .plant import coupled_rhs, limb_rhs, sea_filter_constants, virtual_to_voltage

COLUMNS = ("t", "r", "x1", "x2", "x_m1", "x_m2", "e1", "e2", "z1", "z2",
           "v_x", "v_1", "u_eq", "k_x1", "k_x2", "k_r", "theta1", "theta2",
           "tau_d", "v_clf", "v_in")
_INDEX = {name: i for i, name in enumerate(COLUMNS)}


class SimTrace:
    """Records sampled once per control tick, one column per :data:`COLUMNS` entry."""

    def __init__(self, data=None):
        if data is None:
            data = np.empty((0, len(COLUMNS)))
        data = np.asarray(data, dtype=float)
        if data.ndim != 2 or data.shape[1] != len(COLUMNS):
            raise ValueError(f"trace data must have {len(COLUMNS)} columns")
        self.data = data

    @classmethod
    def from_rows(cls, rows):
        if not rows:
            return cls()
        return cls(np.array(rows, dtype=float))

    def __len__(self):
        return self.data.shape[0]

    def __getitem__(self, name):
        try:
            return self.data[:, _INDEX[name]]
        except KeyError:
            raise UnknownColumn(f"no trace column {name!r}") from None

    def __eq__(self, other):
        return isinstance(other, SimTrace) and np.array_equal(self.data, other.data, equal_nan=True)

    @property
    def columns(self):
        return COLUMNS


@dataclass
class RunSetup:
    """Every runtime object a simulation needs, built from a :class:`RunConfig`."""

    linkage: object
    model: object
    motor: object
    fc: object
    model_fc: object
    adaptation: AdaptationConfig
    clf_config: AdaptationConfig
    A_m: np.ndarray
    B_m: np.ndarray
    gains0: AdaptiveGains
    ideal: AdaptiveGains
    reference: object
    disturbance: object


def build_setup(cfg: RunConfig):
    linkage = cfg.linkage()
    model = cfg.model_linkage()
    mp = cfg.motor_params()
    mo = cfg.motor
    ratio = cfg.plant.mass_ratio
    fc = sea_filter_constants(mp, linkage, ratio, mo.zeta, mo.voltage_scale)
    model_fc = sea_filter_constants(mp, model, ratio, mo.zeta, mo.voltage_scale)
    c, a, b = cfg.controller, cfg.adaptation, cfg.backstepping
    A_m = np.array(c.A_m, dtype=float)
    B_m = np.array(c.B_m, dtype=float)
    Q = np.array(c.Q, dtype=float)
    P = np.array(c.fixed_P, dtype=float) if c.use_fixed_P else solve_lyapunov(A_m, Q)
    _, lam_model = hip_matrix(model)
    common = dict(gamma_x=np.array(a.gamma_x, dtype=float), gamma_r=a.gamma_r,
                  gamma_theta=np.array(a.gamma_theta, dtype=float), Q=Q, P=P,
                  k1=b.k1, k2=b.k2)
    adaptation = AdaptationConfig(Lambda=lam_model, **common)
    A_true, lam_true = hip_matrix(linkage)
    clf_config = AdaptationConfig(Lambda=lam_true, **common)
    kx, kr = ideal_gains(A_true, np.array([0.0, 1.0]), lam_true, A_m, B_m)
    # theta2 is re-anchored to -tau_D(t) when the CLF is evaluated
    ideal = AdaptiveGains(kx, kr, np.array([linkage.m * linkage.g * linkage.d3, 0.0]))
    gains0 = AdaptiveGains(np.array(a.kx0, dtype=float), float(a.kr0),
                           np.array(a.theta0, dtype=float))
    return RunSetup(linkage, model, mp, fc, model_fc, adaptation, clf_config, A_m, B_m,
                    gains0, ideal, cfg.reference, cfg.disturbance)


def _clf(setup, e, gains, tau_d):
    ideal = setup.ideal
    ideal.theta_hat[1] = -tau_d
    return clf_value(e, gains, ideal, setup.clf_config)


def _fault(exc, t, rows):
    trace = SimTrace.from_rows(rows)
    if isinstance(exc, (InfeasibleGeometry, DegenerateAngle)):
        return GeometryFault(f"geometry fault at t={t!r}: {exc}", trace)
    return NonFiniteState(f"non-finite state at t={t!r}: {exc}", trace)


def run_closed_loop(cfg: RunConfig, setup=None):
    """Full cascade: MRAC -> back-stepping -> u_eq held over each control tick.

    Raises GeometryFault / NonFiniteState carrying the partial trace.
    """
    setup = setup or build_setup(cfg)
    sim = cfg.simulation
    dt, h, nsub = sim.dt_control, sim.dt_physics, sim.substeps
    p, fc = setup.linkage, setup.fc
    ref, dist = setup.reference, setup.disturbance
    state = tuple(float(v) for v in sim.initial_state)
    xm0 = state[:2] if cfg.controller.xm_init == "plant" else (0.0, 0.0)
    rm = ReferenceModel(setup.A_m, setup.B_m, xm0)
    ctrl = CascadeController(setup.adaptation, rm, setup.model_fc, setup.model, dt,
                             cfg.backstepping.derivative_tau, gains=setup.gains0,
                             f2_without_zeta=cfg.controller.f2_without_zeta, freeze=cfg.adaptation.freeze)
    co_integrate = cfg.adaptation.integrator == "rk4"
    rows = []
    n = sim.n_records
    t = 0.0
    for i in range(n):
        t = i * dt
        r = ref(t)
        tau_d = dist(t)
        g = ctrl.gains
        try:
            cmd = ctrl.command(state, r)
        except (InfeasibleGeometry, DegenerateAngle) as exc:
            raise _fault(exc, t, rows) from exc
        if not (math.isfinite(cmd.u_eq) and all(map(math.isfinite, state))):
            raise NonFiniteState(f"non-finite control or state at t={t!r}", SimTrace.from_rows(rows))
        e = cmd.e
        rows.append((t, r, state[0], state[1], rm.X_m[0], rm.X_m[1], e[0], e[1],
                     state[2], state[3], cmd.v_x, cmd.v1, cmd.u_eq,
                     g.K_x_hat[0], g.K_x_hat[1], g.K_r_hat, g.theta_hat[0], g.theta_hat[1],
                     tau_d, _clf(setup, e, g, tau_d), math.nan))
        if i == n - 1:
            break
        u = cmd.u_eq

        def rhs(tt, s):
            return coupled_rhs(tt, s, u, dist, p, fc)

        try:
            if co_integrate:
                state = _co_integrate(ctrl, state, t, u, setup, ref, h, nsub)
            else:
                for k in range(nsub):
                    state = rk4_step(rhs, state, t + k * h, h)
                ctrl.advance_euler(r)
        except (InfeasibleGeometry, DegenerateAngle, NonFiniteDerivative) as exc:
            raise _fault(exc, t, rows) from exc
        if not all(map(math.isfinite, state)):
            raise NonFiniteState(f"non-finite state after t={t!r}", SimTrace.from_rows(rows))

    trace = SimTrace.from_rows(rows)
    _fill_voltage(trace, setup, dt)
    return trace


def _co_integrate(ctrl, state, t0, u, setup, ref, h, nsub):
    """Integrate plant, reference model and gains together over one tick."""
    p, fc, acfg = setup.linkage, setup.fc, setup.adaptation
    dist = setup.disturbance
    am, bm = setup.A_m, setup.B_m
    pb0, pb1 = acfg.PB
    gx, gr, gt = acfg.gamma_x, acfg.gamma_r, acfg.gamma_theta
    frozen = ctrl.freeze

    def rhs(tt, y):
        plant = coupled_rhs(tt, y[:4], u, dist, p, fc)
        r = ref(tt)
        xm1, xm2 = y[4], y[5]
        dxm1 = am[0, 0] * xm1 + am[0, 1] * xm2 + bm[0] * r
        dxm2 = am[1, 0] * xm1 + am[1, 1] * xm2 + bm[1] * r
        if frozen:
            return plant + (dxm1, dxm2, 0.0, 0.0, 0.0, 0.0, 0.0)
        x1, x2 = y[0], y[1]
        s = (x1 - xm1) * pb0 + (x2 - xm2) * pb1
        sx = math.sin(x1)
        return plant + (dxm1, dxm2,
                        -(gx[0, 0] * x1 + gx[0, 1] * x2) * s,
                        -(gx[1, 0] * x1 + gx[1, 1] * x2) * s,
                        -gr * r * s,
                        -(gt[0, 0] * sx + gt[0, 1]) * s,
                        -(gt[1, 0] * sx + gt[1, 1]) * s)

    g = ctrl.gains
    y = tuple(state) + (ctrl.ref.X_m[0], ctrl.ref.X_m[1]) + tuple(g.as_vector())
    for k in range(nsub):
        y = rk4_step(rhs, y, t0 + k * h, h)
    ctrl.ref.X_m = np.array(y[4:6])
    ctrl.gains = AdaptiveGains.from_vector(y[6:11])
    return y[:4]


def _fill_voltage(trace, setup, dt):
    """Motor-voltage reconstruction column; needs two or more records."""
    if len(trace) < 2:
        return
    p = setup.linkage
    x1, x2, z1 = trace["x1"], trace["x2"], trace["z1"]
    n = len(trace)
    x_c_dot = np.empty(n)
    f_l = np.empty(n)
    for i in range(n):
        _, sin_delta, _, G, _, _ = eval_fast(x1[i], p)
        x_c_dot[i] = p.d6 * sin_delta * x2[i]
        f_l[i] = p.k * G * z1[i]
    trace.data[:, _INDEX["v_in"]] = virtual_to_voltage(trace["u_eq"], x_c_dot, f_l, dt,
                                                       setup.motor, setup.fc)


def run_ideal_mrac(cfg: RunConfig, setup=None, start_at_ideal=False):
    """MRAC alone: v_x acts directly as hip torque, everything integrated continuously.

    Plant, reference model and gains share one RK4 state advanced at
    ``dt_physics``; r(t) and tau_D(t) are evaluated at the stage times.
    ``start_at_ideal`` starts the gains at the matching solution (theta2 at
    ``-tau_D(0)``).  SEA columns hold the applied torque in ``z1`` and NaN
    where undefined.
    """
    setup = setup or build_setup(cfg)
    sim = cfg.simulation
    dt, h, nsub = sim.dt_control, sim.dt_physics, sim.substeps
    p, ref, dist, acfg = setup.linkage, setup.reference, setup.disturbance, setup.adaptation
    am, bm = setup.A_m, setup.B_m
    pb0, pb1 = acfg.PB
    gx, gr, gt = acfg.gamma_x, acfg.gamma_r, acfg.gamma_theta
    frozen = cfg.adaptation.freeze

    if start_at_ideal:
        g0 = setup.ideal.copy()
        g0.theta_hat[1] = -dist(0.0)
    else:
        g0 = setup.gains0
    x0 = sim.initial_state
    xm0 = x0[:2] if cfg.controller.xm_init == "plant" else (0.0, 0.0)

    def rhs(tt, y):
        x1, x2, xm1, xm2, k1, k2, kr, th1, th2 = y
        r = ref(tt)
        sx = math.sin(x1)
        v = k1 * x1 + k2 * x2 + kr * r + th1 * sx + th2
        dx1, dx2 = limb_rhs((x1, x2, v), dist(tt), p)
        dxm1 = am[0, 0] * xm1 + am[0, 1] * xm2 + bm[0] * r
        dxm2 = am[1, 0] * xm1 + am[1, 1] * xm2 + bm[1] * r
        if frozen:
            return dx1, dx2, dxm1, dxm2, 0.0, 0.0, 0.0, 0.0, 0.0
        s = (x1 - xm1) * pb0 + (x2 - xm2) * pb1
        return (dx1, dx2, dxm1, dxm2,
                -(gx[0, 0] * x1 + gx[0, 1] * x2) * s,
                -(gx[1, 0] * x1 + gx[1, 1] * x2) * s,
                -gr * r * s,
                -(gt[0, 0] * sx + gt[0, 1]) * s,
                -(gt[1, 0] * sx + gt[1, 1]) * s)

    y = (float(x0[0]), float(x0[1]), float(xm0[0]), float(xm0[1])) + tuple(g0.as_vector())
    states = []
    n = sim.n_records
    for i in range(n):
        t = i * dt
        states.append(y)
        if i == n - 1:
            break
        try:
            for k in range(nsub):
                y = rk4_step(rhs, y, t + k * h, h)
        except NonFiniteDerivative as exc:
            raise _fault(exc, t, _ideal_rows(states, dt, setup)) from exc
        if not all(map(math.isfinite, y)):
            raise NonFiniteState(f"non-finite state after t={t!r}", _ideal_rows(states, dt, setup))
    return _ideal_rows(states, dt, setup)


def _ideal_rows(states, dt, setup):
    """Assemble ideal-mode records from the sampled augmented states."""
    if not states:
        return SimTrace()
    y = np.array(states)
    n = y.shape[0]
    t = np.arange(n) * dt
    r = np.array([setup.reference(tt) for tt in t])
    tau_d = np.array([setup.disturbance(tt) for tt in t])
    x1, x2, xm1, xm2, k1, k2, kr, th1, th2 = y.T
    e1, e2 = x1 - xm1, x2 - xm2
    v = k1 * x1 + k2 * x2 + kr * r + th1 * np.sin(x1) + th2
    cc = setup.clf_config
    P, lam = cc.P, cc.Lambda
    ideal = setup.ideal
    dkx = np.stack([k1 - ideal.K_x_hat[0], k2 - ideal.K_x_hat[1]])
    dkr = kr - ideal.K_r_hat
    dth = np.stack([th1 - ideal.theta_hat[0], th2 + tau_d])
    gx_inv = np.linalg.inv(cc.gamma_x)
    gt_inv = np.linalg.inv(cc.gamma_theta)
    v_clf = (P[0, 0] * e1 * e1 + (P[0, 1] + P[1, 0]) * e1 * e2 + P[1, 1] * e2 * e2
             + lam * (np.einsum("in,ij,jn->n", dkx, gx_inv, dkx) + dkr * dkr / cc.gamma_r
                      + np.einsum("in,ij,jn->n", dth, gt_inv, dth)))
    nan = np.full(n, math.nan)
    cols = dict(t=t, r=r, x1=x1, x2=x2, x_m1=xm1, x_m2=xm2, e1=e1, e2=e2, z1=v, z2=nan,
                v_x=v, v_1=nan, u_eq=nan, k_x1=k1, k_x2=k2, k_r=kr, theta1=th1, theta2=th2,
                tau_d=tau_d, v_clf=v_clf, v_in=nan)
    return SimTrace(np.column_stack([cols[c] for c in COLUMNS]))


def run(cfg: RunConfig):
    """Dispatch on ``cfg.simulation.mode``."""
    if cfg.simulation.mode == "ideal_mrac":
        return run_ideal_mrac(cfg)
    return run_closed_loop(cfg)


METRIC_NAMES = ("peak_e1_post", "rms_e1_post", "peak_z1", "peak_z1_post", "peak_e2_post",
                "settling_time", "settled")


def metrics(trace, transient_cutoff=2.0, settle_band=0.05):
    """Summary numbers for one run.

    ``settling_time`` is the first record time after which |e1| stays
    within ``settle_band``; ``settled`` is 1.0 when such a time exists.
    Post-cutoff statistics include the record at the cutoff itself.
    """
    if len(trace) == 0:
        raise EmptyTrace("cannot compute metrics of an empty trace")
    t = trace["t"]
    e1 = trace["e1"]
    e2 = trace["e2"]
    z1 = trace["z1"]
    post = t >= transient_cutoff - 1e-12
    if not post.any():
        post = np.zeros_like(post)
        post[-1] = True
    outside = np.nonzero(np.abs(e1) > settle_band)[0]
    if outside.size == 0:
        settling, settled = float(t[0]), 1.0
    elif outside[-1] == len(t) - 1:
        settling, settled = math.nan, 0.0
    else:
        settling, settled = float(t[outside[-1] + 1]), 1.0
    abs_z1 = np.abs(z1)
    return {
        "peak_e1_post": float(np.max(np.abs(e1[post]))),
        "rms_e1_post": float(np.sqrt(np.mean(e1[post] ** 2))),
        "peak_z1": float(np.nanmax(abs_z1)) if np.isfinite(abs_z1).any() else math.nan,
        "peak_z1_post": float(np.nanmax(abs_z1[post])) if np.isfinite(abs_z1[post]).any() else math.nan,
        "peak_e2_post": float(np.max(np.abs(e2[post]))),
        "settling_time": settling,
        "settled": settled,
    }
