"""MRAC outer loop and two-stage back-stepping through the SEA.

Outer loop: the hip subsystem ``dX = A X + B Lam (v_x - Theta^T Phi(X))``
should follow the reference model ``dX_m = A_m X_m + B_m r``.  The commanded
SEA torque ``v_x`` uses adapted gains driven by ``e^T P B``.  Inner loop:
``v_1`` steers the SEA torque z1 onto ``v_x`` and ``u_eq`` steers its rate
z2 onto ``v_1``.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .errors import MatchingInfeasible, NotHurwitz, ValidationError
from .geometry import eval_fast
from .integrate import rk4_step
from .lyapunov import is_hurwitz, is_spd, solve_lyapunov
from .plant import limb_rhs, sea_drift

B_INPUT = np.array([0.0, 1.0])


class ReferenceModel:
    """Hurwitz reference model with its own integrated state."""

    def __init__(self, A_m, B_m, X_m=(0.0, 0.0)):
        self.A_m = np.array(A_m, dtype=float)
        self.B_m = np.array(B_m, dtype=float)
        if not is_hurwitz(self.A_m):
            raise NotHurwitz(f"reference model A_m = {self.A_m.tolist()} is not Hurwitz")
        self.X_m = np.array(X_m, dtype=float)

    def derivative(self, X_m, r):
        return self.A_m @ X_m + self.B_m * r

    def steady_state(self, r):
        return -np.linalg.solve(self.A_m, self.B_m) * r


def reference_step(rm, r, dt):
    """Advance ``rm.X_m`` by ``dt`` with r held constant; returns the new state."""
    a, b = rm.A_m, rm.B_m

    def rhs(_t, x):
        return (a[0, 0] * x[0] + a[0, 1] * x[1] + b[0] * r,
                a[1, 0] * x[0] + a[1, 1] * x[1] + b[1] * r)

    rm.X_m = np.array(rk4_step(rhs, rm.X_m, 0.0, dt))
    return rm.X_m


@dataclass
class AdaptiveGains:
    K_x_hat: np.ndarray
    K_r_hat: float
    theta_hat: np.ndarray

    @classmethod
    def zeros(cls):
        return cls(np.zeros(2), 0.0, np.zeros(2))

    def as_vector(self):
        return np.array([self.K_x_hat[0], self.K_x_hat[1], self.K_r_hat,
                         self.theta_hat[0], self.theta_hat[1]])

    @classmethod
    def from_vector(cls, v):
        return cls(np.array(v[0:2], dtype=float), float(v[2]), np.array(v[3:5], dtype=float))

    def copy(self):
        return AdaptiveGains(self.K_x_hat.copy(), self.K_r_hat, self.theta_hat.copy())


@dataclass
class AdaptationConfig:
    gamma_x: np.ndarray
    gamma_r: float
    gamma_theta: np.ndarray
    Q: np.ndarray
    P: np.ndarray
    k1: float
    k2: float
    Lambda: float
    B: np.ndarray = B_INPUT

    def __post_init__(self):
        for name in ("gamma_x", "gamma_theta", "Q", "P"):
            value = np.asarray(getattr(self, name), dtype=float)
            setattr(self, name, value)
            if value.shape != (2, 2) or not is_spd(value):
                raise ValidationError("spd", f"{name} = {value.tolist()} is not symmetric positive definite")
        for name in ("gamma_r", "k1", "k2", "Lambda"):
            if not getattr(self, name) > 0:
                raise ValidationError("positive", f"{name} must be > 0")
        self.PB = self.P @ self.B

    @classmethod
    def from_reference(cls, A_m, Q, **kwargs):
        return cls(Q=np.asarray(Q, dtype=float), P=solve_lyapunov(A_m, Q), **kwargs)


def regressor(X):
    """Known nonlinearity basis [sin x1, 1]."""
    return np.array([math.sin(X[0]), 1.0])


def control_vx(g, X, r):
    """Commanded hip torque ``K_x^T X + K_r r + theta^T Phi(X)``."""
    return (g.K_x_hat[0] * X[0] + g.K_x_hat[1] * X[1] + g.K_r_hat * r
            + g.theta_hat[0] * math.sin(X[0]) + g.theta_hat[1])


def adaptation_rates(e, X, r, Phi, cfg):
    """Gain derivatives; every law is driven by the scalar ``e^T P B``."""
    s = float(np.dot(e, cfg.PB))
    return (-cfg.gamma_x @ np.asarray(X, dtype=float) * s,
            -cfg.gamma_r * r * s,
            -cfg.gamma_theta @ np.asarray(Phi, dtype=float) * s)


def hip_matrix(p):
    """A of the hip subsystem for linkage/model parameters ``p``."""
    lam = 1.0 / (p.m * p.d3 ** 2)
    return np.array([[0.0, 1.0], [0.0, -p.damping * lam]]), lam


def ideal_gains(A, B, Lambda, A_m, B_m, tol=1e-12):
    """Gains with ``A + B Lam K_x^T = A_m`` and ``B Lam K_r = B_m``."""
    A, B, A_m, B_m = (np.asarray(x, dtype=float) for x in (A, B, A_m, B_m))
    if not np.allclose(B, B_INPUT):
        raise MatchingInfeasible("input vector must be [0, 1]")
    scale = max(1.0, np.abs(A).max(), np.abs(A_m).max(), np.abs(B_m).max())
    if np.abs(A[0] - A_m[0]).max() > tol * scale or abs(B_m[0]) > tol * scale:
        raise MatchingInfeasible("reference model differs from the plant outside the input row")
    K_x = (A_m[1] - A[1]) / Lambda
    K_r = B_m[1] / Lambda
    closed = A + Lambda * np.outer(B, K_x)
    if np.abs(closed - A_m).max() > 1e-10 * scale:
        raise MatchingInfeasible("matching reconstruction failed")
    return K_x, float(K_r)


def clf_value(e, gains, ideal, cfg):
    """Lyapunov candidate: tracking energy plus weighted gain-error energy."""
    e = np.asarray(e, dtype=float)
    dkx = gains.K_x_hat - ideal.K_x_hat
    dkr = gains.K_r_hat - ideal.K_r_hat
    dth = gains.theta_hat - ideal.theta_hat
    return float(e @ cfg.P @ e
                 + cfg.Lambda * (dkx @ np.linalg.solve(cfg.gamma_x, dkx)
                                 + dkr * dkr / cfg.gamma_r
                                 + dth @ np.linalg.solve(cfg.gamma_theta, dth)))


def backstep_v1(e, z1, v_x, v_x_dot, cfg):
    """Pseudo-control for the SEA torque rate."""
    s = e[0] * cfg.PB[0] + e[1] * cfg.PB[1]
    return v_x_dot - 2.0 * s * cfg.Lambda - cfg.k1 * (z1 - v_x)


def backstep_ueq(state, geom, v_x, v1, v1_dot, cfg, fc, p, phi_ddot, f2_without_zeta=False):
    """Final control ``(1/g2) [-f2 + dv1 - k2 (z2 - v1) - (z1 - v_x)]`` with g2 = 1/G."""
    x1, x2, z1, z2 = state
    f2 = sea_drift(x1, x2, z1, z2, geom, phi_ddot, fc, p, f2_without_zeta)
    return geom[3] * (-f2 + v1_dot - cfg.k2 * (z2 - v1) - (z1 - v_x))


class DerivativeEstimator:
    """Backward difference followed by a first-order low-pass.

    ``y_k = y_{k-1} + a (d_k - y_{k-1})`` with ``a = dt / (tau + dt)``; the
    first sample yields 0.
    """

    def __init__(self, dt, tau):
        if dt <= 0 or tau < 0:
            raise ValueError("dt must be > 0 and tau >= 0")
        self.dt = dt
        self.tau = tau
        self.alpha = dt / (tau + dt)
        self.reset()

    def reset(self):
        self._prev = None
        self.value = 0.0

    def update(self, sample):
        if self._prev is not None:
            raw = (sample - self._prev) / self.dt
            self.value += self.alpha * (raw - self.value)
        self._prev = sample
        return self.value

    def frequency_response(self, omega):
        """Complex gain of the discrete filter at angular frequency ``omega``."""
        z_inv = np.exp(-1j * omega * self.dt)
        return (1.0 - z_inv) / self.dt * self.alpha / (1.0 - (1.0 - self.alpha) * z_inv)


@dataclass
class Command:
    e: np.ndarray
    v_x: float
    v_x_dot: float
    v1: float
    v1_dot: float
    u_eq: float


class CascadeController:
    """MRAC + back-stepping state machine, one call to :meth:`command` per tick.

    ``model`` supplies the controller-side mass, damping and geometry.  The
    controller never sees the disturbance, so its hip acceleration model
    assumes tau_D = 0.
    """

    def __init__(self, cfg, ref_model, fc, model, dt, derivative_tau,
                 gains=None, f2_without_zeta=False, freeze=False):
        self.cfg = cfg
        self.ref = ref_model
        self.fc = fc
        self.model = model
        self.dt = dt
        self.f2_without_zeta = f2_without_zeta
        self.freeze = freeze
        self.gains = gains.copy() if gains is not None else AdaptiveGains.zeros()
        self.vx_est = DerivativeEstimator(dt, derivative_tau)
        self.v1_est = DerivativeEstimator(dt, derivative_tau)
        self._rates = None

    def command(self, state, r):
        x1, x2, z1, z2 = state
        X = np.array([x1, x2])
        e = X - self.ref.X_m
        v_x = control_vx(self.gains, X, r)
        v_x_dot = self.vx_est.update(v_x)
        v1 = backstep_v1(e, z1, v_x, v_x_dot, self.cfg)
        v1_dot = self.v1_est.update(v1)
        geom = eval_fast(x1, self.model)
        phi_ddot = limb_rhs(state, 0.0, self.model)[1]
        u = backstep_ueq(state, geom, v_x, v1, v1_dot, self.cfg, self.fc, self.model,
                         phi_ddot, self.f2_without_zeta)
        self._rates = adaptation_rates(e, X, r, regressor(X), self.cfg)
        return Command(e, v_x, v_x_dot, v1, v1_dot, u)

    def rates(self):
        return self._rates

    def advance_euler(self, r):
        """Forward-Euler gain update with the rates of the last tick, then step X_m."""
        if not self.freeze and self._rates is not None:
            dkx, dkr, dth = self._rates
            g = self.gains
            self.gains = AdaptiveGains(g.K_x_hat + self.dt * dkx,
                                       g.K_r_hat + self.dt * dkr,
                                       g.theta_hat + self.dt * dth)
        reference_step(self.ref, r, self.dt)
