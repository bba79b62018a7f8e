"""Fixed-step classical Runge-Kutta."""

import math

from .errors import NonFiniteDerivative


def _finite(k):
    # sum() of a tuple is non-finite iff some entry is (short of overflow at 1e308)
    return math.isfinite(sum(k))


def rk4_step(rhs, state, t, h):
    """Advance ``state`` by one step ``h`` of ``dy/dt = rhs(t, y)``.

    ``state`` is any float sequence; ``rhs`` must return a sequence of the
    same length.  Returns a tuple.
    """
    y = tuple(state)
    k1 = rhs(t, y)
    if not _finite(k1):
        raise NonFiniteDerivative(f"stage 1 at t={t!r}")
    half = 0.5 * h
    k2 = rhs(t + half, tuple(a + half * b for a, b in zip(y, k1)))
    if not _finite(k2):
        raise NonFiniteDerivative(f"stage 2 at t={t!r}")
    k3 = rhs(t + half, tuple(a + half * b for a, b in zip(y, k2)))
    if not _finite(k3):
        raise NonFiniteDerivative(f"stage 3 at t={t!r}")
    k4 = rhs(t + h, tuple(a + h * b for a, b in zip(y, k3)))
    if not _finite(k4):
        raise NonFiniteDerivative(f"stage 4 at t={t!r}")
    sixth = h / 6.0
    return tuple(a + sixth * (b1 + 2.0 * b2 + 2.0 * b3 + b4)
                 for a, b1, b2, b3, b4 in zip(y, k1, k2, k3, k4))
