"""Small dense continuous Lyapunov equations ``P A + A^T P = -Q``."""

from __future__ import annotations

import numpy as np

from .errors import NotHurwitz, SolveSingular


def is_hurwitz(A):
    return bool(np.all(np.linalg.eigvals(np.asarray(A, dtype=float)).real < 0.0))


def leading_minors(M):
    M = np.asarray(M, dtype=float)
    return [float(np.linalg.det(M[:i, :i])) for i in range(1, M.shape[0] + 1)]


def is_spd(M, tol=0.0):
    """Symmetric with every leading principal minor > ``tol``."""
    M = np.asarray(M, dtype=float)
    if M.ndim != 2 or M.shape[0] != M.shape[1]:
        return False
    if not np.allclose(M, M.T, rtol=0.0, atol=1e-12 * max(1.0, np.abs(M).max())):
        return False
    return all(m > tol for m in leading_minors(M))


def residual(P, A, Q):
    """Max-abs entry of ``P A + A^T P + Q``."""
    P, A, Q = (np.asarray(x, dtype=float) for x in (P, A, Q))
    return float(np.abs(P @ A + A.T @ P + Q).max())


def implied_q(P, A):
    """The Q that a supplied P would correspond to: ``-(P A + A^T P)``."""
    P, A = np.asarray(P, dtype=float), np.asarray(A, dtype=float)
    return -(P @ A + A.T @ P)


def solve_lyapunov(A, Q):
    """Solve ``P A + A^T P = -Q`` for symmetric P.

    The n(n+1)/2 upper-triangle entries of P are the unknowns of one dense
    linear system, one equation per upper-triangle entry of Q.

    Raises NotHurwitz if A has an eigenvalue with non-negative real part and
    SolveSingular if the reduced system is singular.
    """
    A = np.asarray(A, dtype=float)
    Q = np.asarray(Q, dtype=float)
    n = A.shape[0]
    if A.shape != (n, n) or Q.shape != (n, n):
        raise ValueError("A and Q must be square and of equal size")
    if not is_hurwitz(A):
        raise NotHurwitz(f"eigenvalues {np.linalg.eigvals(A)} not all in the open left half-plane")

    index = {}
    for i in range(n):
        for j in range(i, n):
            index[i, j] = len(index)

    def slot(i, j):
        return index[(i, j) if i <= j else (j, i)]

    M = np.zeros((len(index), len(index)))
    rhs = np.empty(len(index))
    for (i, j), row in index.items():
        # (P A)_ij + (A^T P)_ij = sum_k P_ik A_kj + A_ki P_kj
        for k in range(n):
            M[row, slot(i, k)] += A[k, j]
            M[row, slot(k, j)] += A[k, i]
        rhs[row] = -0.5 * (Q[i, j] + Q[j, i])

    try:
        sol = np.linalg.solve(M, rhs)
    except np.linalg.LinAlgError as exc:
        raise SolveSingular(str(exc)) from None
    if not np.all(np.isfinite(sol)):
        raise SolveSingular("non-finite solution")

    P = np.empty((n, n))
    for (i, j), row in index.items():
        P[i, j] = P[j, i] = sol[row]
    return P
