"""Dense symmetric eigensolver and guarded linear solves."""
from __future__ import annotations

import warnings

import numpy as np
import scipy.linalg

from .errors import SolverError

JACOBI_TOL = 1e-12
JACOBI_MAX_SWEEPS = 100
PIVOT_TOL = 1e-12


def _round_robin(m: int) -> list[tuple[np.ndarray, np.ndarray]]:
    """Tournament schedule: ``m - 1`` rounds of ``m / 2`` disjoint pairs (m even)."""
    players = list(range(m))
    rounds = []
    for _ in range(m - 1):
        p = np.array(players[: m // 2])
        q = np.array(players[m // 2:][::-1])
        rounds.append((np.minimum(p, q), np.maximum(p, q)))
        players = [players[0], players[-1]] + players[1:-1]
    return rounds


def off_norm(a: np.ndarray) -> float:
    off = a - np.diag(np.diag(a))
    return float(np.sqrt(np.sum(off * off)))


def jacobi_eigh(a, tol: float = JACOBI_TOL, max_sweeps: int = JACOBI_MAX_SWEEPS):
    """Eigen-decomposition of a real symmetric matrix by cyclic Jacobi rotations.

    Each sweep visits every off-diagonal pair once, in round-robin order so
    that the rotations of one round act on disjoint index pairs and can be
    applied together. Iteration stops when the off-diagonal Frobenius mass
    falls below ``tol``.

    Returns
    -------
    w : ndarray
        Eigenvalues sorted in descending order.
    v : ndarray
        Orthonormal eigenvectors, column ``i`` belonging to ``w[i]``.
    """
    a = np.array(a, dtype=float)
    n = a.shape[0]
    if a.shape != (n, n):
        raise ValueError("square matrix required")
    if not np.allclose(a, a.T, atol=1e-12, rtol=0):
        raise ValueError("matrix is not symmetric")
    a = (a + a.T) / 2
    v = np.eye(n)
    m = n + (n % 2)
    schedule = [(p[q < n], q[q < n]) for p, q in _round_robin(m)] if n > 1 else []
    for _ in range(max_sweeps + 1):
        if off_norm(a) < tol:
            break
        for p, q in schedule:
            apq = a[p, q]
            nz = np.abs(apq) > 0
            if not np.any(nz):
                continue
            p, q, apq = p[nz], q[nz], apq[nz]
            with np.errstate(over="ignore"):
                theta = (a[q, q] - a[p, p]) / (2.0 * apq)
                t = np.sign(theta) / (np.abs(theta) + np.sqrt(theta * theta + 1.0))
            t[theta == 0] = 1.0
            c = 1.0 / np.sqrt(t * t + 1.0)
            s = t * c
            ap, aq = a[:, p].copy(), a[:, q].copy()
            a[:, p] = c * ap - s * aq
            a[:, q] = s * ap + c * aq
            ap, aq = a[p, :].copy(), a[q, :].copy()
            a[p, :] = c[:, None] * ap - s[:, None] * aq
            a[q, :] = s[:, None] * ap + c[:, None] * aq
            a[p, q] = a[q, p] = 0.0
            vp, vq = v[:, p].copy(), v[:, q].copy()
            v[:, p] = c * vp - s * vq
            v[:, q] = s * vp + c * vq
    else:
        raise SolverError("eigensolve_failed", f"off-diagonal mass {off_norm(a):.3e} after {max_sweeps} sweeps")
    w = np.diag(a).copy()
    order = np.argsort(-w, kind="stable")
    return w[order], v[:, order]


def lu_solve(a, b):
    """Solve ``a x = b`` by LU with partial pivoting, rejecting tiny pivots."""
    a = np.asarray(a, dtype=float)
    if a.size == 0:
        return np.zeros_like(np.asarray(b, dtype=float))
    with warnings.catch_warnings():
        # a singular factor is reported below through the pivot check
        warnings.simplefilter("ignore", scipy.linalg.LinAlgWarning)
        lu, piv = scipy.linalg.lu_factor(a, check_finite=True)
    if np.min(np.abs(np.diag(lu))) < PIVOT_TOL:
        raise SolverError("singular_system", "pivot below threshold")
    return scipy.linalg.lu_solve((lu, piv), b)
