"""Reversible Markov chains: lazy walks, the star chain, spectra, mixing."""
from __future__ import annotations

import json
import math
from dataclasses import dataclass, field
from fractions import Fraction

import numpy as np

from .errors import ChainError
from .graphs import Graph
from .linalg import jacobi_eigh

ROW_TOL = 1e-12
MIX_THRESHOLD = 0.25
MIX_BUDGET = 100_000


@dataclass(frozen=True, eq=False)
class Chain:
    """Finite chain with kernel ``P`` and stationary distribution ``pi``.

    ``pi_exact`` holds exact rationals when they are known (lazy walks).
    ``nonnegative_spectrum`` is False only for deliberately periodic
    control chains; downstream code uses it to skip spectral assumptions.
    """

    kernel: np.ndarray
    pi: np.ndarray
    label: str = ""
    pi_exact: tuple[Fraction, ...] | None = None
    nonnegative_spectrum: bool = True

    def __post_init__(self):
        k = np.asarray(self.kernel, dtype=float)
        k.setflags(write=False)
        pi = np.asarray(self.pi, dtype=float)
        pi.setflags(write=False)
        object.__setattr__(self, "kernel", k)
        object.__setattr__(self, "pi", pi)
        validate_chain(self)

    @property
    def n(self) -> int:
        return self.kernel.shape[0]

    def to_json(self) -> str:
        f = lambda v: format(float(v), ".17g")
        rows = ",".join("[" + ",".join(f(v) for v in row) + "]" for row in self.kernel)
        return (
            '{"n": %d, "kernel": [%s], "pi": [%s], "label": %s}'
            % (self.n, rows, ",".join(f(v) for v in self.pi), json.dumps(self.label))
        )

    @classmethod
    def from_json(cls, text: str) -> "Chain":
        obj = json.loads(text)
        return cls(np.array(obj["kernel"], dtype=float), np.array(obj["pi"], dtype=float), obj.get("label", ""))


def validate_chain(c: Chain) -> None:
    p, pi = c.kernel, c.pi
    n = p.shape[0]
    if p.shape != (n, n) or pi.shape != (n,):
        raise ChainError("bad_shape", f"kernel {p.shape}, pi {pi.shape}")
    if np.any(p < 0) or np.any(np.abs(p.sum(axis=1) - 1) > ROW_TOL):
        raise ChainError("not_stochastic")
    if np.any(pi <= 0) or abs(pi.sum() - 1) > ROW_TOL:
        raise ChainError("invalid_distribution")
    if np.max(np.abs(pi @ p - pi)) > ROW_TOL:
        raise ChainError("not_stationary")
    flow = pi[:, None] * p
    if np.max(np.abs(flow - flow.T)) > ROW_TOL:
        raise ChainError("not_reversible")


def lazy_walk_chain(g: Graph) -> Chain:
    """Hold with probability 1/2, else step to a uniform neighbour."""
    n = g.n
    p = np.zeros((n, n))
    for x, nb in enumerate(g.adjacency):
        p[x, x] = 0.5
        p[x, list(nb)] = 0.5 / len(nb)
    two_m = 2 * g.edge_count
    pi_exact = tuple(Fraction(d, two_m) for d in g.degrees)
    return Chain(p, np.array([float(q) for q in pi_exact]), f"lrw:{g.label}", pi_exact)


def simple_walk_chain(g: Graph) -> Chain:
    """Non-lazy walk; periodic on bipartite graphs. Used as a negative control."""
    n = g.n
    p = np.zeros((n, n))
    for x, nb in enumerate(g.adjacency):
        p[x, list(nb)] = 1.0 / len(nb)
    two_m = 2 * g.edge_count
    pi_exact = tuple(Fraction(d, two_m) for d in g.degrees)
    return Chain(p, np.array([float(q) for q in pi_exact]), f"srw:{g.label}", pi_exact,
                 nonnegative_spectrum=False)


def star_chain(pi, gamma: float, label: str = "") -> Chain:
    """``(1 - gamma) I + gamma * Pi`` where every row of ``Pi`` is ``pi``."""
    pi = np.asarray(pi, dtype=float)
    if pi.ndim != 1 or np.any(pi <= 0) or abs(pi.sum() - 1) > ROW_TOL:
        raise ChainError("invalid_distribution")
    if not 0 < gamma <= 1:
        raise ChainError("invalid_distribution", f"gamma={gamma} outside (0, 1]")
    n = pi.size
    p = (1 - gamma) * np.eye(n) + gamma * np.tile(pi, (n, 1))
    return Chain(p, pi, label or f"star_chain(gamma={gamma:.6g})")


@dataclass(frozen=True, eq=False)
class Spectrum:
    eigenvalues: np.ndarray
    eigenfunctions: np.ndarray  # column i is Psi_i
    weights: np.ndarray = field(repr=False)

    @property
    def lambda2(self) -> float:
        return float(self.eigenvalues[1])


def symmetrized(c: Chain) -> np.ndarray:
    """``S(x, y) = sqrt(pi(x) / pi(y)) P(x, y)``, symmetric for reversible chains."""
    r = np.sqrt(c.pi)
    s = r[:, None] * c.kernel / r[None, :]
    return (s + s.T) / 2


def spectrum(c: Chain) -> Spectrum:
    w, phi = jacobi_eigh(symmetrized(c))
    psi = phi / np.sqrt(c.pi)[:, None]
    # deterministic signs: Psi_1 positive, others with first significant entry positive
    for i in range(psi.shape[1]):
        col = psi[:, i]
        j = int(np.argmax(np.abs(col) > 1e-8))
        if col[j] < 0:
            psi[:, i] = -col
    return Spectrum(w, psi, c.pi.copy())


def relaxation_time(s: Spectrum) -> float:
    if s.eigenvalues.size < 2 or s.lambda2 >= 1 - 1e-12:
        raise ChainError("degenerate", "second eigenvalue is 1")
    return 1.0 / (1.0 - s.lambda2)


def ceil_trel(t_rel: float) -> int:
    """``ceil(t_rel)`` robust to float noise just above an integer."""
    return math.ceil(t_rel - 1e-9)


def kernel_power_row(c: Chain, x: int, t: int) -> np.ndarray:
    if t < 0:
        raise ValueError("t must be >= 0")
    row = np.zeros(c.n)
    row[x] = 1.0
    for _ in range(t):
        row = row @ c.kernel
    return row


def return_diagonals(c: Chain, t_max: int) -> np.ndarray:
    """Array ``r`` with ``r[t, x] = P^t(x, x)`` for ``0 <= t <= t_max``."""
    out = np.empty((t_max + 1, c.n))
    m = np.eye(c.n)
    out[0] = 1.0
    for t in range(1, t_max + 1):
        m = m @ c.kernel
        out[t] = np.diag(m)
    return out


def total_variation(mu, nu) -> float:
    return 0.5 * float(np.sum(np.abs(np.asarray(mu) - np.asarray(nu))))


def mixing_time(c: Chain, threshold: float = MIX_THRESHOLD, budget: int = MIX_BUDGET) -> int:
    """Smallest ``t`` with ``max_x TV(P^t(x, .), pi) <= threshold``."""
    m = np.eye(c.n)
    for t in range(budget + 1):
        if 0.5 * np.abs(m - c.pi[None, :]).sum(axis=1).max() <= threshold:
            return t
        m = m @ c.kernel
    raise ChainError("budget_exceeded", f"no mixing within {budget} steps")
