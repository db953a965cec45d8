"""Electrical networks built from chains or graphs, and effective resistance."""
from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Iterable

import numpy as np

from .chains import Chain
from .checks import BoundCheck
from .errors import ChainError
from .graphs import Graph, check_path_fact, degree_stats
from .hitting import IDENTITY_TOL, GraphAnalysis, _analysis
from .linalg import lu_solve

SAMPLES_PER_SIZE = 20


@dataclass(frozen=True, eq=False)
class ConductanceNetwork:
    conductance: np.ndarray  # symmetric, zero diagonal
    node_weight: np.ndarray

    @property
    def n(self) -> int:
        return self.conductance.shape[0]

    def laplacian(self) -> np.ndarray:
        c = self.conductance
        return np.diag(c.sum(axis=1)) - c


def chain_network(c: Chain) -> ConductanceNetwork:
    """Conductance ``pi(a) P(a, b)`` on each pair ``a != b``."""
    flow = c.pi[:, None] * c.kernel
    if np.max(np.abs(flow - flow.T)) > 1e-12:
        raise ChainError("not_reversible")
    cond = (flow + flow.T) / 2
    np.fill_diagonal(cond, 0.0)
    return ConductanceNetwork(cond, c.pi.copy())


def unit_network(g: Graph) -> ConductanceNetwork:
    a = g.adjacency_matrix()
    return ConductanceNetwork(a, a.sum(axis=1))


def effective_resistance(net: ConductanceNetwork, x: int, targets: Iterable[int]) -> float:
    """Resistance between ``x`` and the set ``targets`` shorted together.

    Holds ``x`` at unit voltage and the targets at zero, solves Kirchhoff's
    equations on the remaining nodes and returns ``1 / current``.
    """
    targets = sorted(set(int(a) for a in targets))
    if not targets or x in targets:
        raise ValueError("targets must be non-empty and exclude x")
    fixed = set(targets) | {x}
    free = [v for v in range(net.n) if v not in fixed]
    lap = net.laplacian()
    volt = np.zeros(net.n)
    volt[x] = 1.0
    if free:
        volt[free] = lu_solve(lap[np.ix_(free, free)], -lap[free, x])
    current = float(lap[x] @ volt)
    return 1.0 / current


def visits_before_hitting(c: Chain, x: int, targets: Iterable[int]) -> float:
    """Expected visits to ``x`` (from ``x``) strictly before entering ``targets``."""
    targets = set(int(a) for a in targets)
    if not targets or x in targets:
        raise ValueError("targets must be non-empty and exclude x")
    keep = [v for v in range(c.n) if v not in targets]
    q = c.kernel[np.ix_(keep, keep)]
    e = np.zeros(len(keep))
    e[keep.index(x)] = 1.0
    occupation = lu_solve(np.eye(len(keep)) - q, e)
    return float(occupation[keep.index(x)])


def sample_target_sets(n: int, seed: int, per_size: int = SAMPLES_PER_SIZE) -> list[tuple[int, tuple[int, ...]]]:
    """All ``(x, {y})`` pairs plus seeded random ``(x, A)`` for a few set sizes."""
    pairs = [(x, (y,)) for x in range(n) for y in range(n) if y != x]
    rng = np.random.default_rng(seed)
    sizes = sorted({1, math.ceil(n / 4), math.ceil(n / 2), n - 1})
    for size in sizes:
        for _ in range(per_size):
            perm = rng.permutation(n)
            pairs.append((int(perm[0]), tuple(sorted(int(v) for v in perm[1:size + 1]))))
    return pairs


def verify_network_propositions(g, seed: int = 0) -> list[BoundCheck]:
    a: GraphAnalysis = _analysis(g)
    graph, c, label = a.graph, a.chain, a.label
    n = graph.n
    st = degree_stats(graph)
    ratio = float(st.d_avg) * n / st.d_min
    net = chain_network(c)
    out = [check_path_fact(graph)]

    hit = a.profile.expected_hit
    commute = float(np.max(hit + hit.T))
    out.append(BoundCheck.le("relaxation_vs_commute", a.t_rel, commute, context=label))
    out.append(BoundCheck.le("commute_time_bound", commute, 6 * float(st.d_avg) / st.d_min * n * n - 4, context=label))

    for x, targets in sample_target_sets(n, seed):
        visits = visits_before_hitting(c, x, targets) / c.pi[x]
        r_eff = effective_resistance(net, x, targets)
        ctx = f"{label}|A={'.'.join(map(str, targets))}"
        out.append(BoundCheck.eq("green_resistance_identity", visits, r_eff, IDENTITY_TOL, context=ctx, x=x))
        pi_a = float(sum(c.pi[list(targets)]))
        out.append(BoundCheck.le("exit_set_visits_bound", visits, 9 * ratio ** 2 * (1 - pi_a), context=ctx, x=x))

    # universal constant unknown: lhs / rhs is the observed K
    out.append(BoundCheck.le("unit_resistance_scale", max_unit_resistance(graph),
                             math.sqrt(a.t_rel) / st.d_min, context=label, gating=False))
    return out


def max_unit_resistance(g: Graph) -> float:
    net = unit_network(g)
    return max(effective_resistance(net, x, [y]) for x in range(g.n) for y in range(x + 1, g.n))


def unit_resistance_constant(g: Graph, t_rel: float) -> float:
    """Smallest ``K`` with ``R_eff(x, y) <= K sqrt(t_rel) / d_min`` over all pairs."""
    return max_unit_resistance(g) * degree_stats(g).d_min / math.sqrt(t_rel)
