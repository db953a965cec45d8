"""Avoiding a moving target: exact survival probabilities and their bounds."""
from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .chains import Chain, ceil_trel, symmetrized
from .checks import BoundCheck, fmt
from .errors import SolverError
from .hitting import IDENTITY_TOL, GraphAnalysis, _analysis, hitting_times, hitting_times_to
from .linalg import jacobi_eigh

DEGENERACY_TOL = 1e-9
RANDOM_TRIALS = 100
SURVIVAL_CSV_COLUMNS = ("graph_label", "kind", "t", "index", "probability", "bound", "margin", "pass")


@dataclass(frozen=True)
class Trajectory:
    targets: tuple[int, ...]

    def __post_init__(self):
        if len(self.targets) < 1:
            raise ValueError("trajectory needs at least one target")

    @property
    def t(self) -> int:
        return len(self.targets) - 1


@dataclass(frozen=True)
class SurvivalResult:
    probability: float
    bound: float
    kind: str
    t: int
    index: int = 0
    context: str = ""

    @property
    def margin(self) -> float:
        return self.bound - self.probability

    @property
    def passed(self) -> bool:
        return self.margin >= -1e-9

    def row(self) -> list[str]:
        return [self.context, self.kind, str(self.t), str(self.index), fmt(self.probability),
                fmt(self.bound), fmt(self.margin), fmt(self.passed)]

    def sort_key(self):
        return (self.context, self.kind, self.t, self.index)


def survival_curve(c: Chain, targets) -> np.ndarray:
    """``out[s] = P_pi(X_r != h_r for all r <= s)`` for every prefix of ``targets``."""
    targets = list(targets)
    out = np.empty(len(targets))
    mu = c.pi.copy()
    mu[targets[0]] = 0.0
    out[0] = mu.sum()
    for s, h in enumerate(targets[1:], start=1):
        mu = mu @ c.kernel
        mu[h] = 0.0
        out[s] = mu.sum()
    return out


def survival_probability(c: Chain, traj: Trajectory) -> float:
    return float(survival_curve(c, traj.targets)[-1])


def meeting_bound(t_hit: float, t: int) -> float:
    if t_hit < 1:
        raise ValueError("t_hit must be >= 1")
    return (1 - 1 / t_hit) ** t


def _masked_eigen(c: Chain, h: int):
    keep = np.arange(c.n) != h
    block = symmetrized(c)[np.ix_(keep, keep)]
    return keep, jacobi_eigh(block)


def masked_operator_norm(c: Chain, h: int) -> float:
    """Top eigenvalue of the kernel with state ``h`` removed (symmetrized)."""
    _, (w, _) = _masked_eigen(c, h)
    return float(w[0])


def quasistationary(c: Chain, h: int, hit_to_h: np.ndarray | None = None) -> tuple[np.ndarray, float]:
    """Quasistationary law ``q`` on states other than ``h`` and ``E_q[tau_h]``.

    When the top eigenvalue of the masked block is repeated (the block
    splits into pieces with equal decay rates) ``sqrt(pi)`` is projected on
    the top eigenspace, which yields a nonnegative representative.
    """
    keep, (w, phi) = _masked_eigen(c, h)
    top = np.abs(w - w[0]) <= DEGENERACY_TOL
    basis = phi[:, top]
    r = np.sqrt(c.pi[keep])
    vec = basis @ (basis.T @ r)
    if vec.sum() < 0:
        vec = -vec
    q_sub = vec * r
    if np.min(q_sub) < -1e-9 * np.max(np.abs(q_sub)) or q_sub.sum() <= 0:
        raise SolverError("nonpositive_eigenvector", f"state {h}")
    q = np.zeros(c.n)
    q[keep] = np.clip(q_sub, 0, None) / np.clip(q_sub, 0, None).sum()
    if hit_to_h is None:
        hit_to_h = hitting_times_to(c, h)
    expected = float(q @ hit_to_h)
    lam = float(w[0])
    if abs(lam - (1 - 1 / expected)) > IDENTITY_TOL:
        raise SolverError("quasistationary_mismatch", f"state {h}: {lam} vs 1 - 1/{expected}")
    return q, expected


def greedy_adversarial_trajectory(c: Chain, t: int) -> Trajectory:
    """Each target is placed where it removes the least surviving mass."""
    h = int(np.argmin(c.pi))
    targets = [h]
    mu = c.pi.copy()
    mu[h] = 0.0
    for _ in range(t):
        mu = mu @ c.kernel
        h = int(np.argmin(mu))
        mu[h] = 0.0
        targets.append(h)
    return Trajectory(tuple(targets))


def meeting_grid(horizon: int, t_rel: float) -> list[int]:
    """Reported times: 1..32, powers of two and multiples of ``ceil(t_rel)``."""
    ts = set(range(1, min(horizon, 32) + 1))
    p = 1
    while p <= horizon:
        ts.add(p)
        p *= 2
    step = ceil_trel(t_rel)
    ts.update(range(step, horizon + 1, step))
    ts.add(horizon)
    return sorted(ts)


@dataclass
class MeetingReport:
    survival: list[SurvivalResult] = field(default_factory=list)
    checks: list[BoundCheck] = field(default_factory=list)

    @property
    def violations(self) -> list[SurvivalResult]:
        return [r for r in self.survival if not r.passed]


def check_trajectories(c: Chain, t_hit: float, trajectories, horizon: int, t_rel: float,
                       context: str, step1_rate: float | None = None) -> MeetingReport:
    """Evaluate survival against the bound on a reporting grid.

    Every prefix length is checked; rows are kept for the grid and for the
    worst-margin time of each trajectory.
    """
    report = MeetingReport()
    grid = meeting_grid(horizon, t_rel)
    bounds = np.array([meeting_bound(t_hit, t) for t in range(horizon + 1)])
    for kind, index, targets in trajectories:
        curve = survival_curve(c, targets)
        margins = bounds[1:] - curve[1:]
        worst = int(np.argmin(margins)) + 1
        for t in sorted(set(grid) | {worst}):
            report.survival.append(SurvivalResult(float(curve[t]), float(bounds[t]), kind, t, index, context))
        if step1_rate is not None:
            ts = np.arange(1, horizon + 1)
            slack = step1_rate ** ts - curve[1:]
            w = int(np.argmin(slack)) + 1
            report.checks.append(BoundCheck.le("survival_vs_masked_rate", curve[w], step1_rate ** w,
                                               context=f"{context}|{kind}#{index}", t=w))
    return report


def verify_meeting_theorem(g, horizon: int | None = None, trials: int = RANDOM_TRIALS,
                           seed: int = 0) -> MeetingReport:
    """Survival of fixed, random and greedy trajectories, plus both proof steps.

    ``horizon`` defaults to ``10 * ceil(t_rel)``.
    """
    a: GraphAnalysis = _analysis(g)
    c, label, n = a.chain, a.label, a.graph.n
    t_hit = a.profile.t_hit
    if horizon is None:
        horizon = 10 * ceil_trel(a.t_rel)
    if horizon < 1:
        raise ValueError("horizon must be >= 1")

    report = MeetingReport()
    norms = []
    for h in range(n):
        lam = masked_operator_norm(c, h)
        norms.append(lam)
        report.checks.append(BoundCheck.le("masked_norm_bound", lam, 1 - 1 / t_hit, context=label, x=h))
        _, expected = quasistationary(c, h, a.profile.expected_hit[:, h])
        report.checks.append(BoundCheck.eq("quasistationary_identity", lam, 1 - 1 / expected,
                                           IDENTITY_TOL, context=label, x=h))
    rate = max(norms)
    report.checks.append(BoundCheck.le("masked_rate_bound", rate, 1 - 1 / t_hit, context=label))

    rng = np.random.default_rng(seed)
    trajectories = [("fixed", x, [x] * (horizon + 1)) for x in range(n)]
    trajectories += [("random", i, rng.integers(0, n, horizon + 1).tolist()) for i in range(trials)]
    trajectories.append(("greedy_adversarial", 0, list(greedy_adversarial_trajectory(c, horizon).targets)))
    sub = check_trajectories(c, t_hit, trajectories, horizon, a.t_rel, label, step1_rate=rate)
    report.survival.extend(sub.survival)
    report.checks.extend(sub.checks)
    return report


def negative_control_report(horizon: int = 8) -> MeetingReport:
    """Non-lazy walk on a single edge: some trajectory beats the bound."""
    from .chains import simple_walk_chain
    from .graphs import build_graph

    g = build_graph(2, [(0, 1)], label="nonlazy_K2")
    c = simple_walk_chain(g)
    t_hit = hitting_times(c).t_hit
    alternating = [s % 2 for s in range(horizon + 1)]
    trajectories = [("fixed", x, [x] * (horizon + 1)) for x in range(2)]
    trajectories.append(("custom", 0, alternating))
    return check_trajectories(c, t_hit, trajectories, horizon, 1.0, g.label)
