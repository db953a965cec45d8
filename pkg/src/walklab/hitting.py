"""Hitting times, Green's functions and return probabilities, with their bounds."""
from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .chains import (
    Chain,
    Spectrum,
    ceil_trel,
    kernel_power_row,
    lazy_walk_chain,
    relaxation_time,
    return_diagonals,
    spectrum,
    star_chain,
)
from .checks import BoundCheck
from .graphs import Graph, degree_stats
from .linalg import lu_solve

IDENTITY_TOL = 1e-7
E_FACTOR = math.e / (math.e - 1)


@dataclass(frozen=True, eq=False)
class HittingProfile:
    expected_hit: np.ndarray  # [y, x] = E_y[tau_x]
    from_pi: np.ndarray  # E_pi[tau_x]

    @property
    def t_hit(self) -> float:
        return float(self.expected_hit.max())


def hitting_times_to(c: Chain, x: int) -> np.ndarray:
    """Vector ``h`` with ``h[y] = E_y[tau_x]``."""
    keep = np.arange(c.n) != x
    q = c.kernel[np.ix_(keep, keep)]
    h = np.zeros(c.n)
    h[keep] = lu_solve(np.eye(c.n - 1) - q, np.ones(c.n - 1))
    return h


def hitting_times(c: Chain) -> HittingProfile:
    """Exact expected hitting times between all pairs of states."""
    h = np.column_stack([hitting_times_to(c, x) for x in range(c.n)])
    return HittingProfile(h, c.pi @ h)


def green_function(c: Chain, x: int, t: int) -> float:
    """``g_t(x, x) = sum_{s <= t} P^s(x, x)``, accumulated step by step."""
    row = np.zeros(c.n)
    row[x] = 1.0
    total = 1.0
    for _ in range(t):
        row = row @ c.kernel
        total += row[x]
    return total


def spectral_green(c: Chain, s: Spectrum, x: int, t: int | float) -> float:
    """Closed form of ``g_t(x, x)`` through the eigen-decomposition.

    ``t = inf`` gives the limit of ``g_t(x, x) - (t + 1) pi(x)``.
    """
    lam = s.eigenvalues[1:]
    w = c.pi[x] * s.eigenfunctions[x, 1:] ** 2
    if math.isinf(t):
        return float(np.sum(w / (1 - lam)))
    return (t + 1) * c.pi[x] + float(np.sum(w * (1 - lam ** (t + 1)) / (1 - lam)))


def return_gap(c: Chain, x: int, t: int) -> float:
    """``P^t(x, x) - pi(x)``."""
    return float(kernel_power_row(c, x, t)[x] - c.pi[x])


def check_formula_1_1(c: Chain, x: int, profile: HittingProfile | None = None,
                      spec: Spectrum | None = None, context: str | None = None) -> BoundCheck:
    """``pi(x) E_pi[tau_x]`` against the summed return-probability excess."""
    profile = profile or hitting_times(c)
    spec = spec or spectrum(c)
    lhs = c.pi[x] * profile.from_pi[x]
    rhs = spectral_green(c, spec, x, math.inf)
    return BoundCheck.eq("hit_return_identity", lhs, rhs, IDENTITY_TOL,
                         context=c.label if context is None else context, x=x)


def time_grid(horizon: int, t_rel: float) -> list[int]:
    """All ``t <= min(horizon, 10 ceil(t_rel))`` plus powers of two up to ``horizon``."""
    dense = set(range(min(horizon, 10 * ceil_trel(t_rel)) + 1))
    p = 1
    while p <= horizon:
        dense.add(p)
        p *= 2
    return sorted(dense)


@dataclass(frozen=True, eq=False)
class GraphAnalysis:
    """Everything the verifiers need about a graph's lazy walk, computed once."""

    graph: Graph
    chain: Chain
    spectrum: Spectrum
    t_rel: float
    profile: HittingProfile

    @classmethod
    def of(cls, g: Graph) -> "GraphAnalysis":
        c = lazy_walk_chain(g)
        s = spectrum(c)
        return cls(g, c, s, relaxation_time(s), hitting_times(c))

    @property
    def label(self) -> str:
        return self.graph.label


def _analysis(g) -> GraphAnalysis:
    return g if isinstance(g, GraphAnalysis) else GraphAnalysis.of(g)


def verify_hitting_bounds(g) -> list[BoundCheck]:
    a = _analysis(g)
    c, n, label = a.chain, a.graph.n, a.label
    st = degree_stats(a.graph)
    d_ratio = float(st.d_avg) / st.d_min
    t_hit = a.profile.t_hit
    out = [
        BoundCheck.le("hit_time_degree_bound", t_hit, 20 * d_ratio * n * math.sqrt(a.t_rel + 1), context=label),
        BoundCheck.le("hit_time_spectral_bound", t_hit,
                      2 * float(np.max((1 - c.pi) / c.pi)) * a.t_rel, context=label),
        BoundCheck.le("hit_time_vs_stationary_start", t_hit, 2 * float(a.profile.from_pi.max()), context=label),
    ]
    star = star_chain(c.pi, 1.0 / a.t_rel, label=f"pstar:{label}")
    star_profile = hitting_times(star)
    for x in range(n):
        own = c.pi[x] * a.profile.from_pi[x]
        star_val = c.pi[x] * star_profile.from_pi[x]
        out.append(BoundCheck.le("hit_vs_star_chain", own, star_val, context=label, x=x))
        out.append(BoundCheck.le("hit_star_closed_form", own, (1 - c.pi[x]) * a.t_rel, context=label, x=x))
        out.append(check_formula_1_1(c, x, a.profile, a.spectrum, context=label))
    return out


def verify_return_bounds(g, horizon: int) -> list[BoundCheck]:
    a = _analysis(g)
    c, label = a.chain, a.label
    st = degree_stats(a.graph)
    deg = a.graph.degrees
    grid = time_grid(horizon, a.t_rel)
    diag = return_diagonals(c, grid[-1])
    out = []
    for x in range(c.n):
        for t in grid:
            gap = diag[t, x] - c.pi[x]
            deg_bound = 10 * deg[x] / st.d_min * min(1 / math.sqrt(t + 1), math.sqrt(a.t_rel + 1) / (t + 1))
            out.append(BoundCheck.le("return_degree_bound", gap, deg_bound, context=label, x=x, t=t))
            out.append(BoundCheck.le("return_spectral_bound", gap,
                                     (1 - 1 / a.t_rel) ** t * (1 - c.pi[x]), context=label, x=x, t=t))
            out.append(BoundCheck.le("return_max_degree_bound", gap, 13 * st.d_max / st.d_min / math.sqrt(t + 1),
                                     context=label, x=x, t=t, gating=False))
    return out


def verify_green_lemmas(g, horizon: int = 512) -> list[BoundCheck]:
    a = _analysis(g)
    c, n, label = a.chain, a.graph.n, a.label
    st = degree_stats(a.graph)
    ct = ceil_trel(a.t_rel)
    grid = time_grid(horizon, a.t_rel)
    t_max = max(grid[-1], ct)
    diag = return_diagonals(c, t_max)
    green = np.cumsum(diag, axis=0)
    early_green_const = 6 * float(st.d_avg) * n / st.d_min
    out = []
    for x in range(n):
        for t in sorted(set(grid) | set(range(ct + 1))):
            if t in grid:
                gap = diag[t, x] - c.pi[x]
                avg = (green[t, x] - (t + 1) * c.pi[x]) / (t + 1)
                cap = E_FACTOR * green[min(ct - 1, t), x] / (t + 1)
                out.append(BoundCheck.le("green_gap_vs_average", gap, avg, context=label, x=x, t=t))
                out.append(BoundCheck.le("green_average_vs_relaxation", avg, cap, context=label, x=x, t=t))
            if t <= ct:
                out.append(BoundCheck.le("green_early_bound", green[t, x] / c.pi[x],
                                         early_green_const * math.sqrt(t + 1), context=label, x=x, t=t))
    return out


def verify_star_chain_exactness(g, horizon: int = 64) -> list[BoundCheck]:
    """The star chain with the graph's ``pi`` and ``t_rel`` attains both general bounds."""
    a = _analysis(g)
    pi, t_rel = a.chain.pi, a.t_rel
    star = star_chain(pi, 1.0 / t_rel, label=f"pstar:{a.label}")
    profile = hitting_times(star)
    diag = return_diagonals(star, horizon)
    out = []
    for x in range(star.n):
        out.append(BoundCheck.eq("star_chain_hit_exact", pi[x] * profile.from_pi[x], (1 - pi[x]) * t_rel,
                                 IDENTITY_TOL, context=a.label, x=x))
        for t in range(horizon + 1):
            out.append(BoundCheck.eq("star_chain_return_exact", diag[t, x] - pi[x],
                                     (1 - 1 / t_rel) ** t * (1 - pi[x]), 1e-9, context=a.label, x=x, t=t))
    return out
