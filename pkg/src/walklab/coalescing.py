"""Coalescing random walks as a killed-particle system.

Particle ``a`` (0-based here) starts at state ``a``. All surviving particles
move at every tick; afterwards, scanning in index order, a particle that
shares its state with a surviving lower-index particle is killed. Particles
that swap states between ticks do not meet.
"""
from __future__ import annotations

import itertools
import math
from dataclasses import dataclass
from typing import Callable

import numpy as np

from . import _kernels, rng
from .chains import Chain
from .errors import SimulationError
from .hitting import hitting_times
from .linalg import lu_solve

DEFAULT_CAP = 10_000_000


def cumulative_table(c: Chain) -> np.ndarray:
    """Row-wise cumulative kernel used for inverse-CDF sampling.

    Entries from the last positive-probability column onwards are set to
    ``inf`` so that rounding in the cumulative sum never sends a walker to a
    state it cannot reach.
    """
    cum = np.cumsum(c.kernel, axis=1)
    for x in range(c.n):
        last = int(np.flatnonzero(c.kernel[x] > 0)[-1])
        cum[x, last:] = np.inf
    return np.ascontiguousarray(cum)


def step_state(cum: np.ndarray, x: int, u: float) -> int:
    j = 0
    while u >= cum[x, j]:
        j += 1
    return j


# --- kill schedules -----------------------------------------------------------

@dataclass(frozen=True)
class Epoch:
    label: str
    start: int
    end: int | None  # exclusive; None means unbounded
    kind: str  # "none", "all" or "block"
    killer_block: int = -1


@dataclass(frozen=True)
class KillSchedule:
    """Time-varying set of allowed killings.

    In a ``block`` epoch with ``killer_block = j - 1`` the allowed pairs are
    ``A_{j-1} x (A_j u ... u A_m)``.
    """

    n: int
    epochs: tuple[Epoch, ...]
    blocks: tuple[tuple[int, ...], ...] = ()

    @property
    def m(self) -> int:
        return len(self.blocks) - 1

    @property
    def block_of(self) -> np.ndarray:
        out = np.zeros(self.n, dtype=np.int64)
        for i, blk in enumerate(self.blocks):
            out[list(blk)] = i
        return out

    @property
    def bounded_horizon(self) -> int:
        return max(e.start for e in self.epochs)

    def epoch_at(self, t: int) -> Epoch:
        current = self.epochs[0]
        for e in self.epochs:
            if e.start <= t:
                current = e
        return current

    def allowed(self, b: int, a: int, t: int) -> bool:
        e = self.epoch_at(t)
        if e.kind == "all":
            return b < a
        if e.kind == "none":
            return False
        blk = self.block_of
        return blk[b] == e.killer_block and blk[a] > e.killer_block

    def allowed_pairs(self, epoch: Epoch) -> set[tuple[int, int]]:
        return {(b, a) for a in range(self.n) for b in range(a) if self.allowed(b, a, epoch.start)}

    def arrays(self):
        kinds = {"none": _kernels.KIND_NONE, "all": _kernels.KIND_ALL, "block": _kernels.KIND_BLOCK}
        return (np.array([e.start for e in self.epochs], dtype=np.int64),
                np.array([kinds[e.kind] for e in self.epochs], dtype=np.int64),
                np.array([e.killer_block for e in self.epochs], dtype=np.int64),
                self.block_of if self.blocks else np.zeros(self.n, dtype=np.int64))

    @classmethod
    def always(cls, n: int) -> "KillSchedule":
        return cls(n, (Epoch("0", 0, None, "all"),))

    @classmethod
    def never(cls, n: int) -> "KillSchedule":
        return cls(n, (Epoch("inf", 0, None, "none"),))


def doubling_partition(n: int) -> tuple[tuple[int, ...], ...]:
    """Consecutive blocks of sizes 1, 2, 4, ..., 2^(m-1) and a non-empty remainder."""
    m = 1
    while 2 ** (m + 1) - 1 < n:
        m += 1
    blocks = [tuple(range(2 ** i - 1, 2 ** (i + 1) - 1)) for i in range(m)]
    blocks.append(tuple(range(2 ** m - 1, n)))
    return tuple(blocks)


def build_epoch_schedule(t_mix: int, t_hit: float, n: int) -> KillSchedule:
    """Epoch schedule: a quiet warm-up, then epochs m..1 of decreasing length, then all pairs."""
    if t_mix < 1 or t_hit < 1 or n < 2:
        raise ValueError("need t_mix >= 1, t_hit >= 1, n >= 2")
    blocks = doubling_partition(n)
    m = len(blocks) - 1
    warmup = 1 + math.ceil(2 * t_mix)
    epochs = [Epoch("inf", 0, warmup, "none")]
    start = warmup
    for j in range(m, 0, -1):
        length = 1 + math.ceil(16 * math.log(5) / 2 ** j * t_hit)
        epochs.append(Epoch(str(j), start, start + length, "block", killer_block=j - 1))
        start += length
    epochs.append(Epoch("0", start, None, "all"))
    return KillSchedule(n, tuple(epochs), blocks)


# --- simulators -----------------------------------------------------------------

def simulate_coalescence(c: Chain, seed: int, cap: int = DEFAULT_CAP) -> int:
    """Full coalescence time of one run keyed by ``seed``."""
    tau = _kernels.coalesce(cumulative_table(c), np.uint64(seed & rng.MASK), cap)
    if tau < 0:
        raise SimulationError("horizon_exceeded", f"no coalescence within {cap} steps")
    return int(tau)


def simulate_with_allowed_killings(c: Chain, sched: KillSchedule, seed: int,
                                   cap: int = DEFAULT_CAP) -> tuple[int, int | None]:
    """Coupled ``(tau_coal, tau_coal_restricted)``; the latter is None past ``cap``.

    Raises ``domination_violated`` if the restricted run finishes first,
    which the coupling rules out.
    """
    if sched.n != c.n:
        raise ValueError("schedule size does not match chain")
    tau, tau_r = _kernels.coalesce_coupled(cumulative_table(c), np.uint64(seed & rng.MASK), cap, *sched.arrays())
    if tau < 0:
        raise SimulationError("horizon_exceeded", f"no coalescence within {cap} steps")
    if tau_r < 0:
        return int(tau), None
    if tau > tau_r:
        raise SimulationError("domination_violated", f"seed {seed}: {tau} > {tau_r}")
    return int(tau), int(tau_r)


def reference_kill_times(c: Chain, key: int,
                         allowed: Callable[[int, int, int], bool] | None = None,
                         cap: int = 100_000) -> list[int]:
    """Kill times straight from the definition, one particle at a time.

    Particle ``a`` is followed until its trajectory meets, at the same time,
    a lower-index particle that is still alive then (and, if ``allowed`` is
    given, with ``allowed(b, a, t)``). Particle 0 is never killed and gets
    kill time 0. Slow; meant as an independent check of the compiled loop.
    """
    n = c.n
    cum = cumulative_table(c)
    paths: list[list[int]] = [[a] for a in range(n)]

    def position(a: int, t: int) -> int:
        path = paths[a]
        while len(path) <= t:
            s = len(path)
            path.append(step_state(cum, path[-1], rng.particle_uniform(key, n, a, s)))
        return path[t]

    kappa = [0] * n

    def alive(b: int, t: int) -> bool:
        return b == 0 or kappa[b] > t

    for a in range(1, n):
        t = 0
        while not any(alive(b, t) and position(b, t) == position(a, t)
                      and (allowed is None or allowed(b, a, t)) for b in range(a)):
            t += 1
            if t > cap:
                raise SimulationError("horizon_exceeded")
        kappa[a] = t
    return kappa


def reference_coalescence(c: Chain, key: int, allowed=None, cap: int = 100_000) -> int:
    return max(reference_kill_times(c, key, allowed, cap))


def exact_tcoal(c: Chain, max_states: int = 6) -> float:
    """E[tau_coal] from the full configuration, solving the set-valued chain exactly."""
    n = c.n
    if n > max_states:
        raise ValueError(f"exact solve limited to {max_states} states")
    if n == 1:
        return 0.0
    p = c.kernel
    sets = [s for s in range(1, 1 << n) if bin(s).count("1") >= 2]
    index = {s: i for i, s in enumerate(sets)}
    a = np.eye(len(sets))
    for s in sets:
        sites = [x for x in range(n) if s >> x & 1]
        for moves in itertools.product(range(n), repeat=len(sites)):
            prob = 1.0
            for x, y in zip(sites, moves):
                prob *= p[x, y]
            if prob == 0.0:
                continue
            image = 0
            for y in moves:
                image |= 1 << y
            if image in index:
                a[index[s], index[image]] -= prob
    h = lu_solve(a, np.ones(len(sets)))
    return float(h[index[(1 << n) - 1]])


@dataclass(frozen=True)
class CoalescenceEstimate:
    mean: float
    stderr: float
    replicas: int
    seed: int
    t_hit: float
    horizon_exceeded_count: int = 0
    degenerate: bool = False
    samples: tuple[int, ...] = ()

    @property
    def ratio_to_thit(self) -> float:
        return self.mean / self.t_hit

    def report(self, graph_label: str, n: int) -> dict:
        return {
            "graph_label": graph_label,
            "n": n,
            "replicas": self.replicas,
            "seed": self.seed,
            "mean": self.mean,
            "stderr": self.stderr,
            "t_hit": self.t_hit,
            "ratio_to_thit": self.ratio_to_thit,
            "horizon_exceeded_count": self.horizon_exceeded_count,
        }


def summarize(samples, seed: int, t_hit: float, exceeded: int = 0) -> CoalescenceEstimate:
    arr = np.asarray(samples, dtype=float)
    if arr.size == 0:
        raise SimulationError("horizon_exceeded", "every replica exceeded the cap")
    if arr.size == 1:
        return CoalescenceEstimate(float(arr[0]), 0.0, 1, seed, t_hit, exceeded, True, tuple(int(v) for v in arr))
    stderr = float(arr.std(ddof=1) / math.sqrt(arr.size))
    return CoalescenceEstimate(float(arr.mean()), stderr, arr.size, seed, t_hit, exceeded, False,
                               tuple(int(v) for v in arr))


def estimate_tcoal(c: Chain, replicas: int, seed: int, cap: int = DEFAULT_CAP,
                   t_hit: float | None = None) -> CoalescenceEstimate:
    """Monte Carlo mean of the full coalescence time; replica ``r`` uses key ``split(seed, r)``."""
    if replicas < 1:
        raise ValueError("replicas must be >= 1")
    if t_hit is None:
        t_hit = hitting_times(c).t_hit
    cum = cumulative_table(c)
    samples, exceeded = [], 0
    for r in range(replicas):
        tau = _kernels.coalesce(cum, np.uint64(rng.split(seed, r)), cap)
        if tau < 0:
            exceeded += 1
        else:
            samples.append(int(tau))
    return summarize(samples, seed, t_hit, exceeded)
