"""Simple connected graphs, degree statistics and the generated families.

Vertices are the integers ``0..n-1``. A :class:`Graph` is validated on
construction and never mutated afterwards.
"""
from __future__ import annotations

import json
from collections import deque
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Iterable, Mapping

import numpy as np

from .errors import GraphError

FAMILIES = ("path", "cycle", "complete", "star", "lollipop", "stretched_expander", "random_regular")
RANDOM_FAMILIES = ("lollipop", "stretched_expander", "random_regular")
DEFAULT_RETRY_BUDGET = 1000


@dataclass(frozen=True)
class Graph:
    n: int
    adjacency: tuple[tuple[int, ...], ...]
    label: str = field(default="", compare=False)

    @property
    def edge_count(self) -> int:
        return sum(len(nb) for nb in self.adjacency) // 2

    @property
    def degrees(self) -> tuple[int, ...]:
        return tuple(len(nb) for nb in self.adjacency)

    def edges(self) -> list[tuple[int, int]]:
        """Edges as ``(i, j)`` with ``i < j``, sorted lexicographically."""
        return [(i, j) for i, nb in enumerate(self.adjacency) for j in nb if i < j]

    def adjacency_matrix(self) -> np.ndarray:
        a = np.zeros((self.n, self.n))
        for i, j in self.edges():
            a[i, j] = a[j, i] = 1.0
        return a

    def to_json(self) -> str:
        return json.dumps({"n": self.n, "edges": [list(e) for e in self.edges()]})

    @classmethod
    def from_json(cls, text: str, label: str = "") -> "Graph":
        obj = json.loads(text)
        return build_graph(obj["n"], [tuple(e) for e in obj["edges"]], label=label)

    def with_label(self, label: str) -> "Graph":
        return Graph(self.n, self.adjacency, label)


@dataclass(frozen=True)
class DegreeStats:
    d_min: int
    d_max: int
    d_avg: Fraction


@dataclass(frozen=True)
class FamilySpec:
    family: str
    params: Mapping[str, int]
    seed: int = 0

    @property
    def label(self) -> str:
        inner = ",".join(f"{k}={self.params[k]}" for k in sorted(self.params))
        if self.family in RANDOM_FAMILIES:
            inner += f",seed={self.seed}"
        return f"{self.family}({inner})"

    def to_dict(self) -> dict:
        d = {"family": self.family, **{k: int(v) for k, v in self.params.items()}}
        if self.family in RANDOM_FAMILIES:
            d["seed"] = self.seed
        return d

    @classmethod
    def from_dict(cls, d: Mapping) -> "FamilySpec":
        d = dict(d)
        family = d.pop("family")
        seed = int(d.pop("seed", 0))
        return cls(family, {k: int(v) for k, v in d.items()}, seed)


def build_graph(n: int, edges: Iterable[tuple[int, int]], label: str = "") -> Graph:
    """Validate an edge list and return a :class:`Graph`.

    Raises :class:`GraphError` with code ``too_small``, ``self_loop``,
    ``duplicate_edge``, ``disconnected`` or ``bad_vertex``.
    """
    if n < 2:
        raise GraphError("too_small", f"n={n}")
    nbrs: list[set[int]] = [set() for _ in range(n)]
    for i, j in edges:
        i, j = int(i), int(j)
        if not (0 <= i < n and 0 <= j < n):
            raise GraphError("bad_vertex", f"edge ({i},{j}) outside [0,{n})")
        if i == j:
            raise GraphError("self_loop", f"vertex {i}")
        if j in nbrs[i]:
            raise GraphError("duplicate_edge", f"({min(i, j)},{max(i, j)})")
        nbrs[i].add(j)
        nbrs[j].add(i)
    adjacency = tuple(tuple(sorted(s)) for s in nbrs)
    g = Graph(n, adjacency, label)
    if any(d < 0 for d in distances(g, 0)):
        raise GraphError("disconnected")
    return g


def degree_stats(g: Graph) -> DegreeStats:
    deg = g.degrees
    return DegreeStats(min(deg), max(deg), Fraction(2 * g.edge_count, g.n))


def distances(g: Graph, source: int) -> list[int]:
    """BFS distances from ``source``; unreachable vertices get -1."""
    dist = [-1] * g.n
    dist[source] = 0
    queue = deque([source])
    while queue:
        v = queue.popleft()
        for w in g.adjacency[v]:
            if dist[w] < 0:
                dist[w] = dist[v] + 1
                queue.append(w)
    return dist


def diameter(g: Graph) -> int:
    return max(max(distances(g, s)) for s in range(g.n))


def check_path_fact(g: Graph):
    """Geodesic length bound: ``diam(G) <= 3n/d_min - 1``."""
    from .checks import BoundCheck

    stats = degree_stats(g)
    return BoundCheck.le("diameter_bound", diameter(g), 3 * g.n / stats.d_min - 1, context=g.label)


# --- generators -------------------------------------------------------------

def _require(cond: bool, msg: str) -> None:
    if not cond:
        raise GraphError("infeasible_spec", msg)


def _is_connected(n: int, edges: list[tuple[int, int]]) -> bool:
    nbrs: list[list[int]] = [[] for _ in range(n)]
    for i, j in edges:
        nbrs[i].append(j)
        nbrs[j].append(i)
    seen = {0}
    stack = [0]
    while stack:
        for w in nbrs[stack.pop()]:
            if w not in seen:
                seen.add(w)
                stack.append(w)
    return len(seen) == n


def random_regular_edges(
    n: int, d: int, rng: np.random.Generator, retry_budget: int = DEFAULT_RETRY_BUDGET
) -> list[tuple[int, int]]:
    """Pairing model with rejection of loops, multi-edges and disconnection."""
    _require(0 < d < n, f"need 0 < d < n, got d={d}, n={n}")
    _require((n * d) % 2 == 0, f"n*d must be even, got n={n}, d={d}")
    stubs = np.repeat(np.arange(n), d)
    for _ in range(retry_budget):
        perm = rng.permutation(stubs)
        pairs = perm.reshape(-1, 2)
        a, b = np.minimum(pairs[:, 0], pairs[:, 1]), np.maximum(pairs[:, 0], pairs[:, 1])
        if np.any(a == b):
            continue
        edges = sorted(set(zip(a.tolist(), b.tolist())))
        if len(edges) != len(pairs):
            continue
        if not _is_connected(n, edges):
            continue
        return edges
    raise GraphError("generation_failed", f"random {d}-regular on {n} vertices after {retry_budget} tries")


def subdivide(n: int, edges: list[tuple[int, int]], k: int) -> tuple[int, list[tuple[int, int]]]:
    """Replace every edge by a path with ``k`` edges; new vertices are appended."""
    _require(k >= 1, f"k must be >= 1, got {k}")
    out: list[tuple[int, int]] = []
    nxt = n
    for i, j in edges:
        chain = [i] + list(range(nxt, nxt + k - 1)) + [j]
        nxt += k - 1
        out.extend(zip(chain[:-1], chain[1:]))
    return nxt, [(min(a, b), max(a, b)) for a, b in out]


def generate(spec: FamilySpec, retry_budget: int = DEFAULT_RETRY_BUDGET) -> Graph:
    """Build a member of one of the supported families.

    Randomized families draw from ``numpy.random.default_rng(spec.seed)`` and
    are deterministic given the seed.
    """
    fam, p = spec.family, spec.params
    _require(fam in FAMILIES, f"unknown family {fam!r}")
    try:
        if fam == "path":
            n = p["n"]
            _require(n >= 2, "path needs n >= 2")
            edges = [(i, i + 1) for i in range(n - 1)]
        elif fam == "cycle":
            n = p["n"]
            _require(n >= 3, "cycle needs n >= 3")
            edges = [(i, i + 1) for i in range(n - 1)] + [(0, n - 1)]
        elif fam == "complete":
            n = p["n"]
            _require(n >= 2, "complete needs n >= 2")
            edges = [(i, j) for i in range(n) for j in range(i + 1, n)]
        elif fam == "star":
            n = p["n"]
            _require(n >= 2, "star needs n >= 2")
            edges = [(0, j) for j in range(1, n)]
        elif fam == "random_regular":
            n, d = p["n"], p["d"]
            edges = random_regular_edges(n, d, np.random.default_rng(spec.seed), retry_budget)
        elif fam == "lollipop":
            n, d = p["n"], p["d"]
            _require(n % 2 == 0, f"lollipop needs even n, got {n}")
            half = n // 2
            edges = random_regular_edges(half, d, np.random.default_rng(spec.seed), retry_budget)
            tail = [0] + list(range(half, n))
            edges = edges + list(zip(tail[:-1], tail[1:]))
        else:  # stretched_expander
            n0, k = p["n0"], p["k"]
            base = random_regular_edges(n0, 3, np.random.default_rng(spec.seed), retry_budget)
            n, edges = subdivide(n0, base, k)
    except KeyError as exc:
        raise GraphError("infeasible_spec", f"{fam} missing parameter {exc}") from None
    return build_graph(n, edges, label=spec.label)
