"""Graphs as edge-indicator databases and private cut-function release.

A graph on V vertices becomes a database with l = 1 and n = |V|^2: row
i*|V| + j holds the indicator of the directed pair (i, j). Privacy is at the
edge level (neighbors differ in one vertex pair). Undirected input data is
symmetrized at ingestion by default, setting both (i, j) and (j, i); a
count-once mode keeps only the given orientation since the convention
affects cut values and is a property of the dataset, not the mechanism.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .core import (
    Database,
    DataUniverse,
    RandomSource,
    ValidationError,
)
from .estimators import estimate_cut
from .mechanism import MechanismParams, sample_synthetic

MAX_ENCODED_PAIRS = 10**8

EDGE_UNIVERSE = DataUniverse(1)


class Graph:
    """Directed graph stored as a dense boolean adjacency matrix."""

    __slots__ = ("adjacency",)

    def __init__(self, adjacency):
        adj = np.asarray(adjacency, dtype=bool)
        if adj.ndim != 2 or adj.shape[0] != adj.shape[1] or adj.shape[0] < 1:
            raise ValidationError("adjacency must be a nonempty square matrix")
        adj = adj.copy()
        adj.setflags(write=False)
        object.__setattr__(self, "adjacency", adj)

    def __setattr__(self, name, value):
        raise AttributeError("Graph is immutable")

    @property
    def vertex_count(self) -> int:
        return int(self.adjacency.shape[0])

    @property
    def edges(self) -> list[tuple[int, int]]:
        return [(int(i), int(j)) for i, j in zip(*np.nonzero(self.adjacency))]

    @classmethod
    def from_edges(cls, vertex_count: int, pairs, symmetrize: bool = False) -> "Graph":
        adj = np.zeros((vertex_count, vertex_count), dtype=bool)
        for i, j in pairs:
            i, j = int(i), int(j)
            if not (0 <= i < vertex_count and 0 <= j < vertex_count):
                raise ValidationError(f"edge ({i}, {j}) has an endpoint outside [0, {vertex_count})")
            adj[i, j] = True
            if symmetrize:
                adj[j, i] = True
        return cls(adj)

    def to_database(self) -> Database:
        """Edge-indicator database; row (i, j) sits at index i*|V| + j."""
        return Database(EDGE_UNIVERSE, self.adjacency.reshape(-1).astype(np.uint8))

    @classmethod
    def from_database(cls, db: Database) -> "Graph":
        if db.universe.l != 1:
            raise ValidationError("an edge-indicator database must have l = 1")
        v = int(np.sqrt(db.n))
        if v * v != db.n:
            raise ValidationError(f"database size {db.n} is not a perfect square")
        return cls(db.rows.reshape(v, v).astype(bool))


@dataclass(frozen=True)
class CutQuery:
    """Disjoint vertex sets (S, T); answers count edges from S into T."""

    s_set: frozenset
    t_set: frozenset

    def __post_init__(self):
        s = frozenset(int(i) for i in self.s_set)
        t = frozenset(int(j) for j in self.t_set)
        if s & t:
            raise ValidationError("cut query needs disjoint vertex sets")
        object.__setattr__(self, "s_set", s)
        object.__setattr__(self, "t_set", t)

    def validate_for(self, vertex_count: int) -> None:
        for w in self.s_set | self.t_set:
            if not 0 <= w < vertex_count:
                raise ValidationError(f"vertex {w} outside [0, {vertex_count})")


def cut_value(g: Graph, q: CutQuery) -> int:
    """Exact number of edges (i, j) with i in S, j in T."""
    q.validate_for(g.vertex_count)
    if not q.s_set or not q.t_set:
        return 0
    s = sorted(q.s_set)
    t = sorted(q.t_set)
    return int(g.adjacency[np.ix_(s, t)].sum())


def release_graph(g: Graph, epsilon: float, rng: RandomSource) -> Database:
    """Private synthetic edge-indicator database for the whole graph.

    Each indicator independently survives with probability 1/(1 + e^-eps)
    and flips otherwise; one release answers every later cut query.
    """
    if g.vertex_count**2 > MAX_ENCODED_PAIRS:
        raise ValidationError(
            f"|V|^2 = {g.vertex_count ** 2} exceeds the {MAX_ENCODED_PAIRS} encoded-pair cap"
        )
    params = MechanismParams(epsilon, EDGE_UNIVERSE)
    return sample_synthetic(g.to_database(), params, rng)


def answer_cut(y: Database, q: CutQuery, epsilon: float) -> float:
    """Debiased cut answer from a released database (see estimate_cut)."""
    return estimate_cut(y, q.s_set, q.t_set, epsilon)


def random_bisection_cut(g: Graph, rng: RandomSource) -> CutQuery:
    """S = uniform floor(|V|/2)-subset, T = the complement; the largest
    |S||T| product, hence the worst case of the cut distortion bound."""
    v = g.vertex_count
    if v < 2:
        raise ValidationError("a bisection cut needs at least two vertices")
    gen = rng.generator()
    s = gen.choice(v, size=v // 2, replace=False)
    s_set = frozenset(int(i) for i in s)
    t_set = frozenset(range(v)) - s_set
    return CutQuery(s_set, t_set)


def erdos_renyi_graph(vertex_count: int, edge_prob: float, rng: RandomSource) -> Graph:
    """Undirected G(V, p) without self-loops, symmetrized into the directed
    encoding (each undirected edge sets both rows)."""
    if vertex_count < 1:
        raise ValidationError("vertex_count must be >= 1")
    if not 0.0 <= edge_prob <= 1.0:
        raise ValidationError(f"edge probability must lie in [0, 1], got {edge_prob}")
    gen = rng.generator()
    upper = np.triu(gen.random((vertex_count, vertex_count)) < edge_prob, k=1)
    return Graph(upper | upper.T)


def power_law_graph(vertex_count: int, attach_count: int, rng: RandomSource) -> Graph:
    """Preferential-attachment (Barabasi-Albert style) undirected graph.

    Starts from a star on attach_count + 1 vertices; every later vertex
    attaches to ``attach_count`` distinct existing vertices chosen with
    probability proportional to their degree.
    """
    if attach_count < 1:
        raise ValidationError("attach_count must be >= 1")
    if vertex_count < attach_count + 1:
        raise ValidationError("need vertex_count >= attach_count + 1")
    gen = rng.generator()
    adj = np.zeros((vertex_count, vertex_count), dtype=bool)
    degree_pool: list[int] = []
    for w in range(1, attach_count + 1):
        adj[0, w] = adj[w, 0] = True
        degree_pool.extend((0, w))
    for w in range(attach_count + 1, vertex_count):
        targets: set[int] = set()
        while len(targets) < attach_count:
            targets.add(int(degree_pool[gen.integers(0, len(degree_pool))]))
        for u in targets:
            adj[w, u] = adj[u, w] = True
            degree_pool.extend((w, u))
    return Graph(adj)


def read_edge_list(path, one_based: bool = False, symmetrize: bool = True, vertex_count: int | None = None) -> Graph:
    """Parse a text edge list: one ``i j`` pair per line, '#' comments.

    ``one_based`` shifts ids down by one. The vertex count defaults to one
    past the largest id seen.
    """
    pairs = []
    largest = -1
    with open(path, "r", encoding="utf-8") as fh:
        for lineno, line in enumerate(fh, start=1):
            text = line.split("#", 1)[0].strip()
            if not text:
                continue
            parts = text.split()
            if len(parts) != 2:
                raise ValidationError(f"{path}:{lineno}: expected 'i j', got {text!r}")
            try:
                i, j = int(parts[0]), int(parts[1])
            except ValueError:
                raise ValidationError(f"{path}:{lineno}: non-integer vertex id in {text!r}") from None
            if one_based:
                i, j = i - 1, j - 1
            if i < 0 or j < 0:
                raise ValidationError(f"{path}:{lineno}: negative vertex id after indexing shift")
            pairs.append((i, j))
            largest = max(largest, i, j)
    if not pairs:
        raise ValidationError(f"{path}: no edges")
    count = vertex_count if vertex_count is not None else largest + 1
    return Graph.from_edges(count, pairs, symmetrize=symmetrize)


def read_cut_spec(path) -> CutQuery:
    """Two lines of whitespace-separated vertex ids: S, then T."""
    lines = []
    with open(path, "r", encoding="utf-8") as fh:
        for line in fh:
            text = line.split("#", 1)[0].strip()
            if text:
                lines.append(text)
    if len(lines) != 2:
        raise ValidationError(f"{path}: a cut spec needs exactly two non-empty lines (S then T)")
    try:
        s = frozenset(int(w) for w in lines[0].split())
        t = frozenset(int(w) for w in lines[1].split())
    except ValueError:
        raise ValidationError(f"{path}: vertex ids must be integers") from None
    return CutQuery(s, t)
