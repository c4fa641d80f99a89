"""Failure-annotated graphs, shortest expected-delay trees and critical paths.

Node ids are 1-based everywhere in the public API.
"""

from __future__ import annotations

import heapq
import math
from collections import deque
from dataclasses import dataclass, field
from functools import cached_property
from typing import Iterable, Mapping

import numpy as np

from .errors import ParseError, UnknownEdge, ValidationError

Edge = tuple[int, int]

# relative tolerance under which two path costs count as tied
COST_RTOL = 1e-12


def edge_key(i: int, j: int) -> Edge:
    return (i, j) if i < j else (j, i)


@dataclass(frozen=True)
class FailureGraph:
    """Undirected connected graph with one failure probability per link."""

    node_count: int
    failure_prob: Mapping[Edge, float] = field(default_factory=dict)

    def __post_init__(self):
        n = self.node_count
        if not isinstance(n, int) or n < 1:
            raise ValidationError(f"node_count must be a positive integer, got {n!r}")
        probs = {}
        for (i, j), p in self.failure_prob.items():
            if i == j:
                raise ValidationError(f"self-loop on node {i}")
            for v in (i, j):
                if not 1 <= v <= n:
                    raise ValidationError(f"node id {v} out of range 1..{n}")
            p = float(p)
            if not 0.0 <= p < 1.0:
                raise ValidationError(f"failure probability of edge ({i},{j}) must lie in [0,1), got {p}")
            key = edge_key(i, j)
            if key in probs and probs[key] != p:
                raise ValidationError(f"conflicting probabilities for edge {key}")
            probs[key] = p
        object.__setattr__(self, "failure_prob", dict(sorted(probs.items())))
        if len(self._components()) > 1:
            raise ValidationError("graph is disconnected")

    @classmethod
    def from_edges(cls, edges: Iterable[tuple[int, int, float]], node_count: int | None = None) -> FailureGraph:
        edges = list(edges)
        if node_count is None:
            node_count = max((max(i, j) for i, j, _ in edges), default=1)
        probs: dict[Edge, float] = {}
        for i, j, p in edges:
            key = edge_key(i, j)
            if key in probs and probs[key] != float(p):
                raise ValidationError(f"conflicting probabilities for edge {key}")
            probs[key] = float(p)
        return cls(node_count, probs)

    @property
    def nodes(self) -> range:
        return range(1, self.node_count + 1)

    @property
    def edges(self) -> list[Edge]:
        return list(self.failure_prob)

    @property
    def edge_count(self) -> int:
        return len(self.failure_prob)

    @property
    def is_acyclic(self) -> bool:
        # connected, so a tree iff it has n-1 edges
        return self.edge_count == self.node_count - 1

    @property
    def p_max(self) -> float:
        return max(self.failure_prob.values(), default=0.0)

    @cached_property
    def adjacency(self) -> dict[int, list[int]]:
        adj: dict[int, list[int]] = {v: [] for v in self.nodes}
        for i, j in self.failure_prob:
            adj[i].append(j)
            adj[j].append(i)
        for v in adj:
            adj[v].sort()
        return adj

    @cached_property
    def edge_arrays(self) -> tuple[np.ndarray, np.ndarray, np.ndarray]:
        """0-based endpoint arrays and failure probabilities, in edge order."""
        u = np.array([i - 1 for i, _ in self.failure_prob], dtype=np.intp)
        v = np.array([j - 1 for _, j in self.failure_prob], dtype=np.intp)
        p = np.array(list(self.failure_prob.values()), dtype=np.float64)
        return u, v, p

    def neighbors(self, i: int) -> list[int]:
        return self.adjacency[i]

    def prob(self, i: int, j: int) -> float:
        try:
            return self.failure_prob[edge_key(i, j)]
        except KeyError:
            raise UnknownEdge(f"no edge between {i} and {j}") from None

    def has_edge(self, i: int, j: int) -> bool:
        return edge_key(i, j) in self.failure_prob

    def with_prob(self, i: int, j: int, p: float) -> FailureGraph:
        """Copy of the graph with edge (i, j) set to failure probability ``p``."""
        key = edge_key(i, j)
        if key not in self.failure_prob:
            raise UnknownEdge(f"no edge between {i} and {j}")
        probs = dict(self.failure_prob)
        probs[key] = p
        return FailureGraph(self.node_count, probs)

    def _components(self) -> list[set[int]]:
        adj: dict[int, list[int]] = {v: [] for v in range(1, self.node_count + 1)}
        for i, j in self.failure_prob:
            adj[i].append(j)
            adj[j].append(i)
        seen: set[int] = set()
        comps = []
        for s in adj:
            if s in seen:
                continue
            comp = {s}
            stack = [s]
            while stack:
                v = stack.pop()
                for w in adj[v]:
                    if w not in comp:
                        comp.add(w)
                        stack.append(w)
            seen |= comp
            comps.append(comp)
        return comps

    def hop_distances(self, source: int) -> dict[int, int]:
        self._check_node(source)
        dist = {source: 0}
        queue = deque([source])
        while queue:
            v = queue.popleft()
            for w in self.adjacency[v]:
                if w not in dist:
                    dist[w] = dist[v] + 1
                    queue.append(w)
        return dist

    def _check_node(self, i: int) -> None:
        if not 1 <= i <= self.node_count:
            raise ValidationError(f"node id {i} out of range 1..{self.node_count}")

    def to_text(self) -> str:
        return "".join(f"{i},{j},{p!r}\n" for (i, j), p in self.failure_prob.items())


def parse_graph(text: str) -> FailureGraph:
    """Parse an ``i,j,p`` edge list.

    ``#`` comment lines and blank lines are skipped. A document without any
    edge describes the single-node network.
    """
    edges = []
    for lineno, raw in enumerate(text.splitlines(), start=1):
        line = raw.strip()
        if not line or line.startswith("#"):
            continue
        parts = [s.strip() for s in line.split(",")]
        if len(parts) != 3:
            raise ParseError(f"line {lineno}: expected 'i,j,p', got {raw!r}")
        try:
            i, j = int(parts[0]), int(parts[1])
            p = float(parts[2])
        except ValueError:
            raise ParseError(f"line {lineno}: cannot parse {raw!r}") from None
        if not math.isfinite(p):
            raise ValidationError(f"line {lineno}: probability must be finite")
        if i < 1 or j < 1:
            raise ValidationError(f"line {lineno}: node ids are 1-based")
        edges.append((i, j, p))
    return FailureGraph.from_edges(edges)


def load_graph(path) -> FailureGraph:
    with open(path, encoding="utf-8") as fh:
        return parse_graph(fh.read())


@dataclass(frozen=True)
class SpanningTree:
    """Rooted tree as a child -> parent map."""

    root: int
    parent: Mapping[int, int]
    edge_prob: Mapping[Edge, float]

    @property
    def nodes(self) -> list[int]:
        return sorted({self.root, *self.parent})

    @property
    def edges(self) -> list[Edge]:
        return sorted(edge_key(c, q) for c, q in self.parent.items())

    def prob_to(self, child: int) -> float:
        """Failure probability of the edge from ``child`` to its parent."""
        return self.edge_prob[edge_key(child, self.parent[child])]

    @cached_property
    def children(self) -> dict[int, list[int]]:
        kids: dict[int, list[int]] = {v: [] for v in self.nodes}
        for c, q in self.parent.items():
            kids[q].append(c)
        for v in kids:
            kids[v].sort()
        return kids

    def path(self, node: int) -> tuple[int, ...]:
        seq = [node]
        while seq[-1] != self.root:
            seq.append(self.parent[seq[-1]])
            if len(seq) > len(self.parent) + 1:
                raise ValidationError("parent map contains a cycle")
        return tuple(reversed(seq))

    def depth(self, node: int) -> int:
        return len(self.path(node)) - 1

    def leaves(self) -> list[int]:
        return [v for v in self.nodes if v != self.root and not self.children[v]]

    def without(self, removed: Iterable[int]) -> SpanningTree:
        """Tree with the given nodes (and their parent edges) dropped."""
        removed = set(removed)
        parent = {c: q for c, q in self.parent.items() if c not in removed}
        keep = {edge_key(c, q) for c, q in parent.items()}
        return SpanningTree(self.root, parent, {e: p for e, p in self.edge_prob.items() if e in keep})


def expected_delay(p: float) -> float:
    return 1.0 / (1.0 - p)


def _better(cost: float, path: tuple[int, ...], best_cost: float, best_path: tuple[int, ...] | None) -> bool:
    if best_path is None:
        return True
    tol = COST_RTOL * max(abs(cost), abs(best_cost))
    if cost < best_cost - tol:
        return True
    if cost > best_cost + tol:
        return False
    return path < best_path


def shortest_path_tree(g: FailureGraph, source: int) -> SpanningTree:
    """Dijkstra tree under expected-delay weights ``1/(1-p)``.

    Equal-cost alternatives (to relative tolerance ``COST_RTOL``) resolve to
    the lexicographically smallest root-to-node sequence.
    """
    g._check_node(source)
    best: dict[int, tuple[float, tuple[int, ...]]] = {source: (0.0, (source,))}
    settled: set[int] = set()
    heap = [(0.0, (source,), source)]
    while heap:
        cost, path, v = heapq.heappop(heap)
        if v in settled or best[v][1] != path:
            continue
        settled.add(v)
        for w in g.neighbors(v):
            if w in settled:
                continue
            c = cost + expected_delay(g.prob(v, w))
            cand = path + (w,)
            old = best.get(w)
            if _better(c, cand, *(old if old else (math.inf, None))):
                best[w] = (c, cand)
                heapq.heappush(heap, (c, cand, w))
    parent = {v: path[-2] for v, (_, path) in best.items() if v != source}
    edge_prob = {edge_key(c, q): g.prob(c, q) for c, q in parent.items()}
    return SpanningTree(source, parent, edge_prob)


def tree_of(g: FailureGraph, source: int) -> SpanningTree:
    """Root an acyclic graph at ``source`` (its only spanning tree)."""
    if not g.is_acyclic:
        raise ValidationError("graph has cycles")
    return shortest_path_tree(g, source)


@dataclass(frozen=True)
class CriticalPathSet:
    paths: tuple[tuple[int, ...], ...]
    leaf_nodes: frozenset[int]

    def path_to(self, leaf: int) -> tuple[int, ...]:
        for p in self.paths:
            if p[-1] == leaf:
                return p
        raise KeyError(leaf)


def is_subpath(a: tuple[int, ...], b: tuple[int, ...]) -> bool:
    """True if ``a`` (two or more nodes) occurs contiguously inside ``b``."""
    if len(a) < 2 or len(a) > len(b):
        return False
    return any(b[s:s + len(a)] == a for s in range(len(b) - len(a) + 1))


def critical_paths(t: SpanningTree) -> CriticalPathSet:
    """Root-to-leaf paths of ``t``; paths ending at internal nodes are subpaths
    of these and are dropped."""
    leaves = t.leaves()
    return CriticalPathSet(tuple(t.path(v) for v in leaves), frozenset(leaves))


def eccentricity(g: FailureGraph, i: int) -> int:
    return max(g.hop_distances(i).values())


def diameter(g: FailureGraph) -> int:
    return max(eccentricity(g, i) for i in g.nodes)
