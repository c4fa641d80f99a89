"""Convergence-time distribution of max-consensus by spanning-tree reduction.

The network is replaced by its shortest expected-delay tree rooted at the
source. Leaves start with the geometric delay of their parent link; the
deepest root-to-leaf paths are then folded toward the root, a lone child by
convolution with its grandparent link (unicast) and siblings by cdf product
(broadcast), until one distribution remains.

On trees the result is exact. On cyclic graphs the discarded links can only
speed propagation up, so the result is a stochastic upper bound.
"""

from __future__ import annotations

import logging
import warnings
from collections import defaultdict
from dataclasses import dataclass, field
from typing import Mapping

from .dist import (
    DEFAULT_CAP,
    DEFAULT_EPS,
    DelayDistribution,
    geometric,
    max_combine,
    sum_delays,
    truncation_length,
)
from .errors import DomainError, InternalInvariantViolation, NotTerminal, TruncationError
from .graph import (
    CriticalPathSet,
    FailureGraph,
    SpanningTree,
    critical_paths,
    eccentricity,
    diameter,
    shortest_path_tree,
)

log = logging.getLogger(__name__)

MIN_N_MAX = 32


@dataclass(frozen=True)
class TraceStep:
    kind: str  # "sum", "max", "final-sum" or "final-max"
    parent: int
    children: tuple[int, ...]
    path_length: int
    link: tuple[int, int] | None = None  # (grandparent, parent) for sums

    def describe(self) -> str:
        q = self.parent
        if self.kind.endswith("sum"):
            (j,) = self.children
            a, b = self.link
            return f"{self.kind:9s} F[{a},{b}] <- sum(F[{q},{j}], geometric(p[{a},{b}]))  path length {self.path_length}"
        args = ", ".join(f"F[{q},{j}]" for j in self.children)
        return f"{self.kind:9s} F[{q},{self.children[0]}] <- max({args})  path length {self.path_length}"


@dataclass(frozen=True)
class ReductionState:
    tree: SpanningTree
    critical: CriticalPathSet
    leaf_dists: Mapping[int, DelayDistribution]
    n_max: int
    trace: tuple[TraceStep, ...] = ()

    def __post_init__(self):
        if set(self.leaf_dists) != set(self.critical.leaf_nodes):
            raise InternalInvariantViolation(
                f"leaf distributions {sorted(self.leaf_dists)} do not match leaves {sorted(self.critical.leaf_nodes)}"
            )

    def path_length(self, leaf: int) -> int:
        return len(self.critical.path_to(leaf)) - 1

    @property
    def size(self) -> int:
        """Remaining tree edges plus leaf distributions."""
        return len(self.tree.parent) + len(self.leaf_dists)

    def is_terminal(self) -> bool:
        leaves = self.critical.leaf_nodes
        if not leaves:
            return True
        lengths = [self.path_length(j) for j in leaves]
        if len(leaves) == 1 and lengths[0] == 2:
            return True
        return all(ell == 1 for ell in lengths)


@dataclass(frozen=True)
class EngineReport:
    distribution: DelayDistribution
    expected_value: float
    exact: bool
    reduction_trace: tuple[TraceStep, ...]
    tree: SpanningTree
    source: int
    golfar: float = field(default=float("nan"))

    @property
    def tail_mass(self) -> float:
        return self.distribution.tail_mass

    @property
    def n_max(self) -> int:
        return self.distribution.n_max


def initial_state(tree: SpanningTree, n_max: int) -> ReductionState:
    crit = critical_paths(tree)
    leaf_dists = {j: geometric(tree.prob_to(j), n_max) for j in sorted(crit.leaf_nodes)}
    return ReductionState(tree, crit, leaf_dists, n_max)


def reduce_once(state: ReductionState) -> ReductionState:
    """Fold every deepest critical path one step toward the root."""
    if state.is_terminal():
        raise InternalInvariantViolation("reduce_once called on a terminal state")
    tree = state.tree
    leaves = sorted(state.critical.leaf_nodes)
    ell = max(state.path_length(j) for j in leaves)
    groups: dict[int, list[int]] = defaultdict(list)
    for j in leaves:
        if state.path_length(j) == ell:
            groups[tree.parent[j]].append(j)

    dists = dict(state.leaf_dists)
    removed: list[int] = []
    steps = []
    for q in sorted(groups):
        kids = groups[q]
        if len(kids) == 1:
            (j,) = kids
            if tree.children[q] != [j] or q == tree.root:
                raise InternalInvariantViolation(f"unicast at {q} but it has children {tree.children[q]}")
            link = geometric(tree.prob_to(q), state.n_max)
            dists[q] = sum_delays(dists.pop(j), link)
            removed.append(j)
            steps.append(TraceStep("sum", q, (j,), ell, (tree.parent[q], q)))
        else:
            rep, *rest = kids
            dists[rep] = max_combine([dists[j] for j in kids])
            for j in rest:
                del dists[j]
            removed.extend(rest)
            steps.append(TraceStep("max", q, tuple(kids), ell))

    new_tree = tree.without(removed)
    new_crit = critical_paths(new_tree)
    new_state = ReductionState(new_tree, new_crit, dists, state.n_max, state.trace + tuple(steps))
    if new_state.size >= state.size:
        raise InternalInvariantViolation("reduction made no progress")
    return new_state


def finalize(state: ReductionState) -> DelayDistribution:
    """Final unicast or broadcast step into the source."""
    dist, _ = _finalize(state)
    return dist


def _finalize(state: ReductionState) -> tuple[DelayDistribution, TraceStep | None]:
    if not state.is_terminal():
        raise NotTerminal("state still has reducible paths")
    tree = state.tree
    leaves = sorted(state.critical.leaf_nodes)
    if not leaves:
        return DelayDistribution.point_mass(0, state.n_max), None
    if len(leaves) == 1 and state.path_length(leaves[0]) == 2:
        j = leaves[0]
        q = tree.parent[j]
        link = geometric(tree.prob_to(q), state.n_max)
        return sum_delays(state.leaf_dists[j], link), TraceStep("final-sum", q, (j,), 2, (tree.root, q))
    return (
        max_combine([state.leaf_dists[j] for j in leaves]),
        TraceStep("final-max", tree.root, tuple(leaves), 1),
    )


def reduce_tree(tree: SpanningTree, n_max: int) -> tuple[DelayDistribution, tuple[TraceStep, ...]]:
    state = initial_state(tree, n_max)
    while not state.is_terminal():
        state = reduce_once(state)
    dist, last = _finalize(state)
    trace = state.trace + ((last,) if last else ())
    return dist, trace


def replay_trace(tree: SpanningTree, trace, n_max: int) -> DelayDistribution:
    """Recompute a distribution from a recorded reduction trace."""
    dists = {j: geometric(tree.prob_to(j), n_max) for j in tree.leaves()}
    if not trace:
        return DelayDistribution.point_mass(0, n_max)
    for step in trace:
        if step.kind in ("sum", "final-sum"):
            (j,) = step.children
            out = sum_delays(dists.pop(j), geometric(tree.prob_to(step.parent), n_max))
            if step.kind == "final-sum":
                return out
            dists[step.parent] = out
        elif step.kind in ("max", "final-max"):
            out = max_combine([dists.pop(j) for j in step.children])
            if step.kind == "final-max":
                return out
            dists[step.children[0]] = out
        else:
            raise ValueError(f"unknown trace step {step.kind!r}")
    raise ValueError("trace has no final step")


def initial_window(tree: SpanningTree) -> int:
    """Starting truncation length: a power of two above a few times the sum of
    all tree links' expected delays (which bounds the mean)."""
    total = sum(1.0 / (1.0 - p) for p in tree.edge_prob.values())
    n = MIN_N_MAX
    while n < 4 * total:
        n *= 2
    return n


def run_lifecd(
    g: FailureGraph,
    source: int,
    eps_trunc: float = DEFAULT_EPS,
    cap: int = DEFAULT_CAP,
    n_max: int | None = None,
) -> EngineReport:
    """Convergence-time distribution for information starting at ``source``.

    The window doubles from a small start until ``tail_mass <= eps_trunc``.
    The Markov-inequality length is a guaranteed-sufficient ceiling for that
    growth, and ``cap`` a hard one. Pass ``n_max`` to use a fixed window.
    """
    if not 0.0 < eps_trunc < 1.0:
        raise DomainError(f"eps_trunc must lie in (0,1), got {eps_trunc}")
    tree = shortest_path_tree(g, source)
    bound = golfar_bound(g, source)
    if g.node_count == 1:
        dist = DelayDistribution.point_mass(0, n_max or 1)
        return EngineReport(dist, 0.0, True, (), tree, source, bound)

    if n_max is not None:
        dist, trace = reduce_tree(tree, n_max)
    else:
        with warnings.catch_warnings():
            warnings.simplefilter("ignore")
            ceiling = truncation_length(g.node_count, g.p_max, eps_trunc, cap)
        window = min(initial_window(tree), ceiling)
        while True:
            dist, trace = reduce_tree(tree, window)
            if dist.tail_mass <= eps_trunc or window >= ceiling:
                break
            window = min(2 * window, ceiling)
        if dist.tail_mass > eps_trunc:
            raise TruncationError(
                f"tail mass {dist.tail_mass:.3g} > eps {eps_trunc} at n_max={window} (cap {cap})"
            )
        log.debug("window %d, tail %.3g", window, dist.tail_mass)
    return EngineReport(dist, dist.expectation(), g.is_acyclic, trace, tree, source, bound)


def golfar_bound(g: FailureGraph, source: int | None = None) -> float:
    """Mean convergence bound ``hops / (1 - p_max)``; hops is the source's
    eccentricity when known, else the diameter."""
    hops = eccentricity(g, source) if source is not None else diameter(g)
    return hops / (1.0 - g.p_max)
