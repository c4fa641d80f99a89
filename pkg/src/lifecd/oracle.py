"""Ground truth for small networks.

With a single source holding the maximum, the protocol state is fully
described by the set of nodes that already hold it. That set only grows:
in each round every uninformed node joins if at least one link to an
informed neighbor is up. Links fail independently per round, one draw per
undirected edge.
"""

from __future__ import annotations

import numpy as np

from .dist import DelayDistribution
from .errors import DomainError, TooLarge
from .graph import FailureGraph

MAX_ORACLE_NODES = 20
# transition lists are cached per call only below this size
_CACHE_NODES = 14

GENERATOR_ID = "numpy.random.PCG64"


def _join_probs(g: FailureGraph, informed: int) -> list[tuple[int, float]]:
    """(node bit, success probability) for each uninformed node with an
    informed neighbor."""
    out = []
    for j in g.nodes:
        bit = 1 << (j - 1)
        if informed & bit:
            continue
        stay = 1.0
        touched = False
        for i in g.neighbors(j):
            if informed & (1 << (i - 1)):
                stay *= g.prob(i, j)
                touched = True
        if touched:
            out.append((bit, 1.0 - stay))
    return out


def _transitions(g: FailureGraph, informed: int) -> list[tuple[int, float]]:
    outcomes = [(informed, 1.0)]
    for bit, q in _join_probs(g, informed):
        nxt = []
        for s, pr in outcomes:
            if q < 1.0:
                nxt.append((s, pr * (1.0 - q)))
            if q > 0.0:
                nxt.append((s | bit, pr * q))
        outcomes = nxt
    return outcomes


def exact_distribution(g: FailureGraph, source: int, horizon: int | None = None) -> DelayDistribution:
    """Exact distribution of the first round at which every node is informed.

    Forward-propagates the informed-set chain for ``horizon`` rounds; mass
    not yet absorbed by then is the tail. ``horizon`` defaults to the window
    the analytic engine settles on for the same input.
    """
    n = g.node_count
    if n > MAX_ORACLE_NODES:
        raise TooLarge(f"oracle limited to {MAX_ORACLE_NODES} nodes, got {n}")
    g._check_node(source)
    if horizon is None:
        from .engine import run_lifecd

        horizon = run_lifecd(g, source).n_max
    if not isinstance(horizon, (int, np.integer)) or horizon < 1:
        raise DomainError(f"horizon must be a positive integer, got {horizon!r}")

    full = (1 << n) - 1
    pmf = np.zeros(horizon + 1)
    start = 1 << (source - 1)
    if start == full:
        pmf[0] = 1.0
        return DelayDistribution.from_pmf(pmf)

    cache: dict[int, list[tuple[int, float]]] = {}
    mass = {start: 1.0}
    for k in range(1, horizon + 1):
        nxt: dict[int, float] = {}
        for s, m in mass.items():
            trans = cache.get(s)
            if trans is None:
                trans = _transitions(g, s)
                if n <= _CACHE_NODES:
                    cache[s] = trans
            for s2, pr in trans:
                nxt[s2] = nxt.get(s2, 0.0) + m * pr
        pmf[k] = nxt.pop(full, 0.0)
        mass = {s: m for s, m in nxt.items() if m > 0.0}
        if not mass:
            break
    return DelayDistribution.from_pmf(pmf)


def _run(rng: np.random.Generator, g: FailureGraph, source: int) -> int:
    u, v, p = g.edge_arrays
    informed = np.zeros(g.node_count, dtype=bool)
    informed[source - 1] = True
    t = 0
    while not informed.all():
        t += 1
        up = rng.random(len(p)) >= p
        a = informed[u]
        b = informed[v]
        hit = up & (a ^ b)
        informed[u[hit]] = True
        informed[v[hit]] = True
    return t


def _run_values(rng: np.random.Generator, g: FailureGraph, x0) -> int:
    """Literal value-level protocol: each node keeps the max over itself and
    neighbors reached over working links."""
    u, v, p = g.edge_arrays
    x = np.array(x0, dtype=np.float64)
    if x.shape != (g.node_count,):
        raise DomainError(f"need {g.node_count} initial values, got shape {x.shape}")
    target = x.max()
    t = 0
    while not (x == target).all():
        t += 1
        up = rng.random(len(p)) >= p
        nxt = x.copy()
        np.maximum.at(nxt, u[up], x[v[up]])
        np.maximum.at(nxt, v[up], x[u[up]])
        x = nxt
    return t


def sample_convergence(g: FailureGraph, source: int, rng_seed: int, initial_values=None) -> int:
    """One realized convergence round from a fresh ``PCG64`` stream.

    With ``initial_values`` the real-valued update is simulated instead of
    informed sets; ``source`` is then ignored and convergence means every
    node holds the largest initial value. Both modes consume the same
    random draws, so a unique maximum at ``source`` gives identical results.
    """
    g._check_node(source)
    rng = np.random.Generator(np.random.PCG64(rng_seed))
    if initial_values is not None:
        return _run_values(rng, g, initial_values)
    return _run(rng, g, source)
