"""Independent reference computations and random inputs for the tests.

Nothing here calls into the code paths it is used to check.
"""

import itertools

import numpy as np

from lifecd.graph import FailureGraph


def random_tree(rng, n, p_low=0.0, p_high=0.8):
    labels = rng.permutation(n) + 1
    edges = []
    for k in range(1, n):
        parent = int(rng.integers(0, k))
        edges.append((int(labels[k]), int(labels[parent]), float(rng.uniform(p_low, p_high))))
    return FailureGraph.from_edges(edges, node_count=n)


def random_cyclic(rng, n, p_low=0.0, p_high=0.8, extra=None):
    tree = random_tree(rng, n, p_low, p_high)
    absent = [e for e in itertools.combinations(range(1, n + 1), 2) if e not in tree.failure_prob]
    k = extra if extra is not None else int(rng.integers(1, len(absent) + 1))
    picks = rng.choice(len(absent), size=k, replace=False)
    probs = dict(tree.failure_prob)
    for idx in picks:
        probs[absent[idx]] = float(rng.uniform(p_low, p_high))
    return FailureGraph(n, probs)


def simple_paths(g, src, dst):
    """All simple paths src -> dst by depth-first enumeration."""
    out = []

    def walk(path):
        v = path[-1]
        if v == dst:
            out.append(tuple(path))
            return
        for w in g.neighbors(v):
            if w not in path:
                walk(path + [w])

    walk([src])
    return out


def path_cost(g, path):
    return sum(1.0 / (1.0 - g.prob(a, b)) for a, b in zip(path, path[1:]))


def brute_convolve(f, g):
    n = len(f)
    out = np.zeros(n)
    for k in range(n):
        out[k] = sum(f[i] * g[k - i] for i in range(k + 1))
    return out


def bfs_ecc(g, i):
    """Eccentricity by repeated frontier expansion on the edge list."""
    reached = {i}
    frontier = {i}
    steps = 0
    while len(reached) < g.node_count:
        frontier = {b for a, b in g.edges if a in frontier and b not in reached} | {
            a for a, b in g.edges if b in frontier and a not in reached
        }
        reached |= frontier
        steps += 1
    return steps


def tree_convergence_pmf(g, source, n_max):
    """Exact pmf on a tree via the recursion T(v) = max_c (X_vc + T(c)),
    computed with brute convolution and explicit cdf products."""
    def below(v, parent):
        cdf = np.ones(n_max + 1)
        for c in g.neighbors(v):
            if c == parent:
                continue
            p = g.prob(v, c)
            geo = np.array([0.0] + [(1 - p) * p ** (k - 1) for k in range(1, n_max + 1)])
            sub = np.diff(below(c, v), prepend=0.0)
            cdf = cdf * np.cumsum(brute_convolve(geo, sub))
        return cdf

    return np.diff(below(source, None), prepend=0.0)
