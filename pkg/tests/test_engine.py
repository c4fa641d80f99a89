import numpy as np
import pytest

from lifecd.dist import DelayDistribution, geometric, max_combine, sum_delays
from lifecd.engine import (
    finalize,
    golfar_bound,
    initial_state,
    reduce_once,
    reduce_tree,
    replay_trace,
    run_lifecd,
)
from lifecd.errors import NotTerminal, TruncationError
from lifecd.graph import diameter, eccentricity, parse_graph, shortest_path_tree
from lifecd.oracle import exact_distribution

from helpers import random_cyclic, random_tree, tree_convergence_pmf

N = 64


def test_fig3b_expected_value(fig3b):
    rep = run_lifecd(fig3b, 1)
    assert rep.expected_value == pytest.approx(3.76223, abs=1e-3)
    assert rep.exact is True
    assert rep.tail_mass <= 1e-6


def test_fig2a_expected_value(fig2a):
    rep = run_lifecd(fig2a, 1)
    assert rep.expected_value == pytest.approx(3.76, abs=0.01)
    assert rep.exact is False


def test_single_edge_is_geometric():
    rep = run_lifecd(parse_graph("1,2,0.5"), 1)
    ref = geometric(0.5, rep.n_max)
    np.testing.assert_allclose(rep.distribution.pmf, ref.pmf, atol=1e-15)


def test_single_node_point_mass():
    rep = run_lifecd(parse_graph(""), 1)
    assert rep.distribution.pmf[0] == 1.0
    assert rep.exact and rep.expected_value == 0.0


def test_walkthrough_steps(fig3b):
    t = shortest_path_tree(fig3b, 1)
    s0 = initial_state(t, N)
    assert s0.critical.leaf_nodes == {3, 5}
    np.testing.assert_array_equal(s0.leaf_dists[5].pmf, geometric(0.3, N).pmf)

    s1 = reduce_once(s0)
    assert s1.critical.leaf_nodes == {3, 4}
    assert set(s1.critical.paths) == {(1, 2, 3), (1, 2, 4)}
    f24 = sum_delays(geometric(0.3, N), geometric(0.2, N))
    np.testing.assert_allclose(s1.leaf_dists[4].pmf, f24.pmf, atol=1e-15)
    assert s1.trace[-1].kind == "sum"

    s2 = reduce_once(s1)
    assert s2.critical.leaf_nodes == {3}
    f23 = max_combine([geometric(0.2, N), f24])
    np.testing.assert_allclose(s2.leaf_dists[3].cdf, f23.cdf, atol=1e-15)
    assert s2.trace[-1].kind == "max" and s2.trace[-1].children == (3, 4)
    assert s2.is_terminal()

    fz = finalize(s2)
    np.testing.assert_allclose(fz.pmf, sum_delays(f23, geometric(0.05, N)).pmf, atol=1e-15)


def test_finalize_not_terminal(fig3b):
    with pytest.raises(NotTerminal):
        finalize(initial_state(shortest_path_tree(fig3b, 1), N))


def test_star_is_one_broadcast():
    g = parse_graph("1,2,0.1\n1,3,0.4\n1,4,0.7")
    s = initial_state(shortest_path_tree(g, 1), N)
    assert s.is_terminal()
    ref = max_combine([geometric(p, N) for p in (0.1, 0.4, 0.7)])
    np.testing.assert_allclose(finalize(s).cdf, ref.cdf, atol=1e-15)
    _, trace = reduce_tree(shortest_path_tree(g, 1), N)
    assert [st.kind for st in trace] == ["final-max"]


def test_direct_leaf_finalizes_to_itself():
    s = initial_state(shortest_path_tree(parse_graph("1,2,0.35"), 1), N)
    np.testing.assert_array_equal(finalize(s).pmf, geometric(0.35, N).pmf)


def test_shorter_sibling_waits():
    # 1-2, 2-3 (leaf at depth 2), 2-4-5-6 (leaf at depth 4)
    g = parse_graph("1,2,0.1\n2,3,0.2\n2,4,0.3\n4,5,0.4\n5,6,0.5")
    _, trace = reduce_tree(shortest_path_tree(g, 1), N)
    kinds = [(st.kind, st.path_length) for st in trace]
    assert kinds == [("sum", 4), ("sum", 3), ("max", 2), ("final-sum", 2)]


def test_golfar_examples(fig2a, fig3b):
    g = fig2a.with_prob(3, 5, 0.9)
    assert eccentricity(g, 1) == 3
    assert golfar_bound(g, 1) == pytest.approx(30.0, rel=1e-12)
    assert golfar_bound(fig3b, 1) == pytest.approx(3 / 0.7, rel=1e-12)
    zero = parse_graph("1,2,0\n2,3,0\n3,1,0\n3,4,0")
    assert golfar_bound(zero) == diameter(zero) == 2
    assert golfar_bound(zero, 4) == 2
    assert golfar_bound(zero, 1) == 2


@pytest.mark.parametrize("seed", range(40))
def test_matches_independent_tree_recursion(seed):
    rng = np.random.default_rng(seed)
    n = int(rng.integers(2, 8))
    g = random_tree(rng, n, 0.0, 0.9)
    src = int(rng.integers(1, n + 1))
    dist, _ = reduce_tree(shortest_path_tree(g, src), N)
    ref = tree_convergence_pmf(g, src, N)
    np.testing.assert_allclose(dist.pmf, ref, atol=1e-12)


@pytest.mark.parametrize("seed", range(25))
def test_exact_on_trees_vs_oracle(seed):
    rng = np.random.default_rng(1000 + seed)
    n = int(rng.integers(2, 7))
    g = random_tree(rng, n)
    src = int(rng.integers(1, n + 1))
    rep = run_lifecd(g, src)
    orc = exact_distribution(g, src, rep.n_max)
    tv = 0.5 * np.abs(rep.distribution.pmf - orc.pmf).sum()
    assert tv <= 1e-6 + 1e-9


@pytest.mark.parametrize("seed", range(25))
def test_stochastic_upper_bound_on_cyclic(seed):
    rng = np.random.default_rng(2000 + seed)
    n = int(rng.integers(3, 7))
    g = random_cyclic(rng, n)
    src = int(rng.integers(1, n + 1))
    rep = run_lifecd(g, src)
    orc = exact_distribution(g, src, rep.n_max)
    assert np.all(rep.distribution.cdf <= orc.cdf + 1e-9)
    slack = 10 * 1e-6 * rep.n_max
    assert orc.expectation() <= rep.expected_value + slack


@pytest.mark.parametrize("p35", [0.05, 0.3, 0.6, 0.9, 0.99])
def test_below_golfar_on_example_networks(fig2a, fig3b, p35):
    g = fig2a.with_prob(3, 5, p35)
    assert exact_distribution(g, 1, 256).expectation() <= run_lifecd(g, 1).expected_value <= golfar_bound(g, 1)
    h = fig3b.with_prob(4, 5, p35)
    assert run_lifecd(h, 1).expected_value <= golfar_bound(h, 1)


def test_golfar_is_not_a_bound_for_broadcast():
    # mean of the max of three Geometric(1/2) delays is 22/7 > 1/(1-0.5)
    g = parse_graph("1,2,0.5\n1,3,0.5\n1,4,0.5")
    assert run_lifecd(g, 1).expected_value == pytest.approx(22 / 7, abs=1e-6)
    assert exact_distribution(g, 1, 64).expectation() > golfar_bound(g, 1) == 2.0


@pytest.mark.parametrize("seed", range(20))
def test_monotone_in_link_probability(seed):
    rng = np.random.default_rng(3000 + seed)
    n = int(rng.integers(2, 8))
    g = random_tree(rng, n, 0.0, 0.7)
    src = int(rng.integers(1, n + 1))
    (i, j) = g.edges[int(rng.integers(0, g.edge_count))]
    lo = run_lifecd(g, src, 1e-9)
    hi = run_lifecd(g.with_prob(i, j, g.prob(i, j) + rng.uniform(0.01, 0.29)), src, 1e-9)
    assert hi.expected_value >= lo.expected_value - 10 * 1e-9 * hi.n_max


def test_reduction_progress_and_trace_replay():
    rng = np.random.default_rng(7)
    for _ in range(30):
        n = int(rng.integers(2, 12))
        g = random_tree(rng, n)
        t = shortest_path_tree(g, 1)
        s = initial_state(t, N)
        iterations = 0
        while not s.is_terminal():
            nxt = reduce_once(s)
            assert nxt.size < s.size
            s = nxt
            iterations += 1
        assert iterations <= n - 1
        dist, trace = reduce_tree(t, N)
        np.testing.assert_array_equal(replay_trace(t, trace, N).pmf, dist.pmf)


def test_deterministic_csv(fig2a):
    a = run_lifecd(fig2a, 1).distribution.to_csv()
    b = run_lifecd(parse_graph(fig2a.to_text()), 1).distribution.to_csv()
    assert a == b


def test_tail_respects_eps():
    g = parse_graph("1,2,0.95\n2,3,0.9\n2,4,0.97")
    for eps in (1e-3, 1e-6, 1e-9):
        rep = run_lifecd(g, 1, eps)
        assert rep.tail_mass <= eps


def test_truncation_error_at_cap():
    with pytest.raises(TruncationError):
        run_lifecd(parse_graph("1,2,0.99\n2,3,0.99"), 1, 1e-9, cap=64)


def test_fixed_window():
    rep = run_lifecd(parse_graph("1,2,0.5"), 1, n_max=8)
    assert rep.n_max == 8
    assert isinstance(rep.distribution, DelayDistribution)
