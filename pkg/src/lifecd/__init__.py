"""Convergence-time distributions of max-consensus under Bernoulli link failures."""

from .dist import (
    DelayDistribution,
    deadline_quantile,
    expectation,
    geometric,
    max_combine,
    sum_delays,
    truncation_length,
)
from .engine import EngineReport, ReductionState, finalize, golfar_bound, reduce_once, run_lifecd
from .errors import *  # noqa: F401,F403
from .graph import (
    CriticalPathSet,
    FailureGraph,
    SpanningTree,
    critical_paths,
    diameter,
    eccentricity,
    load_graph,
    parse_graph,
    shortest_path_tree,
)
from .oracle import exact_distribution, sample_convergence
from .sim import EmpiricalResult, convergence_study, monte_carlo

__version__ = "0.1.0"
