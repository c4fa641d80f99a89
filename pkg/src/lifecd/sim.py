"""Monte Carlo runs of the protocol and their summary statistics."""

from __future__ import annotations

import json
import math
import os
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass
from typing import Sequence

import numpy as np

from .dist import DelayDistribution
from .errors import DomainError
from .graph import FailureGraph
from .oracle import GENERATOR_ID, sample_convergence


def worker_count() -> int:
    """Thread cap from ``LIFECD_THREADS`` (default 1)."""
    raw = os.environ.get("LIFECD_THREADS", "1")
    try:
        return max(1, int(raw))
    except ValueError:
        return 1


def run_seeds(seed: int, runs: int) -> list[int]:
    """Per-run seeds derived from a master seed via ``SeedSequence``."""
    if seed < 0:
        raise DomainError("seed must be nonnegative")
    state = np.random.SeedSequence(seed).generate_state(runs, dtype=np.uint64)
    return [int(s) for s in state]


@dataclass(frozen=True)
class EmpiricalResult:
    samples: tuple[int, ...]
    run_count: int
    distribution: DelayDistribution
    sample_mean: float
    sample_std: float
    seed: int
    generator_id: str = GENERATOR_ID

    @classmethod
    def from_samples(cls, samples: Sequence[int], seed: int) -> EmpiricalResult:
        arr = np.asarray(samples, dtype=np.int64)
        counts = np.bincount(arr, minlength=max(2, int(arr.max()) + 1))
        pmf = counts / len(arr)
        cdf = np.cumsum(counts) / len(arr)
        std = float(arr.std(ddof=1)) if len(arr) > 1 else 0.0
        return cls(tuple(int(s) for s in arr), len(arr), DelayDistribution(pmf, cdf), float(arr.mean()), std, seed)

    @property
    def std_error(self) -> float:
        return self.sample_std / math.sqrt(self.run_count)

    def metadata(self) -> dict:
        return {
            "seed": self.seed,
            "runs": self.run_count,
            "generator_id": self.generator_id,
            "mean": self.sample_mean,
            "std": self.sample_std,
        }

    def metadata_json(self) -> str:
        return json.dumps(self.metadata(), indent=2, sort_keys=True) + "\n"


def monte_carlo(
    g: FailureGraph,
    source: int,
    runs: int,
    seed: int = 0,
    workers: int | None = None,
    initial_values=None,
) -> EmpiricalResult:
    """``runs`` independent protocol runs, run ``i`` seeded by ``run_seeds(seed, runs)[i]``."""
    if runs < 1:
        raise DomainError("runs must be >= 1")
    g._check_node(source)
    seeds = run_seeds(seed, runs)
    workers = workers or worker_count()

    def one(s):
        return sample_convergence(g, source, s, initial_values)

    if workers > 1 and runs > 1:
        with ThreadPoolExecutor(workers) as pool:
            samples = list(pool.map(one, seeds, chunksize=256))
    else:
        samples = [one(s) for s in seeds]
    return EmpiricalResult.from_samples(samples, seed)


def convergence_study(
    g: FailureGraph, source: int, run_counts: Sequence[int], seed: int = 0
) -> list[tuple[int, float, float]]:
    """(R, mean, std) per run count, each from its own child stream."""
    if not run_counts:
        raise DomainError("run_counts must be nonempty")
    child_seeds = run_seeds(seed, len(run_counts))
    out = []
    for r, s in zip(run_counts, child_seeds):
        res = monte_carlo(g, source, r, s)
        out.append((r, res.sample_mean, res.sample_std))
    return out


def ks_distance(a: DelayDistribution, b: DelayDistribution) -> float:
    """sup_k |F_a(k) - F_b(k)|, padding the shorter cdf with its last value."""
    n = max(a.n_max, b.n_max)
    return float(np.max(np.abs(a.extended(n).cdf - b.extended(n).cdf)))
