"""Truncated delay distributions over rounds ``k = 0..n_max``.

Mass that falls beyond ``n_max`` is never renormalized back in; it is
reported as ``tail_mass = 1 - cdf[n_max]``.
"""

from __future__ import annotations

import csv
import io
import math
import warnings
from dataclasses import dataclass
from typing import Sequence, TextIO

import numpy as np

from .errors import DomainError, EmptyList, LengthMismatch, TailTooHeavy, TruncationWarning

DEFAULT_EPS = 1e-6
DEFAULT_CAP = 2**20

# rows whose cdf is within this of 1 count as "done" for CSV elision
CSV_ELIDE_TOL = 1e-12


def _frozen(a: np.ndarray) -> np.ndarray:
    a = np.ascontiguousarray(a, dtype=np.float64)
    a.setflags(write=False)
    return a


@dataclass(frozen=True, eq=False)
class DelayDistribution:
    pmf: np.ndarray
    cdf: np.ndarray

    def __post_init__(self):
        if self.pmf.shape != self.cdf.shape or self.pmf.ndim != 1 or len(self.pmf) < 2:
            raise LengthMismatch("pmf and cdf must be 1-D arrays of equal length >= 2")
        object.__setattr__(self, "pmf", _frozen(self.pmf))
        object.__setattr__(self, "cdf", _frozen(self.cdf))

    @classmethod
    def from_pmf(cls, pmf) -> DelayDistribution:
        pmf = np.clip(np.asarray(pmf, dtype=np.float64), 0.0, None)
        cdf = np.minimum(np.cumsum(pmf), 1.0)
        return cls(pmf, cdf)

    @classmethod
    def from_cdf(cls, cdf) -> DelayDistribution:
        cdf = np.clip(np.asarray(cdf, dtype=np.float64), 0.0, 1.0)
        pmf = np.diff(cdf, prepend=0.0)
        return cls(np.clip(pmf, 0.0, None), cdf)

    @classmethod
    def point_mass(cls, k: int, n_max: int) -> DelayDistribution:
        if not 0 <= k <= n_max:
            raise DomainError(f"point mass at {k} outside 0..{n_max}")
        pmf = np.zeros(n_max + 1)
        pmf[k] = 1.0
        return cls.from_pmf(pmf)

    @property
    def n_max(self) -> int:
        return len(self.pmf) - 1

    @property
    def tail_mass(self) -> float:
        return min(1.0, max(0.0, 1.0 - float(self.cdf[-1])))

    @property
    def support(self) -> np.ndarray:
        return np.arange(len(self.pmf))

    def expectation(self) -> float:
        return expectation(self)

    def variance(self) -> float:
        k = self.support
        m = float(k @ self.pmf)
        return max(0.0, float((k * k) @ self.pmf) - m * m)

    def extended(self, n_max: int) -> DelayDistribution:
        """Zero-pad the pmf to a longer window (no new mass appears)."""
        if n_max < self.n_max:
            raise LengthMismatch("cannot shrink a distribution with extended()")
        pmf = np.zeros(n_max + 1)
        pmf[: len(self.pmf)] = self.pmf
        cdf = np.full(n_max + 1, self.cdf[-1])
        cdf[: len(self.cdf)] = self.cdf
        return DelayDistribution(pmf, cdf)

    def last_informative(self) -> int:
        """Index one past the last ``k`` whose cdf is still below ``1 - 1e-12``."""
        undone = np.nonzero(self.cdf < 1.0 - CSV_ELIDE_TOL)[0]
        return min(self.n_max, int(undone[-1]) + 1 if len(undone) else 0)

    def to_csv(self, out: TextIO | None = None, elide: bool = True) -> str:
        last = self.last_informative() if elide else self.n_max
        buf = io.StringIO()
        w = csv.writer(buf, lineterminator="\n")
        w.writerow(["k", "pmf", "cdf"])
        for k in range(last + 1):
            w.writerow([k, repr(float(self.pmf[k])), repr(float(self.cdf[k]))])
        text = buf.getvalue()
        if out is not None:
            out.write(text)
        return text

    @classmethod
    def read_csv(cls, text: str) -> DelayDistribution:
        rows = list(csv.DictReader(io.StringIO(text)))
        pmf = np.array([float(r["pmf"]) for r in rows])
        cdf = np.array([float(r["cdf"]) for r in rows])
        if len(pmf) == 1:
            pmf, cdf = np.append(pmf, 0.0), np.append(cdf, cdf[-1])
        return cls(pmf, cdf)


def geometric(p: float, n_max: int) -> DelayDistribution:
    """Rounds until the first success of a link failing w.p. ``p`` per round."""
    if not 0.0 <= p < 1.0:
        raise DomainError(f"failure probability must lie in [0,1), got {p}")
    _check_n_max(n_max)
    k = np.arange(n_max + 1, dtype=np.float64)
    pmf = np.zeros(n_max + 1)
    pmf[1:] = (1.0 - p) * np.power(p, k[1:] - 1.0)
    cdf = 1.0 - np.power(p, k)
    return DelayDistribution(pmf, cdf)


def _check_n_max(n_max) -> None:
    if not isinstance(n_max, (int, np.integer)) or n_max < 1:
        raise DomainError(f"n_max must be a positive integer, got {n_max!r}")


def sum_delays(a: DelayDistribution, b: DelayDistribution) -> DelayDistribution:
    """Distribution of ``A + B`` for independent ``A``, ``B`` (pmf convolution).

    Direct O(n_max^2) convolution, cut back to ``n_max``.
    """
    if a.n_max != b.n_max:
        raise LengthMismatch(f"n_max differs: {a.n_max} vs {b.n_max}")
    pmf = np.convolve(a.pmf, b.pmf)[: a.n_max + 1]
    return DelayDistribution.from_pmf(pmf)


def max_combine(ds: Sequence[DelayDistribution]) -> DelayDistribution:
    """Distribution of the maximum of independent delays (cdf product)."""
    ds = list(ds)
    if not ds:
        raise EmptyList("max_combine needs at least one distribution")
    if len(ds) == 1:
        return ds[0]
    n = ds[0].n_max
    if any(d.n_max != n for d in ds):
        raise LengthMismatch("n_max differs among inputs")
    cdf = np.array(ds[0].cdf)
    for d in ds[1:]:
        cdf = cdf * d.cdf
    return DelayDistribution.from_cdf(cdf)


def expectation(d: DelayDistribution) -> float:
    """Mean over the retained window. Underestimates when ``tail_mass > 0``."""
    return float(d.support @ d.pmf)


def deadline_quantile(d: DelayDistribution, tau: float) -> int:
    """Smallest ``k`` with ``cdf[k] >= tau``."""
    if not 0.0 < tau < 1.0:
        raise DomainError(f"tau must lie in (0,1), got {tau}")
    if tau > d.cdf[-1]:
        raise TailTooHeavy(f"cdf reaches only {d.cdf[-1]:.12g} < tau={tau} within n_max={d.n_max}")
    return int(np.argmax(d.cdf >= tau))


def truncation_length(n: int, p_max: float, eps: float, cap: int = DEFAULT_CAP) -> int:
    """Markov-inequality window ``ceil(n / ((1 - p_max) * eps))``, clamped to ``cap``.

    ``n/(1-p_max)`` bounds the mean convergence time, so this length keeps
    ``Pr(Z > n_max) <= eps``.
    """
    if not isinstance(n, (int, np.integer)) or n < 1:
        raise DomainError(f"n must be a positive integer, got {n!r}")
    if not 0.0 <= p_max < 1.0:
        raise DomainError(f"p_max must lie in [0,1), got {p_max}")
    if not 0.0 < eps < 1.0:
        raise DomainError(f"eps must lie in (0,1), got {eps}")
    _check_n_max(cap)
    raw = n / ((1.0 - p_max) * eps)
    # absorb representation error such as 5/(0.4*0.01) = 1250.0000000000002
    seed = math.ceil(raw * (1.0 - 1e-12))
    if seed > cap:
        warnings.warn(
            f"Markov truncation length {seed} exceeds cap {cap}; clamping", TruncationWarning, stacklevel=2
        )
        return int(cap)
    return int(seed)
