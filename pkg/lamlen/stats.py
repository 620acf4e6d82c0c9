"""Empirical distributions: KS distances, histograms and sample moments"""

import math
from dataclasses import dataclass, field
from typing import Callable, Iterator, List, Optional, Sequence, Tuple

import numpy as np
from scipy import stats

from lamlen.errors import DomainError

CDF = Callable[[np.ndarray], np.ndarray]

WEIGHT_MODES = ("count", "length", "current", "mass")


def ks_statistic(samples: Sequence[float], cdf: CDF) -> float:
    """One-sample Kolmogorov-Smirnov distance sup |F_n - F|"""
    x = np.asarray(samples, dtype=float)
    if len(x) == 0:
        raise DomainError("KS statistic of an empty sample")
    return float(stats.kstest(x, cdf).statistic)


def weighted_ks_statistic(values: Sequence[float], weights: Sequence[float], cdf: CDF) -> float:
    """KS distance between the weighted ECDF of `values` and `cdf`"""
    x = np.asarray(values, dtype=float)
    w = np.asarray(weights, dtype=float)
    if len(x) == 0:
        raise DomainError("KS statistic of an empty sample")
    if x.shape != w.shape:
        raise DomainError(f"{len(x)} values but {len(w)} weights")
    order = np.argsort(x, kind="stable")
    x, w = x[order], w[order]
    total = w.sum()
    if not total > 0:
        raise DomainError("Weighted sample has no positive mass")
    upper = np.cumsum(w) / total
    lower = upper - w / total
    f = np.asarray(cdf(x), dtype=float)
    return float(max(np.max(np.abs(upper - f)), np.max(np.abs(lower - f))))


def restrict(
    values: np.ndarray, lo: float, hi: float, weights: Optional[np.ndarray] = None
) -> Tuple[np.ndarray, np.ndarray]:
    """The values in [lo, hi] and their weights (ones when unweighted)"""
    values = np.asarray(values, dtype=float)
    keep = (values >= lo) & (values <= hi)
    w = np.ones(values.shape) if weights is None else np.asarray(weights, dtype=float)
    return values[keep], w[keep]


@dataclass
class Histogram:
    """Uniform bins on [lo, hi]; values outside go to underflow or overflow"""

    lo: float
    hi: float
    counts: np.ndarray
    underflow: float = 0.0
    overflow: float = 0.0
    weight_mode: str = "count"
    observations: int = 0
    edges: np.ndarray = field(init=False, repr=False)

    def __post_init__(self):
        if not self.hi > self.lo:
            raise DomainError(f"Histogram range needs lo < hi, got [{self.lo}, {self.hi}]")
        if self.weight_mode not in WEIGHT_MODES:
            raise DomainError(f"Unknown weight mode '{self.weight_mode}'")
        self.counts = np.asarray(self.counts, dtype=float)
        self.edges = np.linspace(self.lo, self.hi, len(self.counts) + 1)

    @classmethod
    def empty(cls, lo: float, hi: float, bins: int, weight_mode: str = "count") -> "Histogram":
        return cls(lo, hi, np.zeros(bins), weight_mode=weight_mode)

    @classmethod
    def from_samples(
        cls,
        values: Sequence[float],
        lo: float,
        hi: float,
        bins: int,
        weights: Optional[Sequence[float]] = None,
        weight_mode: str = "count",
    ) -> "Histogram":
        hist = cls.empty(lo, hi, bins, weight_mode)
        hist.add(values, weights)
        return hist

    @property
    def bins(self) -> int:
        return len(self.counts)

    @property
    def total(self) -> float:
        return math.fsum(self.counts) + self.underflow + self.overflow

    def add(self, values: Sequence[float], weights: Optional[Sequence[float]] = None) -> None:
        x = np.asarray(values, dtype=float)
        w = np.ones(x.shape) if weights is None else np.asarray(weights, dtype=float)
        below, above = x < self.lo, x > self.hi
        inside = ~below & ~above
        counts, _ = np.histogram(x[inside], bins=self.edges, weights=w[inside])
        self.counts += counts
        self.underflow += float(w[below].sum())
        self.overflow += float(w[above].sum())
        self.observations += len(x)

    def merge(self, other: "Histogram") -> "Histogram":
        if (self.lo, self.hi, self.bins, self.weight_mode) != (other.lo, other.hi, other.bins, other.weight_mode):
            raise DomainError("Only histograms with identical bins and weight mode can be merged")
        merged = Histogram(
            self.lo,
            self.hi,
            self.counts + other.counts,
            self.underflow + other.underflow,
            self.overflow + other.overflow,
            self.weight_mode,
            self.observations + other.observations,
        )
        return merged

    def rows(self) -> Iterator[Tuple[float, float, float]]:
        for k in range(self.bins):
            yield float(self.edges[k]), float(self.edges[k + 1]), float(self.counts[k])


@dataclass(frozen=True)
class MomentEstimate:
    order: int
    estimate: float
    stderr: float
    target: Optional[float] = None

    @property
    def deviation(self) -> Optional[float]:
        """Distance to the target in standard errors"""
        if self.target is None or self.stderr == 0:
            return None
        return abs(self.estimate - self.target) / self.stderr


def sample_moments(
    values: Sequence[float],
    orders: Sequence[int] = (1, 2, 3, 4),
    weights: Optional[Sequence[float]] = None,
    targets: Optional[Callable[[int], float]] = None,
) -> List[MomentEstimate]:
    """Weighted sample moments E(x^k) with delta-method standard errors"""
    x = np.asarray(values, dtype=float)
    if len(x) == 0:
        raise DomainError("Moments of an empty sample")
    w = np.ones(x.shape) if weights is None else np.asarray(weights, dtype=float)
    total = w.sum()
    out = []
    for k in orders:
        powers = x**k
        mean = float(np.dot(w, powers) / total)
        spread = float(np.sqrt(np.dot(w * w, (powers - mean) ** 2)) / total)
        target = targets(k) if targets is not None else None
        out.append(MomentEstimate(k, mean, spread, target))
    return out
