"""Streaming moment accumulators and shared least-squares fitting.

Accumulators track count, mean and the second to fourth central moment sums
in one pass, and merge exactly (pairwise update formulas), so per-worker
partial results can be combined at join points without revisiting data.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

__all__ = [
    "InsufficientDataError",
    "MomentAccumulator",
    "MomentSummary",
    "ols_slope",
    "log2_slope",
]


class InsufficientDataError(ValueError):
    """Raised when a statistic is requested below its minimum sample count."""


@dataclass(frozen=True)
class MomentSummary:
    mean: float
    variance: float
    kurtosis: float
    stderr: float


@dataclass
class MomentAccumulator:
    """One-pass mean/M2/M3/M4 accumulator with exact pairwise merging."""

    count: int = 0
    mean: float = 0.0
    m2: float = 0.0
    m3: float = 0.0
    m4: float = 0.0

    def push(self, value):
        """Add a single observation."""
        n1 = self.count
        n = n1 + 1
        delta = float(value) - self.mean
        dn = delta / n
        dn2 = dn * dn
        term = delta * dn * n1
        self.count = n
        self.mean += dn
        self.m4 += (term * dn2 * (n * n - 3 * n + 3)
                    + 6.0 * dn2 * self.m2 - 4.0 * dn * self.m3)
        self.m3 += term * dn * (n - 2) - 3.0 * dn * self.m2
        self.m2 += term

    def push_many(self, values):
        """Add a batch of observations (vectorised)."""
        values = np.asarray(values, dtype=np.float64).ravel()
        if values.size == 0:
            return
        n = values.size
        mean = float(values.mean())
        centered = values - mean
        c2 = centered * centered
        batch = MomentAccumulator(
            count=n, mean=mean,
            m2=float(c2.sum()),
            m3=float((c2 * centered).sum()),
            m4=float((c2 * c2).sum()))
        merged = self.merge(batch)
        self.count, self.mean = merged.count, merged.mean
        self.m2, self.m3, self.m4 = merged.m2, merged.m3, merged.m4

    def merge(self, other: "MomentAccumulator") -> "MomentAccumulator":
        """Combine two accumulators; equivalent to accumulating both streams."""
        if self.count == 0:
            return MomentAccumulator(other.count, other.mean,
                                     other.m2, other.m3, other.m4)
        if other.count == 0:
            return MomentAccumulator(self.count, self.mean,
                                     self.m2, self.m3, self.m4)
        na, nb = self.count, other.count
        n = na + nb
        delta = other.mean - self.mean
        d2 = delta * delta
        mean = self.mean + delta * nb / n
        m2 = self.m2 + other.m2 + d2 * na * nb / n
        m3 = (self.m3 + other.m3
              + d2 * delta * na * nb * (na - nb) / (n * n)
              + 3.0 * delta * (na * other.m2 - nb * self.m2) / n)
        m4 = (self.m4 + other.m4
              + d2 * d2 * na * nb * (na * na - na * nb + nb * nb) / (n ** 3)
              + 6.0 * d2 * (na * na * other.m2 + nb * nb * self.m2) / (n * n)
              + 4.0 * delta * (na * other.m3 - nb * self.m3) / n)
        return MomentAccumulator(n, mean, m2, m3, m4)

    @property
    def variance(self):
        """Unbiased sample variance; requires count >= 2."""
        if self.count < 2:
            raise InsufficientDataError(
                f"variance requires >= 2 observations, have {self.count}")
        return max(self.m2, 0.0) / (self.count - 1)

    @property
    def kurtosis(self):
        """Raw sample kurtosis n*M4/M2^2 (normal -> 3); requires count >= 4."""
        if self.count < 4:
            raise InsufficientDataError(
                f"kurtosis requires >= 4 observations, have {self.count}")
        if self.m2 <= 0.0:
            return float("nan")
        return self.count * self.m4 / (self.m2 * self.m2)

    def finalize(self) -> MomentSummary:
        """Mean, variance, kurtosis and standard error of the mean."""
        var = self.variance
        kurt = self.kurtosis if self.count >= 4 else float("nan")
        return MomentSummary(self.mean, var, kurt,
                             float(np.sqrt(var / self.count)))


def ols_slope(x, y):
    """Ordinary least-squares slope of y against x."""
    x = np.asarray(x, dtype=np.float64)
    y = np.asarray(y, dtype=np.float64)
    if x.size < 2:
        raise ValueError("slope needs at least two points")
    return float(np.polyfit(x, y, 1)[0])


def log2_slope(x, values):
    """OLS slope of log2(values) against x; values must be positive."""
    values = np.asarray(values, dtype=np.float64)
    if np.any(values <= 0.0):
        raise ValueError("log2_slope requires strictly positive values")
    return ols_slope(x, np.log2(values))
