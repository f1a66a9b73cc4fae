"""Mergeable raw-moment accumulators for Monte Carlo estimates.

Per batch we accumulate raw sums (up to fourth cross order); means,
variances, covariances and their standard errors are reconstructed at the
end.  Contributions are plain arrays added in batch order, so estimates are
bitwise reproducible for any thread count.  The centered quantities here
have means near zero and unit-scale spread, so the raw-moment algebra loses
no precision.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np


@dataclass
class MomentSums:
    """Raw sums over all samples for V columns."""

    n: float
    s1: np.ndarray     # sum x_v
    s2: np.ndarray     # sum x_v * x_w
    s21: np.ndarray    # sum x_v^2 * x_w
    s22: np.ndarray    # sum x_v^2 * x_w^2

    @classmethod
    def from_batch(cls, X: np.ndarray) -> "MomentSums":
        X = np.asarray(X, float)
        X2 = X * X
        return cls(
            n=float(X.shape[0]),
            s1=X.sum(axis=0),
            s2=np.einsum("bi,bj->ij", X, X),
            s21=np.einsum("bi,bj->ij", X2, X),
            s22=np.einsum("bi,bj->ij", X2, X2),
        )

    def __add__(self, other: "MomentSums") -> "MomentSums":
        return MomentSums(
            self.n + other.n,
            self.s1 + other.s1,
            self.s2 + other.s2,
            self.s21 + other.s21,
            self.s22 + other.s22,
        )

    def mean(self, i: int) -> float:
        return float(self.s1[i] / self.n)

    def stderr_mean(self, i: int) -> float:
        n = self.n
        var = max(self.s2[i, i] - self.s1[i] ** 2 / n, 0.0) / (n - 1)
        return math.sqrt(var / n)

    def covariance(self, i: int, j: int) -> float:
        n = self.n
        return float((self.s2[i, j] - self.s1[i] * self.s1[j] / n) / (n - 1))

    def variance(self, i: int) -> float:
        return self.covariance(i, i)

    def stderr_covariance(self, i: int, j: int) -> float:
        """Standard error of the sample covariance of columns i and j:
        spread of the per-sample products c = (x - xbar)(y - ybar)."""
        n = self.n
        mx = self.s1[i] / n
        my = self.s1[j] / n
        m = mx * my
        sum_c = self.s2[i, j] - n * m
        sum_c2 = (
            self.s22[i, j]
            + my**2 * self.s2[i, i]
            + mx**2 * self.s2[j, j]
            + n * m**2
            - 2.0 * my * self.s21[i, j]
            - 2.0 * mx * self.s21[j, i]
            + 4.0 * m * self.s2[i, j]
            - 2.0 * my * m * self.s1[i]
            - 2.0 * mx * m * self.s1[j]
        )
        var_c = max(sum_c2 - sum_c**2 / n, 0.0) / (n - 1)
        return math.sqrt(var_c / n)

    def stderr_variance(self, i: int) -> float:
        return self.stderr_covariance(i, i)
