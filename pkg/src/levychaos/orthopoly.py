"""Monic orthogonal polynomials of a spectral measure.

Conventions used throughout the package: q0 = 1 and

    s * q_n(s) = q_{n+1}(s) + b_n * q_n(s) + a_n * q_{n-1}(s),   n >= 1,
    s * q_0(s) = q_1(s) + b_0,

with squared norms gamma_n = a_1 * a_2 * ... * a_n (gamma_0 = 1, the
measures are probabilities).  When the measure has m < oo support points,
q_n vanishes in L2 for n >= m; we then fix a_n = 0, b_n = 0 and gamma_n = 0.

Discrete measures use the Stieltjes procedure evaluated exactly on the atom
set.  Moment sequences use the Chebyshev moment algorithm, which can lose
accuracy badly; a cancellation monitor warns when more than six decimal
digits are gone.  (Whether a moment sequence determines its measure
uniquely is not checked.)
"""

from __future__ import annotations

import math
import warnings
from dataclasses import dataclass

import numpy as np

from .errors import (
    DegenerateDegreeError,
    IllConditionedWarning,
    MomentOrderError,
    NumericalBreakdownError,
)
from .measures import DiscreteMeasure, MomentMeasure, SpectralMeasure

# a_n below this is support exhaustion, not a genuine coefficient
A_ZERO_REL = 1e-13
# a_n below this signals an invalid (not positive definite) moment input
A_BREAKDOWN = -1e-10
DIGIT_LOSS_WARN = 6.0


@dataclass(frozen=True)
class RecurrenceTable:
    """Recurrence coefficients b_0..b_{K-1}, a_1..a_K and norms gamma_0..gamma_K.

    ``support_size`` is the number of support points of the measure;
    ``math.inf`` when no exhaustion is known (moment input that never
    broke off within the table).
    """

    b: np.ndarray
    a: np.ndarray
    gamma: np.ndarray
    support_size: int | float

    def __post_init__(self):
        object.__setattr__(self, "b", np.asarray(self.b, float))
        object.__setattr__(self, "a", np.asarray(self.a, float))
        object.__setattr__(self, "gamma", np.asarray(self.gamma, float))
        if len(self.a) != len(self.b) or len(self.gamma) != len(self.b) + 1:
            raise ValueError("coefficient arrays have inconsistent lengths")

    @property
    def max_degree(self) -> int:
        """Largest degree whose recurrence step is stored."""
        return len(self.b)

    @property
    def max_a(self) -> float:
        """sup_n a_n over the table; finite by construction on a lattice."""
        return float(self.a.max()) if len(self.a) else 0.0


def recurrence_coefficients(measure: SpectralMeasure, K: int) -> RecurrenceTable:
    """Recurrence table of the monic orthogonal polynomials of ``measure``.

    Parameters
    ----------
    measure : SpectralMeasure
        Discrete measures are handled exactly on their atoms; moment
        sequences need moments up to order 2K.
    K : int
        Number of recurrence steps: returns b_0..b_{K-1}, a_1..a_K.
    """
    if K < 1:
        raise ValueError("K must be >= 1")
    if isinstance(measure, DiscreteMeasure):
        return _stieltjes(measure, K)
    return _chebyshev(measure, K)


def _stieltjes(measure: DiscreteMeasure, K: int) -> RecurrenceTable:
    # inner products are finite sums over the support: exact quadrature
    x, w = measure.support_points()
    m = len(x)
    b = np.zeros(K)
    a = np.zeros(K)
    gamma = np.zeros(K + 1)
    gamma[0] = 1.0
    p_prev = np.zeros(m)
    p_cur = np.ones(m)
    for n in range(K):
        if n >= m:
            break
        b[n] = float(np.sum(w * x * p_cur**2)) / gamma[n]
        if n + 1 >= m:
            break  # q_{n+1} vanishes on the support
        p_next = (x - b[n]) * p_cur - (a[n - 1] if n >= 1 else 0.0) * p_prev
        g = float(np.sum(w * p_next**2))
        a_next = g / gamma[n]
        if a_next < A_ZERO_REL * max(1.0, gamma[n]):
            break  # numerical exhaustion backstop
        a[n] = a_next  # slot n holds a_{n+1}
        gamma[n + 1] = g
        p_prev, p_cur = p_cur, p_next
    return RecurrenceTable(b=b, a=a, gamma=gamma, support_size=m)


def _chebyshev(measure: MomentMeasure, K: int) -> RecurrenceTable:
    if measure.max_order < 2 * K:
        raise MomentOrderError(
            f"recurrence to depth {K} needs moments up to order {2 * K}, "
            f"only {measure.max_order} stored"
        )
    eps = np.finfo(float).eps
    mom = np.asarray(measure.moments[: 2 * K + 1], float)
    b = np.zeros(K)
    a = np.zeros(K)
    gamma = np.zeros(K + 1)
    gamma[0] = 1.0
    # sigma[k, l] = <q_k, s^l>; row k lives on l = k .. 2K - k.  A running
    # first-order error bound err[l] ~ |absolute error of sigma[k, l]| rides
    # along to estimate how many digits the cancellations have eaten.
    row_prev = np.zeros(2 * K + 1)
    row_cur = mom.copy()
    err_prev = np.zeros(2 * K + 1)
    err_cur = eps * np.abs(mom)
    b[0] = mom[1] / mom[0]
    err_b = 0.0  # absolute error of b[k-1]
    err_a_rel = 0.0  # relative error of a[k-1]
    support: int | float = math.inf
    worst_loss = 0.0
    for k in range(1, K + 1):
        row_next = np.zeros(2 * K + 1)
        err_next = np.zeros(2 * K + 1)
        hi = 2 * K - k
        a_prev = a[k - 2] if k >= 2 else 0.0
        for l in range(k, hi + 1):
            t1 = row_cur[l + 1]
            t2 = b[k - 1] * row_cur[l]
            t3 = a_prev * row_prev[l]
            row_next[l] = t1 - t2 - t3
            err_next[l] = (
                err_cur[l + 1]
                + abs(b[k - 1]) * err_cur[l]
                + err_b * abs(row_cur[l])
                + a_prev * err_prev[l]
                + err_a_rel * abs(t3)
                + eps * (abs(t1) + abs(t2) + abs(t3))
            )
        a_k = row_next[k] / row_cur[k - 1]
        if a_k < A_BREAKDOWN:
            raise NumericalBreakdownError(
                f"a_{k} = {a_k!r} < 0: moment sequence is not positive definite"
            )
        if a_k < A_ZERO_REL * max(1.0, gamma[k - 1]):
            support = k  # polynomial space exhausted: k support points
            break
        a[k - 1] = a_k
        gamma[k] = gamma[k - 1] * a_k
        err_a_rel = _rel(err_next[k], row_next[k]) + _rel(err_cur[k - 1], row_cur[k - 1])
        worst_loss = max(worst_loss, math.log10(max(err_a_rel / eps, 1.0)))
        if k <= K - 1:
            r1 = row_next[k + 1] / row_next[k]
            r2 = row_cur[k] / row_cur[k - 1]
            b[k] = r1 - r2
            err_b = abs(r1) * (
                _rel(err_next[k + 1], row_next[k + 1]) + _rel(err_next[k], row_next[k])
            ) + abs(r2) * (
                _rel(err_cur[k], row_cur[k]) + _rel(err_cur[k - 1], row_cur[k - 1])
            )
        row_prev, row_cur = row_cur, row_next
        err_prev, err_cur = err_cur, err_next
    if worst_loss > DIGIT_LOSS_WARN:
        warnings.warn(
            f"moment recurrence lost about {worst_loss:.1f} decimal digits",
            IllConditionedWarning,
            stacklevel=3,
        )
    if support is not math.inf:
        b[int(support):] = 0.0
    return RecurrenceTable(b=b, a=a, gamma=gamma, support_size=support)


def _rel(err: float, value: float) -> float:
    return err / abs(value) if value != 0.0 else 0.0


def evaluate_q(table: RecurrenceTable, k: int, s):
    """Evaluate the monic polynomial q_k at ``s`` (scalar or array).

    Returns exact 0 for k at or beyond the support size.
    """
    if k < 0:
        raise ValueError("degree must be nonnegative")
    if k > table.max_degree:
        raise ValueError(f"degree {k} beyond the stored table ({table.max_degree})")
    s = np.asarray(s, float)
    if k >= table.support_size:
        return np.zeros_like(s) if s.ndim else 0.0
    p_prev = np.zeros_like(s)
    p_cur = np.ones_like(s)
    for n in range(k):
        p_next = (s - table.b[n]) * p_cur - (table.a[n - 1] if n >= 1 else 0.0) * p_prev
        p_prev, p_cur = p_cur, p_next
    return p_cur if s.ndim else float(p_cur)


def monomial_coefficients(table: RecurrenceTable, k: int) -> np.ndarray:
    """Coefficients c_0..c_k with q_k(s) = sum_i c_i s^i (c_k = 1)."""
    if k >= table.support_size:
        raise DegenerateDegreeError(
            f"q_{k} vanishes: support has only {table.support_size} points"
        )
    if k > table.max_degree:
        raise ValueError(f"degree {k} beyond the stored table ({table.max_degree})")
    coeffs = np.zeros(k + 1)
    coeffs[0] = 1.0
    if k == 0:
        return coeffs
    prev = np.zeros(k + 1)
    cur = coeffs.copy()
    for n in range(k):
        nxt = np.zeros(k + 1)
        nxt[1:] = cur[:-1]
        nxt -= table.b[n] * cur
        if n >= 1:
            nxt -= table.a[n - 1] * prev
        prev, cur = cur, nxt
    return cur


def jacobi_matrix(table: RecurrenceTable, K: int) -> np.ndarray:
    """Multiplication by s in the normalized basis q_n / sqrt(gamma_n).

    Symmetric tridiagonal (K+1) x (K+1): diagonal b_n, off-diagonal
    sqrt(a_{n+1}); rows and columns at or beyond the support size are zero.
    """
    if K < 0:
        raise ValueError("K must be nonnegative")
    J = np.zeros((K + 1, K + 1))
    for n in range(K + 1):
        if n >= table.support_size:
            continue
        if n >= len(table.b):
            raise ValueError(f"table too short for a {K + 1}x{K + 1} matrix")
        J[n, n] = table.b[n]
    for n in range(K):
        if n + 1 >= table.support_size:
            continue
        if n >= len(table.a):
            raise ValueError(f"table too short for a {K + 1}x{K + 1} matrix")
        J[n, n + 1] = J[n + 1, n] = np.sqrt(table.a[n])
    return J


def polynomial_of_jacobi(table: RecurrenceTable, J: np.ndarray, k: int) -> np.ndarray:
    """Matrix q_k(J) via the three-term recurrence (no monomial expansion)."""
    if k < 0:
        raise ValueError("degree must be nonnegative")
    eye = np.eye(J.shape[0])
    if k == 0:
        return eye
    if k > table.max_degree:
        raise ValueError(f"degree {k} beyond the stored table ({table.max_degree})")
    p_prev = np.zeros_like(J)
    p_cur = eye
    for n in range(k):
        p_next = (J - table.b[n] * eye) @ p_cur
        if n >= 1:
            p_next -= table.a[n - 1] * p_prev
        p_prev, p_cur = p_cur, p_next
    return p_cur
