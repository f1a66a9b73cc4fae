"""Spectral measures: the per-cell distributions that drive the noise.

Each lattice cell carries a probability measure on the real line.  Its atom
at the origin sets the Gaussian variance density of the noise on that cell;
mass away from the origin, rescaled by 1/s^2, is the jump intensity.  Two
representations are supported:

* :class:`DiscreteMeasure` -- an atom at 0 plus finitely many off-zero
  atoms.  Supports exact sampling and all polynomial algebra.
* :class:`MomentMeasure` -- a bare moment sequence.  Supports the
  polynomial algebra only; sampling operations reject it.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import MomentOrderError, UnsupportedKindError
from .lattice import Lattice

MASS_TOL = 1e-12
HANKEL_TOL = 1e-10


@dataclass(frozen=True)
class DiscreteMeasure:
    """Probability measure ``zero_weight * delta_0 + sum_r w_r * delta_{s_r}``.

    Parameters
    ----------
    zero_weight : float
        Mass of the atom at the origin, in [0, 1].
    atoms : sequence of (location, weight)
        Off-zero atoms; locations pairwise distinct and nonzero, weights
        positive.  Total mass must be 1 to within 1e-12.
    """

    zero_weight: float
    atoms: tuple[tuple[float, float], ...] = ()

    def __post_init__(self):
        atoms = tuple((float(s), float(w)) for s, w in self.atoms)
        object.__setattr__(self, "atoms", atoms)
        object.__setattr__(self, "zero_weight", float(self.zero_weight))
        if not 0.0 <= self.zero_weight <= 1.0 + MASS_TOL:
            raise ValueError("zero_weight must lie in [0, 1]")
        locs = [s for s, _ in atoms]
        if any(s == 0.0 for s in locs):
            raise ValueError("off-zero atom at the origin; use zero_weight")
        if len(set(locs)) != len(locs):
            raise ValueError("atom locations must be pairwise distinct")
        if any(w <= 0.0 for _, w in atoms):
            raise ValueError("atom weights must be positive")
        mass = self.zero_weight + sum(w for _, w in atoms)
        if abs(mass - 1.0) > MASS_TOL:
            raise ValueError(f"total mass {mass!r} != 1 beyond tolerance")

    @property
    def support_size(self) -> int:
        """Number of support points, counting the origin if it carries mass."""
        return len(self.atoms) + (1 if self.zero_weight > 0.0 else 0)

    def support_points(self) -> tuple[np.ndarray, np.ndarray]:
        """All support locations and their weights (origin included)."""
        locs = [s for s, _ in self.atoms]
        wts = [w for _, w in self.atoms]
        if self.zero_weight > 0.0:
            locs.append(0.0)
            wts.append(self.zero_weight)
        return np.asarray(locs, float), np.asarray(wts, float)

    def moment(self, k: int) -> float:
        """Exact k-th moment: the atom at 0 contributes only to k = 0."""
        if k < 0:
            raise ValueError("moment order must be nonnegative")
        if k == 0:
            return self.zero_weight + sum(w for _, w in self.atoms)
        return float(sum(w * s**k for s, w in self.atoms))

    def abs_moment(self, k: int) -> float:
        """Exact k-th absolute moment."""
        if k < 0:
            raise ValueError("moment order must be nonnegative")
        if k == 0:
            return self.moment(0)
        return float(sum(w * abs(s) ** k for s, w in self.atoms))


@dataclass(frozen=True)
class MomentMeasure:
    """A measure known only through its moments m_0, m_1, ..., with m_0 = 1.

    The Hankel matrices built from the stored moments must be positive
    semidefinite up to a small relative slack; otherwise no measure has
    these moments.  Note that the moments alone do not determine whether
    the underlying measure is unique; no determinacy check is attempted.
    """

    moments: tuple[float, ...]

    def __post_init__(self):
        mom = tuple(float(m) for m in self.moments)
        object.__setattr__(self, "moments", mom)
        if len(mom) == 0:
            raise ValueError("at least m_0 must be given")
        if abs(mom[0] - 1.0) > MASS_TOL:
            raise ValueError("m_0 must be 1 (probability measure)")
        h = len(mom) // 2 + 1  # largest Hankel fully covered by the moments
        hankel = np.array([[mom[i + j] for j in range(h)] for i in range(h)])
        eigs = np.linalg.eigvalsh(hankel)
        scale = max(abs(eigs[0]), abs(eigs[-1]), 1e-300)
        if eigs[0] < -HANKEL_TOL * scale:
            raise ValueError(
                f"moment sequence not positive semidefinite "
                f"(Hankel eigenvalue {eigs[0]!r})"
            )

    @property
    def max_order(self) -> int:
        return len(self.moments) - 1

    def moment(self, k: int) -> float:
        if k < 0:
            raise ValueError("moment order must be nonnegative")
        if k > self.max_order:
            raise MomentOrderError(
                f"moment of order {k} requested, only {self.max_order} stored"
            )
        return self.moments[k]


SpectralMeasure = DiscreteMeasure | MomentMeasure


def fit_moment_bound(measure: SpectralMeasure, n_max: int) -> float:
    """Smallest C >= 0 with ``abs_moment(n) <= C**n * n!`` for 1 <= n <= n_max.

    Equals ``max_n (abs_moment(n) / n!) ** (1/n)``; nondecreasing in n_max.
    Only discrete measures are accepted: absolute moments are not determined
    by signed moments alone.
    """
    if not isinstance(measure, DiscreteMeasure):
        raise UnsupportedKindError("moment growth bound needs a discrete measure")
    if n_max < 1:
        return 0.0
    best = 0.0
    log_factorial = 0.0
    for n in range(1, n_max + 1):
        log_factorial += np.log(n)
        m = measure.abs_moment(n)
        if m > 0.0:
            best = max(best, float(np.exp((np.log(m) - log_factorial) / n)))
    return best


def levy_decomposition(
    measure: SpectralMeasure,
) -> tuple[float, list[tuple[float, float]]]:
    """Split a discrete measure into its noise ingredients.

    Returns ``(gaussian_variance_density, [(jump_size, intensity_density)])``
    where the Gaussian density is the mass at the origin and each off-zero
    atom (s, w) becomes a jump of size s with intensity w / s^2 per unit
    volume.
    """
    if not isinstance(measure, DiscreteMeasure):
        raise UnsupportedKindError("jump decomposition needs a discrete measure")
    jumps = [(s, w / s**2) for s, w in measure.atoms]
    return measure.zero_weight, jumps


@dataclass(frozen=True)
class MeasureField:
    """A spectral measure per lattice cell (piecewise constant in space)."""

    lattice: Lattice
    cell_measures: tuple[SpectralMeasure, ...]

    def __post_init__(self):
        object.__setattr__(self, "cell_measures", tuple(self.cell_measures))
        if len(self.cell_measures) != self.lattice.n_cells:
            raise ValueError(
                f"{self.lattice.n_cells} cells but "
                f"{len(self.cell_measures)} measures"
            )

    @classmethod
    def uniform(cls, lattice: Lattice, measure: SpectralMeasure) -> "MeasureField":
        return cls(lattice, (measure,) * lattice.n_cells)

    @property
    def is_discrete(self) -> bool:
        return all(isinstance(m, DiscreteMeasure) for m in self.cell_measures)

    def require_discrete(self, what: str) -> None:
        if not self.is_discrete:
            raise UnsupportedKindError(f"{what} needs discrete cell measures")
