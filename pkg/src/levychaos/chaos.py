"""Chaos coefficients and the two faces of the chaos map.

A chaos index alpha = (alpha_0, ..., alpha_K) says how many tensor slots
carry each polynomial degree.  A coefficient for alpha assigns a real value
to tuples of |alpha| lattice cells, block-symmetric (the alpha_0 degree-0
slots are exchangeable, then the alpha_1 degree-1 slots, ...) and supported
off-diagonal: a value is zero whenever two slots share a cell.  Storage
keeps one canonical representative per symmetry class (cells sorted within
each block); the block factorials then appear in exactly one place,
:func:`g_norm_sq`.

The chaos map is realized twice and the two sides are compared:

* Fock side -- :func:`kmap_fock` places one particle per slot in mode
  (cell, block degree); norm-preserving onto occupation states.
* Path side -- :func:`evaluate_multiple_integral` multiplies the
  orthogonalized jump functionals Z_k over the slots, per sample.

Monte Carlo covariances of the path side against the coefficient inner
products are the isometry/orthogonality verification.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from itertools import combinations

import numpy as np

from .errors import DegenerateDegreeError, UnsupportedKindError
from .fock import FockVector, ModeBasis, occupation_order
from .measures import DiscreteMeasure
from .orthopoly import monomial_coefficients
from .sampler import PathBatch, PathSample, as_batch, fold_batches, sample_batch
from .stats import MomentSums

KMAP_NORM_TOL = 1e-11


@dataclass(frozen=True)
class ChaosIndex:
    """Occupation counts per polynomial degree: alpha_n slots of degree n."""

    alpha: tuple[int, ...]

    def __post_init__(self):
        alpha = tuple(int(a) for a in self.alpha)
        while alpha and alpha[-1] == 0:
            alpha = alpha[:-1]
        object.__setattr__(self, "alpha", alpha)
        if any(a < 0 for a in alpha):
            raise ValueError("chaos index entries must be nonnegative")

    @property
    def order(self) -> int:
        return sum(self.alpha)

    def degrees(self) -> tuple[int, ...]:
        """Per-slot degrees: alpha_0 zeros, then alpha_1 ones, ..."""
        return tuple(n for n, a in enumerate(self.alpha) for _ in range(a))

    def block_factorial(self) -> float:
        out = 1.0
        for a in self.alpha:
            out *= math.factorial(a)
        return out

    def blocks(self) -> list[tuple[int, int]]:
        """(degree, multiplicity) for each nonempty block, degree order."""
        return [(n, a) for n, a in enumerate(self.alpha) if a > 0]


@dataclass(frozen=True)
class ChaosCoefficient:
    """Block-symmetric, off-diagonal coefficient for one chaos index.

    ``values`` maps canonical cell tuples to reals.  Canonical: within each
    degree block the cells are strictly increasing; across the whole tuple
    all cells are distinct.
    """

    index: ChaosIndex
    values: dict[tuple[int, ...], float]

    def __post_init__(self):
        degs = self.index.degrees()
        for cells in self.values:
            if len(cells) != len(degs):
                raise ValueError(f"tuple {cells} has wrong length for {self.index}")
            if len(set(cells)) != len(cells):
                raise ValueError(f"tuple {cells} repeats a cell (diagonal support)")
            pos = 0
            for _, a in self.index.blocks():
                block = cells[pos : pos + a]
                if any(block[i] >= block[i + 1] for i in range(a - 1)):
                    raise ValueError(
                        f"tuple {cells} not canonical (block not increasing)"
                    )
                pos += a

    def slots(self) -> tuple[int, ...]:
        return self.index.degrees()


def validate_support(basis: ModeBasis, f: ChaosCoefficient) -> None:
    """Cells must exist and carry the degrees the index asks for."""
    degs = f.slots()
    n_cells = basis.lattice.n_cells
    for cells in f.values:
        for cell, deg in zip(cells, degs):
            if not 0 <= cell < n_cells:
                raise ValueError(f"cell {cell} outside the lattice")
            if deg >= basis.cell_degrees[cell]:
                raise DegenerateDegreeError(
                    f"degree {deg} unavailable on cell {cell} "
                    f"(only {basis.cell_degrees[cell]} modes)"
                )


def rho_weight(basis: ModeBasis, cell: int, degree: int) -> float:
    """Weight of one chaos slot: |cell| * gamma_degree(cell)."""
    return float(basis.lattice.volumes[cell] * basis.tables[cell].gamma[degree])


def g_inner(basis: ModeBasis, f: ChaosCoefficient, g: ChaosCoefficient) -> float:
    """Coefficient-space inner product; 0 across distinct indices.

    Equals block_factorial^2 * sum over canonical tuples of f * g * product
    of slot weights (the square because each canonical class contains
    block_factorial ordered tuples and the space carries the factorial
    weight once more).
    """
    if f.index != g.index:
        return 0.0
    validate_support(basis, f)
    validate_support(basis, g)
    degs = f.slots()
    total = 0.0
    for cells, val in f.values.items():
        other = g.values.get(cells)
        if other is None:
            continue
        w = 1.0
        for cell, deg in zip(cells, degs):
            w *= rho_weight(basis, cell, deg)
        total += val * other * w
    return f.index.block_factorial() ** 2 * total


def g_norm_sq(basis: ModeBasis, f: ChaosCoefficient) -> float:
    return g_inner(basis, f, f)


def kmap_fock(
    basis: ModeBasis, f: ChaosCoefficient, truncation: int | None = None
) -> FockVector:
    """Fock-side image of a chaos coefficient.

    Each canonical tuple becomes the occupation state with one particle in
    mode (cell, block degree) per slot, amplitude block_factorial * value *
    product of sqrt(slot weights).  Norm equals sqrt(g_norm_sq(f)).
    """
    validate_support(basis, f)
    degs = f.slots()
    cap = f.index.order if truncation is None else truncation
    amps: dict = {}
    bf = f.index.block_factorial()
    for cells, val in f.values.items():
        occ = tuple(
            sorted((basis.mode_index[(cell, deg)], 1) for cell, deg in zip(cells, degs))
        )
        if occupation_order(occ) > cap:
            raise ValueError("chaos order exceeds the requested particle cap")
        amp = bf * val
        for cell, deg in zip(cells, degs):
            amp *= math.sqrt(rho_weight(basis, cell, deg))
        amps[occ] = amps.get(occ, 0.0) + amp
    return FockVector(max(cap, 1), amps)


# ---------------------------------------------------------------------------
# path side
# ---------------------------------------------------------------------------


def evaluate_Y(basis: ModeBasis, path: PathSample, cell: int, k: int) -> float:
    """Centered power-jump functional of one cell on one path.

    Order 0 is the compensated pairing restricted to the cell (Gaussian part
    included); order k >= 1 sums the (k+1)-th powers of the jump sizes and
    subtracts the compensator |cell| * sum_r w_r s_r^(k-1).
    """
    return float(_y_batch(basis, as_batch(path), cell, k)[0])


def _y_batch(basis: ModeBasis, batch: PathBatch, cell: int, k: int) -> np.ndarray:
    measure = basis.field.cell_measures[cell]
    if not isinstance(measure, DiscreteMeasure):
        raise UnsupportedKindError("path functionals need discrete measures")
    vol = basis.lattice.volumes[cell]
    sizes = np.array([s for s, _ in measure.atoms])
    weights = np.array([w for _, w in measure.atoms])
    counts = batch.jump_counts[cell]
    if k == 0:
        out = batch.gaussian[:, cell].copy()
        if sizes.size:
            rates = vol * weights / sizes**2
            out += counts @ sizes - float(sizes @ rates)
        return out
    if sizes.size == 0:
        return np.zeros(batch.size)
    compensator = vol * float(weights @ sizes ** (k - 1))
    return counts @ sizes ** (k + 1) - compensator


def evaluate_Z(basis: ModeBasis, path: PathSample, cell: int, k: int) -> float:
    """Orthogonalized jump functional: the monomial coefficients of q_k
    contract the power functionals Y_0..Y_k."""
    return float(_z_batch(basis, as_batch(path), cell, k)[0])


def _z_batch(basis: ModeBasis, batch: PathBatch, cell: int, k: int) -> np.ndarray:
    coeffs = monomial_coefficients(basis.tables[cell], k)
    out = np.zeros(batch.size)
    for i, c in enumerate(coeffs):
        if c != 0.0:
            out += c * _y_batch(basis, batch, cell, i)
    return out


def evaluate_multiple_integral(
    basis: ModeBasis, path: PathSample, f: ChaosCoefficient
) -> float:
    """Pathwise multiple integral: sum over tuples of f times the product
    of Z_(block degree) over the slots."""
    return float(_kmap_batch(basis, as_batch(path), f)[0])


def _kmap_batch(basis: ModeBasis, batch: PathBatch, f: ChaosCoefficient) -> np.ndarray:
    validate_support(basis, f)
    degs = f.slots()
    needed = sorted({(cell, deg) for cells in f.values for cell, deg in zip(cells, degs)})
    z = {key: _z_batch(basis, batch, key[0], key[1]) for key in needed}
    out = np.zeros(batch.size)
    bf = f.index.block_factorial()
    for cells, val in f.values.items():
        prod = np.full(batch.size, bf * val)
        for cell, deg in zip(cells, degs):
            prod = prod * z[(cell, deg)]
        out += prod
    return out


def mc_verify(
    basis: ModeBasis,
    f: ChaosCoefficient,
    g: ChaosCoefficient,
    n_samples: int,
    seed: int,
    threads: int = 1,
) -> tuple[float, float]:
    """Sample covariance of the two pathwise integrals over reproducible
    paths; targets g_inner(f, g) for equal indices and 0 across indices."""
    if n_samples < 2:
        raise ValueError("need at least 2 samples")

    def work(lo: int, hi: int) -> MomentSums:
        batch = sample_batch(basis.field, seed, lo, hi)
        X = np.column_stack([_kmap_batch(basis, batch, f), _kmap_batch(basis, batch, g)])
        return MomentSums.from_batch(X)

    sums = fold_batches(n_samples, threads, work)
    return sums.covariance(0, 1), sums.stderr_covariance(0, 1)


# ---------------------------------------------------------------------------
# coefficient constructors
# ---------------------------------------------------------------------------


def canonical_tuples(index: ChaosIndex, n_cells: int):
    """All canonical cell tuples for an index on a lattice of n_cells."""
    blocks = index.blocks()

    def rec(pos: int, used: frozenset, prefix: tuple):
        if pos == len(blocks):
            yield prefix
            return
        _, a = blocks[pos]
        for combo in combinations(sorted(set(range(n_cells)) - used), a):
            yield from rec(pos + 1, used | set(combo), prefix + combo)

    yield from rec(0, frozenset(), ())


def indicator_coefficient(index: ChaosIndex, cells: tuple[int, ...]) -> ChaosCoefficient:
    """Coefficient that is 1 on a single canonical tuple."""
    return ChaosCoefficient(index, {tuple(cells): 1.0})


def random_coefficient(
    index: ChaosIndex, n_cells: int, rng: np.random.Generator
) -> ChaosCoefficient:
    """Standard-normal values on every canonical tuple."""
    values = {t: float(rng.standard_normal()) for t in canonical_tuples(index, n_cells)}
    if not values:
        raise ValueError("no admissible tuples: lattice too small for the index")
    return ChaosCoefficient(index, values)
