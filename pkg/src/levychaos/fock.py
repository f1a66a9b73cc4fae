"""Truncated symmetric Fock space over the discretized one-particle space.

The one-particle space is spanned by modes (cell j, degree n): the indicator
of cell j times the monic polynomial q_n of that cell's measure, for
n < min(K + 1, support size of cell j).  Modes are orthogonal; the squared
norm of mode (j, n) is |cell j| * gamma_n(j).

Fock vectors are stored as sparse amplitude maps over occupation
multi-indices in the *normalized* basis |nu> (unit vectors), so creation and
annihilation carry the standard bosonic factors sqrt(nu+1) and sqrt(nu).
The weighted norms of the underlying symmetric tensor powers live entirely
in :func:`occupation_factorial`, the single conversion routine between the
normalized basis and raw symmetrized tensors.

Truncation policy: creation drops components past the particle cap N and
flags the loss; operations whose exact result needs polynomial degrees
beyond K refuse with :class:`TruncationOverflowError` instead of silently
projecting.  Within the window everything is exact up to roundoff.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field as dc_field

import numpy as np

from .errors import TruncationOverflowError
from .lattice import Lattice
from .measures import DiscreteMeasure, MeasureField
from .orthopoly import (
    RecurrenceTable,
    evaluate_q,
    polynomial_of_jacobi,
    recurrence_coefficients,
)

PRUNE_REL = 1e-15
SYMMETRY_TOL = 1e-12

# occupation multi-index: sorted ((mode index, count), ...), counts > 0
Occupation = tuple[tuple[int, int], ...]


def occupation_factorial(occ: Occupation) -> float:
    """prod_m nu_m!, the squared conversion factor between the normalized
    occupation vector and the raw symmetrized tensor it labels."""
    out = 1.0
    for _, c in occ:
        out *= math.factorial(c)
    return out


def occupation_order(occ: Occupation) -> int:
    return sum(c for _, c in occ)


def _bump(occ: Occupation, mode: int, delta: int) -> tuple[Occupation, int]:
    """Change mode's count by delta; returns (new occupation, old count)."""
    items = dict(occ)
    old = items.get(mode, 0)
    new = old + delta
    if new < 0:
        raise ValueError("occupation count went negative")
    if new == 0:
        items.pop(mode, None)
    else:
        items[mode] = new
    return tuple(sorted(items.items())), old


@dataclass(frozen=True)
class ModeBasis:
    """Mode bookkeeping for a measure field at polynomial degree cut K."""

    field: MeasureField
    degree_cut: int
    tables: tuple[RecurrenceTable, ...]
    modes: tuple[tuple[int, int], ...]
    mode_index: dict[tuple[int, int], int]
    mode_norms: np.ndarray
    cell_degrees: tuple[int, ...]
    cell_start: tuple[int, ...]
    jacobi_blocks: tuple[np.ndarray, ...] = dc_field(repr=False, default=())

    @classmethod
    def build(cls, field: MeasureField, degree_cut: int) -> "ModeBasis":
        if degree_cut < 0:
            raise ValueError("degree cut must be nonnegative")
        vols = field.lattice.volumes
        tables = tuple(
            recurrence_coefficients(m, degree_cut + 1) for m in field.cell_measures
        )
        modes: list[tuple[int, int]] = []
        norms: list[float] = []
        cell_degrees: list[int] = []
        cell_start: list[int] = []
        blocks: list[np.ndarray] = []
        for j, table in enumerate(tables):
            d = int(min(degree_cut + 1, table.support_size))
            cell_start.append(len(modes))
            cell_degrees.append(d)
            for n in range(d):
                modes.append((j, n))
                norms.append(vols[j] * table.gamma[n])
            _check_mode_orthogonality(field.cell_measures[j], table, d, j)
            J = np.zeros((d, d))
            for n in range(d):
                J[n, n] = table.b[n]
            for n in range(d - 1):
                J[n, n + 1] = J[n + 1, n] = np.sqrt(table.a[n])
            blocks.append(J)
        return cls(
            field=field,
            degree_cut=degree_cut,
            tables=tables,
            modes=tuple(modes),
            mode_index={m: i for i, m in enumerate(modes)},
            mode_norms=np.asarray(norms),
            cell_degrees=tuple(cell_degrees),
            cell_start=tuple(cell_start),
            jacobi_blocks=tuple(blocks),
        )

    @property
    def lattice(self) -> Lattice:
        return self.field.lattice

    @property
    def n_modes(self) -> int:
        return len(self.modes)

    def cell_exact(self, j: int) -> bool:
        """True when cell j's block is the complete multiplication operator
        (support fits inside the degree window), so no window checks apply."""
        return self.tables[j].support_size <= self.degree_cut + 1

    def cell_slice(self, j: int) -> slice:
        return slice(self.cell_start[j], self.cell_start[j] + self.cell_degrees[j])


def _check_mode_orthogonality(measure, table: RecurrenceTable, d: int, cell: int) -> None:
    # tripwire: same-cell modes of distinct degree must integrate to zero
    # against the measure (exact sums over the atoms)
    if not isinstance(measure, DiscreteMeasure):
        return
    pts, wts = measure.support_points()
    values = [evaluate_q(table, n, pts) for n in range(d)]
    for n in range(d):
        for m in range(n):
            inner = float(np.sum(wts * values[n] * values[m]))
            scale = math.sqrt(table.gamma[n] * table.gamma[m])
            if abs(inner) > 1e-12 * max(scale, 1.0):
                raise ValueError(
                    f"cell {cell}: modes {m} and {n} not orthogonal ({inner!r})"
                )


@dataclass(frozen=True)
class OneParticleOperator:
    """Block-diagonal one-particle operator: one symmetric block per cell.

    ``degree_limits[j]`` is the largest occupied degree in cell j on which
    the block acts exactly; ``inf`` means unrestricted.
    """

    blocks: tuple[np.ndarray, ...]
    degree_limits: tuple[float, ...]

    def __post_init__(self):
        for j, blk in enumerate(self.blocks):
            if blk.size and np.max(np.abs(blk - blk.T)) > SYMMETRY_TOL * max(
                1.0, float(np.max(np.abs(blk)))
            ):
                raise ValueError(f"block {j} is not symmetric")


@dataclass
class FockVector:
    """Sparse vector in the normalized occupation basis, capped at
    ``truncation`` particles.  ``truncation_loss`` records that some
    creation result was dropped at the cap."""

    truncation: int
    amplitudes: dict[Occupation, float]
    truncation_loss: bool = False

    @classmethod
    def vacuum(cls, truncation: int) -> "FockVector":
        return cls(truncation, {(): 1.0})

    @classmethod
    def basis_state(cls, truncation: int, occ: Occupation) -> "FockVector":
        occ = tuple(sorted((m, c) for m, c in occ if c > 0))
        if occupation_order(occ) > truncation:
            raise ValueError("occupation exceeds the particle cap")
        return cls(truncation, {occ: 1.0})

    def inner(self, other: "FockVector") -> float:
        small, big = self.amplitudes, other.amplitudes
        if len(big) < len(small):
            small, big = big, small
        return float(sum(a * big[occ] for occ, a in small.items() if occ in big))

    def norm(self) -> float:
        return math.sqrt(sum(a * a for a in self.amplitudes.values()))

    def scaled(self, c: float) -> "FockVector":
        return FockVector(
            self.truncation,
            {occ: c * a for occ, a in self.amplitudes.items()},
            self.truncation_loss,
        )

    def add(self, *others: "FockVector") -> "FockVector":
        out = dict(self.amplitudes)
        loss = self.truncation_loss
        for v in others:
            if v.truncation != self.truncation:
                raise ValueError("mixing particle caps")
            loss = loss or v.truncation_loss
            for occ, a in v.amplitudes.items():
                out[occ] = out.get(occ, 0.0) + a
        return FockVector(self.truncation, _pruned(out), loss)


def _pruned(amplitudes: dict[Occupation, float]) -> dict[Occupation, float]:
    if not amplitudes:
        return amplitudes
    cut = PRUNE_REL * max(abs(a) for a in amplitudes.values())
    return {occ: a for occ, a in amplitudes.items() if abs(a) > cut}


def create(f: np.ndarray, v: FockVector) -> FockVector:
    """Bosonic creation by the one-particle vector ``f`` (mode coefficients).

    Components past the particle cap are dropped and flagged.
    """
    f = np.asarray(f, float)
    hot = np.flatnonzero(f)
    out: dict[Occupation, float] = {}
    loss = v.truncation_loss
    for occ, amp in v.amplitudes.items():
        if occupation_order(occ) + 1 > v.truncation:
            if hot.size:
                loss = True
            continue
        for m in hot:
            new_occ, old = _bump(occ, int(m), +1)
            out[new_occ] = out.get(new_occ, 0.0) + amp * f[m] * math.sqrt(old + 1)
    return FockVector(v.truncation, _pruned(out), loss)


def annihilate(f: np.ndarray, v: FockVector) -> FockVector:
    """Bosonic annihilation: the adjoint of :func:`create` on the cap."""
    f = np.asarray(f, float)
    out: dict[Occupation, float] = {}
    for occ, amp in v.amplitudes.items():
        for m, c in occ:
            if f[m] == 0.0:
                continue
            new_occ, _ = _bump(occ, m, -1)
            out[new_occ] = out.get(new_occ, 0.0) + amp * f[m] * math.sqrt(c)
    return FockVector(v.truncation, _pruned(out), v.truncation_loss)


def neutral(basis: ModeBasis, op: OneParticleOperator, v: FockVector) -> FockVector:
    """Second quantization of ``op``: apply the one-particle operator to one
    slot at a time and sum.  Particle number is conserved; the per-cell
    degree limits guard exactness of the block action."""
    out: dict[Occupation, float] = {}
    for occ, amp in v.amplitudes.items():
        for m, c in occ:
            j, n = basis.modes[m]
            if n > op.degree_limits[j]:
                raise TruncationOverflowError(
                    f"degree {n} in cell {j} outside the exact window "
                    f"(limit {op.degree_limits[j]})"
                )
            block = op.blocks[j]
            start = basis.cell_start[j]
            for n2 in range(basis.cell_degrees[j]):
                coef = block[n2, n]
                if coef == 0.0:
                    continue
                if n2 == n:
                    out[occ] = out.get(occ, 0.0) + amp * coef * c
                    continue
                lowered, _ = _bump(occ, m, -1)
                raised, old2 = _bump(lowered, start + n2, +1)
                out[raised] = out.get(raised, 0.0) + amp * coef * math.sqrt(
                    c
                ) * math.sqrt(old2 + 1)
    return FockVector(v.truncation, _pruned(out), v.truncation_loss)


def embed_kernel(basis: ModeBasis, phi: np.ndarray, i: int) -> np.ndarray:
    """Mode coefficients of the kernel phi(x) * s^i.

    On cell j the expansion of s^i in the normalized polynomials is column 0
    of the i-th Jacobi power, so c_{j,n} = phi_j * sqrt(|cell|) * (J^i)_{n,0}.
    Exact whenever the needed degrees fit under the cut; refuses otherwise.
    """
    phi = np.asarray(phi, float)
    if i < 0:
        raise ValueError("monomial order must be nonnegative")
    f = np.zeros(basis.n_modes)
    for j in range(basis.lattice.n_cells):
        if phi[j] == 0.0:
            continue
        needed = min(i, basis.tables[j].support_size - 1)
        if needed > basis.degree_cut:
            raise TruncationOverflowError(
                f"s^{i} on cell {j} needs degree {needed} > cut {basis.degree_cut}"
            )
        col = np.zeros(basis.cell_degrees[j])
        col[0] = 1.0
        J = basis.jacobi_blocks[j]
        for _ in range(i):
            col = J @ col
        f[basis.cell_slice(j)] = phi[j] * math.sqrt(basis.lattice.volumes[j]) * col
    return f


def q_mode_vector(basis: ModeBasis, phi: np.ndarray, k: int) -> np.ndarray:
    """Mode coefficients of phi(x) * q_k(x, s): a single mode per cell with
    coefficient phi_j * sqrt(|cell| * gamma_k).  Cells whose support is
    exhausted at degree k contribute nothing (the function vanishes there).
    """
    phi = np.asarray(phi, float)
    if not 0 <= k <= basis.degree_cut:
        raise TruncationOverflowError(f"degree {k} outside the mode window")
    f = np.zeros(basis.n_modes)
    for j in range(basis.lattice.n_cells):
        if phi[j] == 0.0 or k >= basis.cell_degrees[j]:
            continue
        f[basis.mode_index[(j, k)]] = phi[j] * math.sqrt(
            basis.lattice.volumes[j] * basis.tables[j].gamma[k]
        )
    return f


def multiplication_operator(
    basis: ModeBasis, phi: np.ndarray, i: int
) -> OneParticleOperator:
    """Multiplication by phi(x) * s^i as a block operator on modes."""
    phi = np.asarray(phi, float)
    blocks = []
    limits = []
    for j in range(basis.lattice.n_cells):
        J = basis.jacobi_blocks[j]
        blocks.append(phi[j] * np.linalg.matrix_power(J, i))
        if phi[j] == 0.0 or basis.cell_exact(j):
            limits.append(math.inf)
        else:
            limits.append(basis.degree_cut - i)
    return OneParticleOperator(tuple(blocks), tuple(limits))


def rho_operator(basis: ModeBasis, phi: np.ndarray, k: int) -> OneParticleOperator:
    """Multiplication by phi(x) * s * q_k(x, s) as a block operator."""
    phi = np.asarray(phi, float)
    blocks = []
    limits = []
    for j in range(basis.lattice.n_cells):
        J = basis.jacobi_blocks[j]
        if k >= basis.tables[j].support_size:
            blocks.append(np.zeros_like(J))  # q_k vanishes on the support
        else:
            blocks.append(phi[j] * (J @ polynomial_of_jacobi(basis.tables[j], J, k)))
        if phi[j] == 0.0 or basis.cell_exact(j):
            limits.append(math.inf)
        else:
            limits.append(basis.degree_cut - (k + 1))
    return OneParticleOperator(tuple(blocks), tuple(limits))


def apply_A(basis: ModeBasis, phi: np.ndarray, v: FockVector) -> FockVector:
    """Field operator: creation + annihilation by phi(x)*s^0 plus the
    neutral part multiplying by phi(x)*s."""
    f = embed_kernel(basis, phi, 0)
    op = multiplication_operator(basis, phi, 1)
    return create(f, v).add(annihilate(f, v), neutral(basis, op, v))


def apply_A_k(basis: ModeBasis, phi: np.ndarray, k: int, v: FockVector) -> FockVector:
    """Power field operator of order k >= 1: ladder parts carry s^(k-1),
    the neutral part multiplies by s^k.  Order 1 is :func:`apply_A`."""
    if k < 1:
        raise ValueError("operator order must be >= 1")
    f = embed_kernel(basis, phi, k - 1)
    op = multiplication_operator(basis, phi, k)
    return create(f, v).add(annihilate(f, v), neutral(basis, op, v))


def apply_R_k(basis: ModeBasis, phi: np.ndarray, k: int, v: FockVector) -> FockVector:
    """Orthogonalized field operator: ladder parts carry phi*q_k, the
    neutral part multiplies by phi*s*q_k."""
    f = q_mode_vector(basis, phi, k)
    op = rho_operator(basis, phi, k)
    return create(f, v).add(annihilate(f, v), neutral(basis, op, v))


def vacuum_moment(basis: ModeBasis, ops) -> float:
    """<vacuum, Op_1 ... Op_n vacuum> by successive application.

    ``ops`` is a sequence of specs: ("A", phi), ("Ak", k, phi) or
    ("Rk", k, phi), in left-to-right operator order.  Truncation loss along
    the way is a hard error (it cannot occur for n <= cap, which holds here
    by construction).
    """
    v = FockVector.vacuum(max(len(ops), 1))
    for spec in reversed(list(ops)):
        v = _apply_spec(basis, spec, v)
    if v.truncation_loss:
        raise TruncationOverflowError("operator product left the particle window")
    return v.amplitudes.get((), 0.0)


def _apply_spec(basis: ModeBasis, spec, v: FockVector) -> FockVector:
    kind = spec[0]
    if kind == "A":
        return apply_A(basis, np.asarray(spec[1], float), v)
    if kind == "Ak":
        return apply_A_k(basis, np.asarray(spec[2], float), spec[1], v)
    if kind == "Rk":
        return apply_R_k(basis, np.asarray(spec[2], float), spec[1], v)
    raise ValueError(f"unknown operator spec {spec!r}")
