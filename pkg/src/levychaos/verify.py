"""Verification checks shared by the CLI and the acceptance suite.

Each check returns rows (quantity, target, estimate, stderr, passed).
Monte Carlo rows pass at three standard errors computed from the same run;
deterministic rows (Fock-side norms) carry stderr 0 and a fixed tolerance.
Given the same seed, every check is bitwise reproducible for any thread
count.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .chaos import (
    ChaosCoefficient,
    ChaosIndex,
    _kmap_batch,
    _y_batch,
    _z_batch,
    g_norm_sq,
    kmap_fock,
    random_coefficient,
)
from .fock import ModeBasis, vacuum_moment
from .sampler import (
    char_functional,
    empirical_cf_grid,
    fold_batches,
    pairing_batch,
    sample_batch,
)
from .stats import MomentSums

FOCK_NORM_TOL = 1e-11


@dataclass(frozen=True)
class CheckRow:
    quantity: str
    target: complex | float
    estimate: complex | float
    stderr: float
    passed: bool


def _mc_row(quantity: str, target, estimate, stderr: float) -> CheckRow:
    return CheckRow(
        quantity, target, estimate, stderr, bool(abs(estimate - target) <= 3.0 * stderr)
    )


def default_thetas() -> np.ndarray:
    return np.linspace(-3.0, 3.0, 13)


def default_test_functions(n_cells: int) -> list[tuple[str, np.ndarray]]:
    flat = np.ones(n_cells)
    wave = np.array([(-1.0) ** j * (0.5 + 0.5 * (j + 1) / n_cells) for j in range(n_cells)])
    return [("flat", flat), ("wave", wave)]


def check_cf(
    basis: ModeBasis,
    n_samples: int,
    seed: int,
    phi: np.ndarray | None = None,
    thetas: np.ndarray | None = None,
    threads: int = 1,
) -> list[CheckRow]:
    """Empirical vs closed-form characteristic functional on a theta grid."""
    field = basis.field
    if phi is None:
        phi = default_test_functions(field.lattice.n_cells)[1][1]
    if thetas is None:
        thetas = default_thetas()
    grid = empirical_cf_grid(field, phi, thetas, n_samples, seed, threads)
    rows = []
    for theta, (est, err) in zip(thetas, grid):
        target = char_functional(field, phi, theta)
        rows.append(_mc_row(f"cf[theta={theta}]", target, est, err))
    return rows


def check_moment_bridge(
    basis: ModeBasis,
    n_samples: int,
    seed: int,
    phis: list[tuple[str, np.ndarray]] | None = None,
    n_max: int = 4,
    threads: int = 1,
) -> list[CheckRow]:
    """Monte Carlo moments of the pairing against vacuum moments of the
    field-operator powers."""
    if phis is None:
        phis = default_test_functions(basis.lattice.n_cells)
    rows = []
    for name, phi in phis:
        phi = np.asarray(phi, float)

        def work(lo: int, hi: int) -> MomentSums:
            batch = sample_batch(basis.field, seed, lo, hi)
            p = pairing_batch(basis.field, batch, phi)
            X = np.column_stack([p**n for n in range(1, n_max + 1)])
            return MomentSums.from_batch(X)

        sums = fold_batches(n_samples, threads, work)
        for n in range(1, n_max + 1):
            target = vacuum_moment(basis, [("A", phi)] * n)
            rows.append(
                _mc_row(
                    f"moment[n={n},phi={name}]",
                    target,
                    sums.mean(n - 1),
                    sums.stderr_mean(n - 1),
                )
            )
    return rows


def check_power_covariances(
    basis: ModeBasis,
    n_samples: int,
    seed: int,
    cell: int = 0,
    k_max: int = 3,
    threads: int = 1,
) -> list[CheckRow]:
    """Covariances of the power functionals Y_k (target: |cell| times the
    (k+l)-th moment) and of the orthogonalized Z_k (target: diagonal
    |cell| * gamma_k)."""
    z_max = min(k_max, basis.cell_degrees[cell] - 1)
    vol = basis.lattice.volumes[cell]
    measure = basis.field.cell_measures[cell]

    def work(lo: int, hi: int) -> MomentSums:
        batch = sample_batch(basis.field, seed, lo, hi)
        cols = [_y_batch(basis, batch, cell, k) for k in range(k_max + 1)]
        cols += [_z_batch(basis, batch, cell, k) for k in range(z_max + 1)]
        return MomentSums.from_batch(np.column_stack(cols))

    sums = fold_batches(n_samples, threads, work)
    rows = []
    for k in range(k_max + 1):
        for l in range(k, k_max + 1):
            target = vol * measure.moment(k + l)
            rows.append(
                _mc_row(
                    f"Y_cov[k={k},l={l}]",
                    target,
                    sums.covariance(k, l),
                    sums.stderr_covariance(k, l),
                )
            )
    off = k_max + 1
    for k in range(z_max + 1):
        for l in range(k, z_max + 1):
            target = vol * basis.tables[cell].gamma[k] if k == l else 0.0
            rows.append(
                _mc_row(
                    f"Z_cov[k={k},l={l}]",
                    target,
                    sums.covariance(off + k, off + l),
                    sums.stderr_covariance(off + k, off + l),
                )
            )
    return rows


def default_alphas() -> list[ChaosIndex]:
    return [
        ChaosIndex((1,)),
        ChaosIndex((2,)),
        ChaosIndex((0, 1)),
        ChaosIndex((1, 1)),
        ChaosIndex((2, 1)),
    ]


def clip_alphas(
    basis: ModeBasis, alphas: list[ChaosIndex], max_order: int | None = None
) -> list[ChaosIndex]:
    """Drop indices needing degrees, cells or particles the run cannot carry."""
    min_degrees = min(basis.cell_degrees)
    out = []
    for alpha in alphas:
        if alpha.order < 1 or alpha.order > basis.lattice.n_cells:
            continue
        if max_order is not None and alpha.order > max_order:
            continue
        if len(alpha.alpha) > min_degrees:
            continue
        out.append(alpha)
    return out


def chaos_test_family(
    basis: ModeBasis,
    alphas: list[ChaosIndex] | None,
    coeff_seed: int,
    max_order: int | None = None,
) -> list[tuple[ChaosIndex, ChaosCoefficient]]:
    if alphas is None:
        alphas = default_alphas()
    alphas = clip_alphas(basis, alphas, max_order)
    family = []
    for i, alpha in enumerate(alphas):
        rng = np.random.default_rng([coeff_seed, i])
        family.append((alpha, random_coefficient(alpha, basis.lattice.n_cells, rng)))
    return family


def _chaos_sums(basis, family, n_samples, seed, threads) -> MomentSums:
    def work(lo: int, hi: int) -> MomentSums:
        batch = sample_batch(basis.field, seed, lo, hi)
        X = np.column_stack([_kmap_batch(basis, batch, f) for _, f in family])
        return MomentSums.from_batch(X)

    return fold_batches(n_samples, threads, work)


def check_isometry(
    basis: ModeBasis,
    n_samples: int,
    seed: int,
    alphas: list[ChaosIndex] | None = None,
    coeff_seed: int = 0,
    threads: int = 1,
    max_order: int | None = None,
) -> list[CheckRow]:
    """Norm preservation of the chaos map: deterministic on the Fock side,
    Monte Carlo variance on the path side."""
    family = chaos_test_family(basis, alphas, coeff_seed, max_order)
    rows = []
    for alpha, f in family:
        target = g_norm_sq(basis, f)
        fsq = kmap_fock(basis, f).norm() ** 2
        ok = abs(fsq - target) <= FOCK_NORM_TOL * max(1.0, abs(target))
        rows.append(CheckRow(f"fock_norm[alpha={alpha.alpha}]", target, fsq, 0.0, ok))
    sums = _chaos_sums(basis, family, n_samples, seed, threads)
    for i, (alpha, f) in enumerate(family):
        rows.append(
            _mc_row(
                f"variance[alpha={alpha.alpha}]",
                g_norm_sq(basis, f),
                sums.variance(i),
                sums.stderr_variance(i),
            )
        )
    return rows


def check_orthogonality(
    basis: ModeBasis,
    n_samples: int,
    seed: int,
    alphas: list[ChaosIndex] | None = None,
    coeff_seed: int = 0,
    threads: int = 1,
    max_order: int | None = None,
) -> list[CheckRow]:
    """Distinct chaos blocks decorrelate, and every block is centered."""
    family = chaos_test_family(basis, alphas, coeff_seed, max_order)
    sums = _chaos_sums(basis, family, n_samples, seed, threads)
    rows = []
    for i in range(len(family)):
        for j in range(i + 1, len(family)):
            rows.append(
                _mc_row(
                    f"cov[{family[i][0].alpha},{family[j][0].alpha}]",
                    0.0,
                    sums.covariance(i, j),
                    sums.stderr_covariance(i, j),
                )
            )
    for i, (alpha, _) in enumerate(family):
        rows.append(
            _mc_row(f"mean[alpha={alpha.alpha}]", 0.0, sums.mean(i), sums.stderr_mean(i))
        )
    return rows


CHECKS = {
    "cf": check_cf,
    "moments": check_moment_bridge,
    "isometry": check_isometry,
    "orthogonality": check_orthogonality,
}


def run_check(
    name: str,
    basis: ModeBasis,
    n_samples: int,
    seed: int,
    threads: int = 1,
    coeff_seed: int = 0,
    particle_cap: int = 4,
) -> list[CheckRow]:
    if name == "cf":
        return check_cf(basis, n_samples, seed, threads=threads)
    if name == "moments":
        return check_moment_bridge(
            basis, n_samples, seed, n_max=min(4, particle_cap), threads=threads
        ) + check_power_covariances(basis, n_samples, seed, threads=threads)
    if name == "isometry":
        return check_isometry(
            basis, n_samples, seed, coeff_seed=coeff_seed, threads=threads,
            max_order=particle_cap,
        )
    if name == "orthogonality":
        return check_orthogonality(
            basis, n_samples, seed, coeff_seed=coeff_seed, threads=threads,
            max_order=particle_cap,
        )
    raise ValueError(f"unknown check {name!r}")
