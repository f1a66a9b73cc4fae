"""Exact path simulation of the noise and its characteristic functional.

A path is one realization of the noise restricted to the lattice: per cell a
centered Gaussian with variance (mass at 0) * |cell|, plus independent
Poisson jump counts, one per off-zero atom (s, w), with rate |cell| * w/s^2.
The pairing of a path with a piecewise-constant test function is the
Gaussian part plus the compensated jump sums; its law has the closed-form
characteristic functional computed by :func:`char_functional`, which the
Monte Carlo estimator :func:`empirical_cf` verifies.

All sampling is keyed by (seed, sample index, cell, atom) through
counter-based streams (:mod:`levychaos.rng`), so parallel batches reproduce
serial runs exactly.
"""

from __future__ import annotations

import math
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass

import numpy as np

from .measures import DiscreteMeasure, MeasureField
from .rng import BATCH, PoissonTable, gaussian_from_uniform, stream_uniforms


@dataclass(frozen=True)
class PathSample:
    """One noise realization: per-cell Gaussian value and jump counts."""

    gaussian: np.ndarray
    jump_counts: tuple[np.ndarray, ...]


@dataclass(frozen=True)
class PathBatch:
    """Realizations for a contiguous index range: row i is sample lo + i."""

    lo: int
    gaussian: np.ndarray                     # (n, M)
    jump_counts: tuple[np.ndarray, ...]      # per cell (n, R_j) int64

    @property
    def size(self) -> int:
        return self.gaussian.shape[0]

    def path(self, offset: int) -> PathSample:
        return PathSample(
            gaussian=self.gaussian[offset].copy(),
            jump_counts=tuple(c[offset].copy() for c in self.jump_counts),
        )


class _CellSampler:
    """Per-cell precomputation: Gaussian scale and Poisson tables."""

    def __init__(self, measure: DiscreteMeasure, volume: float):
        self.gauss_std = math.sqrt(measure.zero_weight * volume)
        self.sizes = np.array([s for s, _ in measure.atoms])
        self.rates = np.array([volume * w / s**2 for s, w in measure.atoms])
        self.tables = [PoissonTable(rate) for rate in self.rates]


def _cell_samplers(field: MeasureField) -> list[_CellSampler]:
    field.require_discrete("path sampling")
    return [
        _CellSampler(m, v)
        for m, v in zip(field.cell_measures, field.lattice.volumes)
    ]


def sample_batch(field: MeasureField, seed: int, lo: int, hi: int) -> PathBatch:
    """Paths for sample indices [lo, hi), bitwise independent of batching."""
    if hi <= lo:
        raise ValueError("empty sample range")
    cells = _cell_samplers(field)
    n = hi - lo
    gaussian = np.empty((n, len(cells)))
    counts = [np.empty((n, len(c.tables)), dtype=np.int64) for c in cells]
    pos = 0
    for batch in range(lo // BATCH, (hi - 1) // BATCH + 1):
        a = max(lo, batch * BATCH) - batch * BATCH
        b = min(hi, (batch + 1) * BATCH) - batch * BATCH
        take = slice(pos, pos + (b - a))
        for j, cell in enumerate(cells):
            u = stream_uniforms(seed, j, 0, batch, b)
            gaussian[take, j] = cell.gauss_std * gaussian_from_uniform(u[a:b])
            for r, table in enumerate(cell.tables):
                u = stream_uniforms(seed, j, 1 + r, batch, b)
                counts[j][take, r] = table.sample(u[a:b])
        pos += b - a
    return PathBatch(lo=lo, gaussian=gaussian, jump_counts=tuple(counts))


def sample_path(field: MeasureField, rng_seed: int, index: int) -> PathSample:
    """The path attached to one sample index; deterministic in (seed, index)."""
    return sample_batch(field, rng_seed, index, index + 1).path(0)


def pairing(field: MeasureField, path: PathSample, phi: np.ndarray) -> float:
    """Dual pairing of one path with a piecewise-constant test function:
    sum_j phi_j * (G_j + sum_r s_r * (N_jr - rate_jr))."""
    return float(pairing_batch(field, as_batch(path), phi)[0])


def pairing_batch(field: MeasureField, batch: PathBatch, phi: np.ndarray) -> np.ndarray:
    phi = np.asarray(phi, float)
    cells = _cell_samplers(field)
    out = batch.gaussian @ phi
    for j, cell in enumerate(cells):
        if cell.sizes.size == 0 or phi[j] == 0.0:
            continue
        jumps = batch.jump_counts[j] @ cell.sizes - float(cell.sizes @ cell.rates)
        out += phi[j] * jumps
    return out


def as_batch(path: PathSample) -> PathBatch:
    return PathBatch(
        lo=0,
        gaussian=path.gaussian[None, :],
        jump_counts=tuple(c[None, :] for c in path.jump_counts),
    )


def char_functional(field: MeasureField, phi: np.ndarray, theta: float) -> complex:
    """Closed-form characteristic functional E exp(i * theta * pairing)."""
    field.require_discrete("the characteristic functional")
    phi = np.asarray(phi, float)
    vols = field.lattice.volumes
    exponent = 0.0 + 0.0j
    for j, measure in enumerate(field.cell_measures):
        exponent += -0.5 * theta**2 * measure.zero_weight * phi[j] ** 2 * vols[j]
        for s, w in measure.atoms:
            z = 1j * theta * phi[j] * s
            exponent += vols[j] * (w / s**2) * (np.exp(z) - z - 1.0)
    return complex(np.exp(exponent))


def empirical_cf(
    field: MeasureField,
    phi: np.ndarray,
    theta: float,
    n_samples: int,
    seed: int,
    threads: int = 1,
) -> tuple[complex, float]:
    """Monte Carlo estimate of the characteristic functional at one theta.

    Returns (estimate, stderr) with the stderr combining the sample
    variances of the real and imaginary parts.
    """
    [(est, err)] = empirical_cf_grid(field, phi, [theta], n_samples, seed, threads)
    return est, err


def empirical_cf_grid(
    field: MeasureField,
    phi: np.ndarray,
    thetas,
    n_samples: int,
    seed: int,
    threads: int = 1,
) -> list[tuple[complex, float]]:
    """Characteristic-functional estimates over a theta grid, one sampling
    pass shared by all grid points."""
    if n_samples < 2:
        raise ValueError("need at least 2 samples")
    thetas = np.asarray(thetas, float)

    def work(lo: int, hi: int):
        batch = sample_batch(field, seed, lo, hi)
        p = pairing_batch(field, batch, phi)
        stats = np.empty((len(thetas), 5))
        for t, theta in enumerate(thetas):
            c = np.cos(theta * p)
            s = np.sin(theta * p)
            stats[t] = (len(p), c.sum(), s.sum(), (c * c).sum(), (s * s).sum())
        return stats

    total = fold_batches(n_samples, threads, work)
    out = []
    for t in range(len(thetas)):
        n, sc, ss, scc, sss = total[t]
        mean = complex(sc / n, ss / n)
        var_re = max(scc - sc * sc / n, 0.0) / (n - 1)
        var_im = max(sss - ss * ss / n, 0.0) / (n - 1)
        out.append((mean, math.sqrt((var_re + var_im) / n)))
    return out


def fold_batches(n_samples: int, threads: int, work):
    """Run ``work(lo, hi)`` over the aligned batch grid and sum the results
    in batch order -- bitwise identical for any thread count."""
    ranges = [
        (lo, min(lo + BATCH, n_samples)) for lo in range(0, n_samples, BATCH)
    ]
    if threads > 1:
        with ThreadPoolExecutor(max_workers=threads) as pool:
            parts = list(pool.map(lambda r: work(*r), ranges))
    else:
        parts = [work(*r) for r in ranges]
    total = parts[0]
    for part in parts[1:]:
        total = total + part
    return total
