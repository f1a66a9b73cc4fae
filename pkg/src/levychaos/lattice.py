"""Finite lattices: disjoint boxes carrying the noise field."""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np


@dataclass(frozen=True)
class Lattice:
    """Finitely many pairwise disjoint boxes in d dimensions.

    Cells may be given explicitly as boxes (pairs of corners) or abstractly
    by their volumes, in which case they are laid out as adjacent intervals
    on a line.  Only the volumes enter the numerics; boxes exist so that
    disjointness is a checkable statement.
    """

    dimension: int
    volumes: np.ndarray
    boxes: tuple[tuple[tuple[float, ...], tuple[float, ...]], ...] | None = None

    def __post_init__(self):
        vols = np.asarray(self.volumes, dtype=float)
        object.__setattr__(self, "volumes", vols)
        if self.dimension < 1:
            raise ValueError("lattice dimension must be >= 1")
        if vols.ndim != 1 or vols.size == 0:
            raise ValueError("lattice needs at least one cell")
        if np.any(vols <= 0):
            raise ValueError("cell volumes must be positive")
        if self.boxes is not None:
            self._check_boxes()

    def _check_boxes(self):
        boxes = [(np.asarray(lo, float), np.asarray(hi, float)) for lo, hi in self.boxes]
        if len(boxes) != self.n_cells:
            raise ValueError("one box per cell required")
        for j, (lo, hi) in enumerate(boxes):
            if lo.shape != (self.dimension,) or hi.shape != (self.dimension,):
                raise ValueError(f"box {j}: corner dimension mismatch")
            if np.any(hi <= lo):
                raise ValueError(f"box {j}: upper corner must exceed lower corner")
            if not np.isclose(np.prod(hi - lo), self.volumes[j], rtol=1e-12, atol=0):
                raise ValueError(f"box {j}: volume inconsistent with box extent")
        for i in range(len(boxes)):
            for j in range(i + 1, len(boxes)):
                lo1, hi1 = boxes[i]
                lo2, hi2 = boxes[j]
                if np.all(hi1 > lo2) and np.all(hi2 > lo1):
                    raise ValueError(f"cells {i} and {j} overlap")

    @classmethod
    def from_volumes(cls, volumes) -> "Lattice":
        """Abstract 1-d lattice: adjacent intervals with the given lengths."""
        vols = np.asarray(volumes, dtype=float)
        edges = np.concatenate([[0.0], np.cumsum(vols)])
        boxes = tuple(((edges[j],), (edges[j + 1],)) for j in range(vols.size))
        return cls(dimension=1, volumes=vols, boxes=boxes)

    @classmethod
    def from_boxes(cls, dimension: int, boxes) -> "Lattice":
        vols = [float(np.prod(np.asarray(hi, float) - np.asarray(lo, float))) for lo, hi in boxes]
        norm = tuple((tuple(float(x) for x in lo), tuple(float(x) for x in hi)) for lo, hi in boxes)
        return cls(dimension=dimension, volumes=np.asarray(vols), boxes=norm)

    @property
    def n_cells(self) -> int:
        return int(self.volumes.size)
