"""Dense symmetric-tensor oracle for small particle numbers.

Everything here is brute force on full n-fold arrays (n <= 4, small mode
counts): the symmetrizer is an explicit average over all axis permutations.
The sparse occupation-number machinery in :mod:`levychaos.fock` is checked
against this module, never the other way around.
"""

from __future__ import annotations

from itertools import permutations
from math import factorial, sqrt

import numpy as np

from .errors import SizeExceededError
from .fock import occupation_factorial

MAX_ORDER = 4
MAX_ENTRIES = 2_000_000


def symmetrize_dense(tensor: np.ndarray) -> np.ndarray:
    """Average of ``tensor`` over all permutations of its axes."""
    n = tensor.ndim
    _check_size(tensor.shape[0] if n else 1, n)
    out = np.zeros_like(tensor, dtype=float)
    for perm in permutations(range(n)):
        out += np.transpose(tensor, perm)
    return out / factorial(n)


def sym_project_dense(factors) -> np.ndarray:
    """Symmetrization of the elementary tensor built from ``factors``.

    ``factors`` is a sequence of blocks, each a sequence of equal-length
    coefficient vectors; the tensor is the outer product of all vectors in
    block order.  Total order must be <= 4.
    """
    vectors = [np.asarray(v, float) for block in factors for v in block]
    n = len(vectors)
    if n == 0:
        raise ValueError("no factors given")
    m = vectors[0].shape[0]
    if any(v.shape != (m,) for v in vectors):
        raise ValueError("all factor vectors must share one length")
    _check_size(m, n)
    tensor = vectors[0]
    for v in vectors[1:]:
        tensor = np.multiply.outer(tensor, v)
    return symmetrize_dense(tensor)


def tensor_inner(t: np.ndarray, u: np.ndarray) -> float:
    """Plain Euclidean inner product of two dense n-fold tensors."""
    return float(np.sum(t * u))


def occupation_sector_to_dense(v, n: int, n_modes: int) -> np.ndarray:
    """Dense n-particle tensor of a sparse Fock vector's n-particle part.

    The normalized occupation state |nu> maps to
    Sym(tensor of unit vectors, mode m repeated nu_m times) / sqrt(nu!).
    """
    _check_size(n_modes, n)
    out = np.zeros((n_modes,) * n if n else ())
    eye = np.eye(n_modes)
    for occ, amp in v.amplitudes.items():
        if sum(c for _, c in occ) != n:
            continue
        slots = [eye[m] for m, c in occ for _ in range(c)]
        weight = occupation_factorial(occ)
        if n == 0:
            out += amp
            continue
        tensor = slots[0]
        for s in slots[1:]:
            tensor = np.multiply.outer(tensor, s)
        out += (amp / sqrt(weight)) * symmetrize_dense(tensor)
    return out


def _check_size(m: int, n: int) -> None:
    if n > MAX_ORDER:
        raise SizeExceededError(f"dense oracle limited to order {MAX_ORDER}, got {n}")
    if m**n > MAX_ENTRIES:
        raise SizeExceededError(f"dense tensor {m}^{n} exceeds the size cap")
