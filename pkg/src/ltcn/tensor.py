"""Tensorization of length ``l**K`` filters and the dense tensor algebra.

Tensors are plain ``numpy`` arrays of shape ``(l,) * K``.  Axis ``j - 1``
holds mode ``j`` (digit ``a_j`` of the base-``l`` time index), so the
Fortran-order flattening of a tensor is exactly the filter it came from:

    T(rho)[a_1, ..., a_K] = rho(a_1 + a_2 l + ... + a_K l**(K-1)).

Modes are numbered from 1 in the public functions, as in the formulas.
"""
from __future__ import annotations

from functools import reduce

import numpy as np

__all__ = [
    "tensorize",
    "detensorize",
    "unfold",
    "fold",
    "mode_product",
    "outer_product",
    "frobenius",
    "tensor_geometry",
]


def _check_geometry(l, K):
    if int(l) != l or l < 2:
        raise ValueError(f"filter length l must be an integer >= 2, got {l}")
    if int(K) != K or K < 1:
        raise ValueError(f"number of layers K must be an integer >= 1, got {K}")


def tensor_geometry(A: np.ndarray) -> tuple[int, int]:
    """Return ``(l, K)`` for an all-modes-equal tensor."""
    A = np.asarray(A)
    if A.ndim < 1 or len(set(A.shape)) != 1:
        raise ValueError(f"expected a tensor with equal mode sizes, got shape {A.shape}")
    return A.shape[0], A.ndim


def tensorize(rho, l: int, K: int) -> np.ndarray:
    """Map a scalar sequence on ``[0, l**K)`` to its ``K``-way tensor.

    Shorter sequences are zero-padded; longer ones are rejected (restrict
    first).
    """
    _check_geometry(l, K)
    rho = np.asarray(rho, dtype=np.float64).ravel()
    n = l ** K
    if rho.size > n:
        raise ValueError(f"sequence of length {rho.size} exceeds l**K = {n}")
    flat = np.zeros(n)
    flat[:rho.size] = rho
    return flat.reshape((l,) * K, order="F")


def detensorize(A: np.ndarray) -> np.ndarray:
    return np.asarray(A, dtype=np.float64).ravel(order="F")


def unfold(A: np.ndarray, mode: int) -> np.ndarray:
    """Mode-``mode`` matricization, shape ``(l, l**(K-1))``.

    Column index is ``sum_{j != mode} a_j l**pos(j)`` with the remaining
    modes ranked in ascending order (lowest remaining mode varies fastest).
    """
    A = np.asarray(A)
    if not 1 <= mode <= A.ndim:
        raise ValueError(f"mode {mode} out of range 1..{A.ndim}")
    return np.moveaxis(A, mode - 1, 0).reshape(A.shape[mode - 1], -1, order="F")


def fold(M: np.ndarray, mode: int, l: int, K: int) -> np.ndarray:
    """Inverse of :func:`unfold`; the row count of ``M`` sets the mode size."""
    if not 1 <= mode <= K:
        raise ValueError(f"mode {mode} out of range 1..{K}")
    M = np.asarray(M)
    rest = (l,) * (K - 1)
    if M.ndim != 2 or M.shape[1] != l ** (K - 1):
        raise ValueError(f"cannot fold matrix of shape {M.shape} into mode {mode} of ({l},)*{K}")
    return np.moveaxis(M.reshape((M.shape[0],) + rest, order="F"), 0, mode - 1)


def mode_product(A: np.ndarray, U: np.ndarray, mode: int) -> np.ndarray:
    """``A x_mode U``: multiply every mode-``mode`` fiber of ``A`` by ``U``."""
    A = np.asarray(A, dtype=np.float64)
    U = np.asarray(U, dtype=np.float64)
    if not 1 <= mode <= A.ndim:
        raise ValueError(f"mode {mode} out of range 1..{A.ndim}")
    if U.ndim != 2 or U.shape[1] != A.shape[mode - 1]:
        raise ValueError(
            f"shape mismatch: U is {U.shape}, mode {mode} has size {A.shape[mode - 1]}")
    l = A.shape[mode - 1]
    return fold(U @ unfold(A, mode), mode, l, A.ndim)


def outer_product(vectors) -> np.ndarray:
    """Outer product of ``K`` length-``l`` vectors, listed outermost layer first.

    ``outer_product([w_{K-1}, ..., w_0])[a_1, ..., a_K] = w_0(a_1) ... w_{K-1}(a_K)``,
    i.e. the last vector supplies the least-significant digit.  This is the
    order in which a single-channel network's filters appear in its
    tensorized effective filter.
    """
    vs = [np.asarray(v, dtype=np.float64).ravel() for v in vectors]
    if not vs:
        raise ValueError("need at least one vector")
    if len({v.size for v in vs}) != 1:
        raise ValueError(f"length mismatch: {[v.size for v in vs]}")
    return reduce(np.multiply.outer, vs[::-1])


def frobenius(A: np.ndarray) -> float:
    return float(np.sqrt(np.sum(np.square(A))))
