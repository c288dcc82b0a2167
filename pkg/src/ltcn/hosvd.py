"""Higher-order SVD of all-modes-equal tensors and its M-term truncation.

The matrix SVD underneath is a one-sided (Hestenes) Jacobi iteration.  The
unfoldings we decompose are ``l x l**(K-1)`` with small ``l``, which is the
regime where Jacobi is both cheap and accurate to working precision.
"""
from __future__ import annotations

import math
from dataclasses import dataclass
from functools import reduce
from typing import NamedTuple

import numpy as np

from .tensor import mode_product, tensor_geometry, unfold

__all__ = [
    "SvdResult",
    "HosvdResult",
    "Spectrum",
    "RankOneTerm",
    "svd",
    "hosvd",
    "spectrum",
    "truncate",
    "reconstruct",
    "rank_one_tensor",
    "NOISE_RTOL",
]

_EPS = np.finfo(np.float64).eps

# Core entries with |s| <= NOISE_RTOL * |A|_F are rounding noise of the
# decomposition and are reported as exact zeros in a Spectrum.
NOISE_RTOL = 64 * _EPS

_MAX_SWEEPS = 80


class SvdResult(NamedTuple):
    U: np.ndarray
    S: np.ndarray
    V: np.ndarray


def _jacobi_columns(B: np.ndarray):
    """Orthogonalize the columns of ``B`` (m >= n) by plane rotations.

    Returns ``(W, V)`` with ``B @ V = W``, ``V`` orthogonal and the columns
    of ``W`` mutually orthogonal.
    """
    W = B.copy()
    n = W.shape[1]
    V = np.eye(n)
    tol = _EPS * max(W.shape[0], 1)
    for _ in range(_MAX_SWEEPS):
        rotated = False
        for p in range(n - 1):
            for q in range(p + 1, n):
                bp, bq = W[:, p], W[:, q]
                alpha = float(bp @ bp)
                beta = float(bq @ bq)
                gamma = float(bp @ bq)
                if gamma == 0.0 or abs(gamma) <= tol * math.sqrt(alpha * beta):
                    continue
                rotated = True
                zeta = (beta - alpha) / (2.0 * gamma)
                t = math.copysign(1.0, zeta) / (abs(zeta) + math.sqrt(1.0 + zeta * zeta))
                c = 1.0 / math.sqrt(1.0 + t * t)
                s = c * t
                wp = c * bp - s * bq
                wq = s * bp + c * bq
                W[:, p], W[:, q] = wp, wq
                vp = c * V[:, p] - s * V[:, q]
                vq = s * V[:, p] + c * V[:, q]
                V[:, p], V[:, q] = vp, vq
        if not rotated:
            break
    return W, V


def _complete_basis(Q: np.ndarray, m: int) -> np.ndarray:
    """Extend orthonormal columns ``Q`` (m x r) to an m x m orthogonal matrix."""
    cols = [Q[:, i] for i in range(Q.shape[1])]
    for i in range(m):
        if len(cols) == m:
            break
        e = np.zeros(m)
        e[i] = 1.0
        for _ in range(2):
            for c in cols:
                e -= (c @ e) * c
        nrm = np.linalg.norm(e)
        if nrm > 0.5:
            cols.append(e / nrm)
    return np.column_stack(cols) if cols else np.zeros((m, 0))


def _normalize_columns(W: np.ndarray, S: np.ndarray):
    # Columns with negligible norm carry no direction; rebuild them as an
    # orthonormal complement of the well-defined ones.
    m, k = W.shape
    floor = (S[0] if k else 0.0) * _EPS * max(m, k)
    good = S > floor
    Q = np.zeros_like(W)
    Q[:, good] = W[:, good] / S[good]
    if not np.all(good):
        comp = _complete_basis(Q[:, good], m)
        Q[:, ~good] = comp[:, good.sum():good.sum() + (~good).sum()]
    return Q


def svd(A) -> SvdResult:
    """Thin SVD ``A = U diag(S) V^T`` with ``k = min(m, n)`` singular values.

    Singular values are non-increasing.  Each left singular vector has its
    largest-magnitude entry nonnegative.  When ``m <= n`` the returned ``U``
    is a square orthogonal matrix even if ``A`` is rank deficient.
    """
    A = np.asarray(A, dtype=np.float64)
    if A.ndim != 2 or 0 in A.shape:
        raise ValueError(f"expected a non-empty matrix, got shape {A.shape}")
    if not np.all(np.isfinite(A)):
        raise ValueError("matrix has non-finite entries")
    m, n = A.shape
    if m >= n:
        W, R = _jacobi_columns(A)
        S = np.linalg.norm(W, axis=0)
        order = np.argsort(-S, kind="stable")
        S, W, R = S[order], W[:, order], R[:, order]
        U = _normalize_columns(W, S)
        V = R
    else:
        # A^T R = W  =>  A = R diag(S) (W / S)^T
        W, R = _jacobi_columns(A.T)
        S = np.linalg.norm(W, axis=0)
        order = np.argsort(-S, kind="stable")
        S, W, R = S[order], W[:, order], R[:, order]
        U = R
        V = _normalize_columns(W, S)
    for i in range(U.shape[1]):
        j = int(np.argmax(np.abs(U[:, i])))
        if U[j, i] < 0:
            U[:, i] *= -1.0
            V[:, i] *= -1.0
    return SvdResult(U, S, V)


@dataclass(frozen=True, eq=False)
class HosvdResult:
    """``A = core x_1 U_1 ... x_K U_K`` with orthogonal ``factors[k-1] = U_k``."""

    factors: tuple
    core: np.ndarray

    @property
    def l(self) -> int:
        return self.core.shape[0]

    @property
    def K(self) -> int:
        return self.core.ndim


def hosvd(A) -> HosvdResult:
    A = np.asarray(A, dtype=np.float64)
    l, K = tensor_geometry(A)
    factors = []
    for k in range(1, K + 1):
        U = svd(unfold(A, k)).U
        if U.shape[1] < l:
            U = _complete_basis(U, l)
        factors.append(U)
    core = A
    for k, U in enumerate(factors, start=1):
        core = mode_product(core, U.T, k)
    return HosvdResult(tuple(factors), core)


def reconstruct(h: HosvdResult) -> np.ndarray:
    A = h.core
    for k, U in enumerate(h.factors, start=1):
        A = mode_product(A, U, k)
    return A


@dataclass(frozen=True, eq=False)
class Spectrum:
    """Core entries ordered by decreasing magnitude.

    Ties (including the zeros below the noise floor) keep lexicographic
    multi-index order.  ``indices[r]`` is the 0-based multi-index
    ``(i_1, ..., i_K)`` of rank ``r + 1``.
    """

    magnitudes: np.ndarray
    values: np.ndarray
    indices: np.ndarray

    def __len__(self):
        return self.magnitudes.size

    def tails(self) -> np.ndarray:
        """``out[s - 1] = sum_{i >= s} |s_i|^2`` for ``s = 1 .. n + 1``."""
        sq = self.magnitudes ** 2
        out = np.zeros(sq.size + 1)
        # accumulate from the smallest entries up
        out[:-1] = np.cumsum(sq[::-1])[::-1]
        return out

    def tail(self, s: int) -> float:
        if s < 1:
            raise ValueError(f"spectrum ranks start at 1, got {s}")
        if s > len(self):
            return 0.0
        return float(self.tails()[s - 1])

    def rows(self):
        """CSV rows ``(rank, magnitude, signed_value, multi_index)``."""
        for r in range(len(self)):
            yield (r + 1, float(self.magnitudes[r]), float(self.values[r]),
                   ";".join(str(int(i)) for i in self.indices[r]))


def spectrum(h: HosvdResult, rtol: float = NOISE_RTOL) -> Spectrum:
    core = h.core
    vals = core.ravel()  # C order: lexicographic in (i_1, ..., i_K)
    floor = rtol * math.sqrt(float(np.sum(vals ** 2)))
    vals = np.where(np.abs(vals) <= floor, 0.0, vals)
    order = np.argsort(-np.abs(vals), kind="stable")
    idx = np.array(np.unravel_index(order, core.shape)).T.reshape(-1, core.ndim)
    return Spectrum(np.abs(vals[order]), vals[order], idx)


class RankOneTerm(NamedTuple):
    """``scale * factors[0] (x) ... (x) factors[K-1]`` with ``factors[k-1]``
    acting on mode ``k`` (so ``factors[0]`` belongs to layer 0)."""

    scale: float
    factors: tuple


def rank_one_tensor(term: RankOneTerm) -> np.ndarray:
    return term.scale * reduce(np.multiply.outer, term.factors)


def truncate(h: HosvdResult, M: int, rtol: float = NOISE_RTOL):
    """Keep the ``M`` largest core entries of the HOSVD expansion.

    Returns ``(terms, approx)``.  Because the rank-one basis tensors are
    orthonormal, ``|A - approx|_F^2`` equals the sum of the squared dropped
    entries.  Zero entries are never kept, so a zero tensor yields no terms.
    """
    if int(M) != M or M < 1:
        raise ValueError(f"M must be a positive integer, got {M}")
    spec = spectrum(h, rtol)
    terms = []
    approx = np.zeros(h.core.shape)
    for r in range(min(int(M), len(spec))):
        if spec.magnitudes[r] == 0.0:
            break
        multi = spec.indices[r]
        factors = tuple(h.factors[k][:, multi[k]].copy() for k in range(h.K))
        term = RankOneTerm(float(spec.values[r]), factors)
        terms.append(term)
        approx += rank_one_tensor(term)
    return terms, approx
