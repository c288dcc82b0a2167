"""Constructive rate estimates and their inverse.

:func:`jackson_approximate` builds, for given ``(M, K)``, the network whose
effective filter keeps the ``M`` largest HOSVD terms of each restricted,
tensorized target channel.  Its squared error splits exactly into a spectral
tail and a memory tail, which is what the forward bound
``error <= C1 g(M) + C2 f(l**K)`` rests on.

:func:`bernstein_estimate` goes the other way: from a grid of achieved errors
it estimates the constants ``A`` and ``B`` of a rate ``A g(M) + B f(l**K)``,
replacing the limits ``M -> inf`` and ``K -> inf`` by the largest grid values.
"""
from __future__ import annotations

import math
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass

import numpy as np

from .complexity import (
    ComplexityReport,
    DecayEnvelope,
    _ratio,
    complexity_report,
    memory_tail,
)
from .hosvd import NOISE_RTOL, hosvd, spectrum, truncate
from .network import ConvNetParams, effective_filter, from_rank_one_terms
from .sequence import FunctionalKernel, kernel_l2_distance
from .tensor import tensorize

__all__ = [
    "IDENTITY_RTOL",
    "CONSTANT_RTOL",
    "InfiniteComplexityError",
    "JacksonPoint",
    "JacksonSweep",
    "BernsteinEstimate",
    "BernsteinVerdict",
    "SWEEP_HEADER",
    "noise_floor",
    "jackson_approximate",
    "verify_jackson",
    "bernstein_estimate",
    "verify_bernstein",
]

IDENTITY_RTOL = 1e-9
CONSTANT_RTOL = 1e-6

SWEEP_HEADER = ("M", "K", "error_sq", "bound", "spectral_tail", "memory_tail", "ratio")


def _jsonable(x):
    # JSON has no infinity; infinite constants are written as null
    if isinstance(x, float) and not math.isfinite(x):
        return None
    return float(x) if isinstance(x, (float, np.floating)) else x


class InfiniteComplexityError(ValueError):
    """A complexity constant is infinite for the supplied envelopes."""


def noise_floor(rho: FunctionalKernel, l: int, K: int) -> float:
    """Squared-error mass that rounding-level core entries can carry.

    Used as the absolute slack next to relative tolerances, so exact
    (zero-error) cases are not judged on rounding noise.
    """
    return rho.d * l ** K * (NOISE_RTOL ** 2) * max(rho.energy(), 1e-300)


@dataclass(eq=False)
class JacksonPoint:
    M: int
    K: int
    error_sq: float
    spectral_tail_val: float
    memory_tail_val: float
    channels: int
    bound: float | None = None
    floor: float = 0.0
    net: ConvNetParams | None = None

    @property
    def split_sq(self) -> float:
        """Error from the two-term split: spectral tail plus memory tail."""
        return self.spectral_tail_val + self.memory_tail_val

    @property
    def identity_ok(self) -> bool:
        a, b = self.error_sq, self.split_sq
        return bool(abs(a - b) <= IDENTITY_RTOL * max(a, b) + self.floor)

    @property
    def ratio(self) -> float:
        if self.bound is None:
            return math.nan
        return _ratio(self.error_sq, self.bound)

    @property
    def bound_ok(self) -> bool:
        if self.bound is None:
            raise ValueError("no bound attached to this point")
        return bool(self.error_sq <= self.bound + IDENTITY_RTOL * self.bound + self.floor)

    def csv_row(self):
        return (self.M, self.K, self.error_sq, self.bound, self.spectral_tail_val,
                self.memory_tail_val, self.ratio)

    def to_json(self) -> dict:
        return {
            "M": self.M, "K": self.K, "error_sq": self.error_sq,
            "spectral_tail": self.spectral_tail_val, "memory_tail": self.memory_tail_val,
            "split_sq": self.split_sq, "identity_ok": bool(self.identity_ok),
            "bound": _jsonable(self.bound), "channels": self.channels,
            "channel_allocation": "one channel per (term, input dimension)",
        }


def jackson_approximate(rho: FunctionalKernel, l: int, K: int, M: int,
                        rtol: float = NOISE_RTOL):
    """Optimal ``M``-term network of depth ``K`` for ``rho``.

    Returns ``(net, point)``.  ``point.error_sq`` is the squared kernel
    distance of the realized network; ``point.split_sq`` is the same
    quantity from the spectral and memory tails.
    """
    if int(l) != l or l < 2 or int(K) != K or K < 1 or int(M) != M or M < 1:
        raise ValueError(f"invalid geometry l={l}, K={K}, M={M}")
    n = l ** K
    terms, dims = [], []
    spec_tail = 0.0
    for j, row in enumerate(rho.padded(n)):
        h = hosvd(tensorize(row, l, K))
        kept, _ = truncate(h, M, rtol)
        terms += kept
        dims += [j] * len(kept)
        spec_tail += spectrum(h, rtol).tail(M + 1)
    if terms:
        net = from_rank_one_terms(terms, l, K, rho.d, dims)
    else:
        net = ConvNetParams.zeros(l, K, 1, rho.d)
    err = kernel_l2_distance(rho, effective_filter(net)) ** 2
    point = JacksonPoint(M=M, K=K, error_sq=err, spectral_tail_val=spec_tail,
                         memory_tail_val=memory_tail(rho, n), channels=len(terms),
                         floor=noise_floor(rho, l, K), net=net)
    return net, point


def _sweep(rho, l, grid, threads):
    grid = sorted(set((int(M), int(K)) for M, K in grid), key=lambda mk: (mk[1], mk[0]))
    if not grid:
        raise ValueError("empty grid")

    def one(mk):
        return jackson_approximate(rho, l, mk[1], mk[0])[1]

    if threads and threads > 1:
        with ThreadPoolExecutor(max_workers=threads) as pool:
            points = list(pool.map(one, grid))
    else:
        points = [one(mk) for mk in grid]
    return points


def _report_for(rho, g, f, l, grid) -> ComplexityReport:
    K_max = max(K for _, K in grid)
    rep = complexity_report(rho, g, f, l, K_max)
    if not rep.finite:
        which = [n for n, v in (("C1", rep.C1), ("C2", rep.C2)) if math.isinf(v)]
        raise InfiniteComplexityError(
            f"{' and '.join(which)} infinite: envelope vanishes where the target's tails do not")
    return rep


@dataclass(eq=False)
class JacksonSweep:
    points: list
    report: ComplexityReport

    @property
    def passed(self) -> bool:
        return all(p.bound_ok for p in self.points)

    def rows(self):
        return [p.csv_row() for p in self.points]


def verify_jackson(rho: FunctionalKernel, g: DecayEnvelope, f: DecayEnvelope, l: int,
                   grid, threads: int = 1) -> JacksonSweep:
    """Check ``error_sq <= C1 g(M) + C2 f(l**K)`` at every grid point ``(M, K)``.

    Points come back sorted by ``(K, M)``.  Raises
    :class:`InfiniteComplexityError` when either constant is infinite.
    """
    rep = _report_for(rho, g, f, l, grid)
    points = _sweep(rho, l, grid, threads)
    for p in points:
        p.bound = rep.C1 * g(p.M) + rep.C2 * f(l ** p.K)
    return JacksonSweep(points, rep)


@dataclass(eq=False)
class BernsteinEstimate:
    A_est: float
    B_est: float
    A_witness: int
    B_witness: int
    floor: float
    M_max: int
    K_max: int
    C1_check: bool | None = None
    C2_check: bool | None = None

    def to_json(self) -> dict:
        return {k: _jsonable(getattr(self, k)) for k in (
            "A_est", "B_est", "A_witness", "B_witness", "floor", "M_max", "K_max",
            "C1_check", "C2_check")}


def bernstein_estimate(error_grid: dict, g: DecayEnvelope, f: DecayEnvelope,
                       l: int) -> BernsteinEstimate:
    """Estimate the rate constants from achieved squared errors.

    ``B = sup_K err(M_max, K) / f(l**K)`` stands in for the ``M -> inf``
    limit, and ``A = sup_M (err(M, K_max) - err(M_max, K_max)) / g(M)`` for
    the ``K -> inf`` limit, the subtracted floor removing what depth
    ``K_max`` still leaves of the memory term.
    """
    if len(error_grid) < 2:
        raise ValueError("degenerate grid: need at least two (M, K) points")
    Ms = sorted({M for M, _ in error_grid})
    Ks = sorted({K for _, K in error_grid})
    M_max, K_max = Ms[-1], Ks[-1]
    if (M_max, K_max) not in error_grid:
        raise ValueError(f"grid lacks the corner point (M={M_max}, K={K_max})")
    floor = float(error_grid[(M_max, K_max)])

    B, B_arg = 0.0, Ks[0]
    for K in Ks:
        if (M_max, K) in error_grid:
            r = _ratio(float(error_grid[(M_max, K)]), f(l ** K))
            if r > B:
                B, B_arg = r, K
    A, A_arg = 0.0, Ms[0]
    for M in Ms:
        if (M, K_max) in error_grid:
            r = _ratio(float(error_grid[(M, K_max)]) - floor, g(M))
            if r > A:
                A, A_arg = r, M
    return BernsteinEstimate(A, B, A_arg, B_arg, floor, M_max, K_max)


@dataclass(eq=False)
class BernsteinVerdict:
    estimate: BernsteinEstimate
    report: ComplexityReport
    C1_grid: float
    C2_grid: float
    points: list

    @property
    def passed(self) -> bool:
        return bool(self.estimate.C1_check and self.estimate.C2_check)

    def to_json(self) -> dict:
        return {
            **self.estimate.to_json(),
            "C1": _jsonable(self.report.C1), "C2": _jsonable(self.report.C2),
            "C1_grid": _jsonable(self.C1_grid), "C2_grid": _jsonable(self.C2_grid),
            "passed": self.passed,
        }


def verify_bernstein(rho: FunctionalKernel, g: DecayEnvelope, f: DecayEnvelope, l: int,
                     grid, threads: int = 1) -> BernsteinVerdict:
    """Recover ``(A, B)`` from the optimal approximants over ``grid`` and
    check ``C1 <= A``, ``C2 <= B``.

    The errors fed to the estimator are the tail-split values
    ``spectral_tail + memory_tail`` of each constructed network, which equal
    the realized errors without cancellation noise.  The constants compared
    are restricted to what the grid can probe: ``C1`` over ranks
    ``s = M + 1`` and depths ``K`` of the grid, ``C2`` at ``s = l**K``.
    """
    rep = _report_for(rho, g, f, l, grid)
    points = _sweep(rho, l, grid, threads)
    errors = {(p.M, p.K): p.split_sq for p in points}
    est = bernstein_estimate(errors, g, f, l)

    Ms = sorted({p.M for p in points})
    Ks = sorted({p.K for p in points})
    c1 = 0.0
    for K in Ks:
        tails = rep.spectral_tables[K - 1]
        for M in Ms:
            st = float(tails[M]) if M < tails.size else 0.0
            c1 = max(c1, _ratio(st, g(M)))
    c2 = max(_ratio(float(rep.memory_table[l ** K]), f(l ** K)) for K in Ks)
    est.C1_check = bool(c1 <= est.A_est * (1 + CONSTANT_RTOL))
    est.C2_check = bool(c2 <= est.B_est * (1 + CONSTANT_RTOL))
    return BernsteinVerdict(est, rep, c1, c2, points)
