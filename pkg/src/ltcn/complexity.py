"""Complexity measures of a target kernel.

``C1(g)`` bounds the HOSVD spectrum tails of the tensorized, restricted
kernel across all depths ``K``:

    sum_j sum_{i >= s} |s_i^(j,K)|^2 <= C1 * g(s - 1),   s >= 1, K >= 1

and ``C2(f)`` bounds the memory tails ``sum_{i >= s} |rho(i)|^2 <= C2 * f(s)``.
Both are computed as suprema of ratios over a finite range.  A ratio with
zero numerator is 0; a positive numerator over a zero envelope value makes
the constant infinite.
"""
from __future__ import annotations

import json
import math
from dataclasses import dataclass, field
from typing import NamedTuple

import numpy as np

from .hosvd import NOISE_RTOL, hosvd, spectrum
from .sequence import FunctionalKernel
from .tensor import tensorize

__all__ = [
    "DecayEnvelope",
    "parse_envelope",
    "SupEstimate",
    "ComplexityReport",
    "memory_tail",
    "memory_tails",
    "spectral_tail",
    "spectral_tails",
    "c1_estimate",
    "c2_estimate",
    "fit_g",
    "fit_f",
    "complexity_report",
    "support_length",
    "stabilization_depth",
]


@dataclass(frozen=True, eq=False)
class DecayEnvelope:
    """Non-increasing nonnegative envelope ``g`` or ``f`` on ``s = 0, 1, ...``.

    ``exp``: ``exp(-beta s)``; ``pow``: ``(1 + s)**-alpha``; ``table``: given
    values, holding the last value past the end of the table.  Tables may
    contain zeros (e.g. fitted tails of a finite-support kernel).
    """

    kind: str
    param: float = 0.0
    values: tuple = ()

    def __post_init__(self):
        if self.kind in ("exp", "pow"):
            if not (math.isfinite(self.param) and self.param > 0):
                raise ValueError(f"{self.kind} envelope needs a positive finite rate, "
                                 f"got {self.param}")
        elif self.kind == "table":
            v = np.asarray(self.values, dtype=np.float64)
            if v.ndim != 1 or v.size == 0:
                raise ValueError("table envelope needs a non-empty list of values")
            if not np.all(np.isfinite(v)) or np.any(v < 0):
                raise ValueError("table envelope values must be finite and nonnegative")
            if not np.any(v > 0):
                raise ValueError("table envelope is identically zero")
            if np.any(np.diff(v) > 0):
                raise ValueError("table envelope must be non-increasing")
            object.__setattr__(self, "values", tuple(float(x) for x in v))
        else:
            raise ValueError(f"unknown envelope kind {self.kind!r}")

    @classmethod
    def exponential(cls, beta):
        return cls("exp", float(beta))

    @classmethod
    def power(cls, alpha):
        return cls("pow", float(alpha))

    @classmethod
    def table(cls, values):
        return cls("table", 0.0, tuple(values))

    def __call__(self, s):
        s = np.asarray(s, dtype=np.float64)
        if np.any(s < 0):
            raise ValueError("envelopes are defined for s >= 0")
        if self.kind == "exp":
            out = np.exp(-self.param * s)
        elif self.kind == "pow":
            out = (1.0 + s) ** -self.param
        else:
            v = np.asarray(self.values)
            out = v[np.minimum(s.astype(np.int64), v.size - 1)]
        return float(out) if out.ndim == 0 else out

    def scaled(self, c: float) -> "DecayEnvelope":
        # c * exp(-beta s) is not an exp envelope; only tables scale in-kind
        if self.kind != "table":
            raise ValueError("only table envelopes can be scaled")
        return DecayEnvelope.table([c * v for v in self.values])

    def to_json(self) -> dict:
        if self.kind == "table":
            return {"kind": "table", "values": list(self.values)}
        key = "beta" if self.kind == "exp" else "alpha"
        return {"kind": self.kind, key: self.param}

    @classmethod
    def from_json(cls, obj) -> "DecayEnvelope":
        if isinstance(obj, list):
            return cls.table(obj)
        kind = obj.get("kind", "table")
        if kind == "table":
            return cls.table(obj["values"])
        if kind == "exp":
            return cls.exponential(obj["beta"])
        if kind == "pow":
            return cls.power(obj["alpha"])
        raise ValueError(f"unknown envelope kind {kind!r}")


def parse_envelope(text: str) -> DecayEnvelope:
    """Parse ``exp:<beta>``, ``pow:<alpha>`` or ``table:<path.json>``."""
    kind, sep, arg = text.partition(":")
    if not sep or not arg:
        raise ValueError(f"bad envelope spec {text!r}")
    if kind == "table":
        with open(arg) as fh:
            return DecayEnvelope.from_json(json.load(fh))
    try:
        rate = float(arg)
    except ValueError:
        raise ValueError(f"bad envelope spec {text!r}") from None
    if kind == "exp":
        return DecayEnvelope.exponential(rate)
    if kind == "pow":
        return DecayEnvelope.power(rate)
    raise ValueError(f"bad envelope spec {text!r}")


def _ratio(num: float, den: float) -> float:
    if num <= 0.0:
        return 0.0
    if den <= 0.0:
        return math.inf
    return num / den


class SupEstimate(NamedTuple):
    value: float
    witness: object  # s for C2, (s, K) for C1


def support_length(rho: FunctionalKernel) -> int:
    """One past the last nonzero time index (0 for a zero kernel)."""
    nz = np.flatnonzero(np.any(rho.channels != 0, axis=0))
    return int(nz[-1]) + 1 if nz.size else 0


def stabilization_depth(rho: FunctionalKernel, l: int) -> int:
    """Smallest ``K`` with ``l**K`` covering the kernel's support."""
    n, K = support_length(rho), 1
    while l ** K < n:
        K += 1
    return K


def memory_tails(rho: FunctionalKernel, s_max: int) -> np.ndarray:
    """``out[s] = sum_{i >= s} |rho(i)|^2`` for ``s = 0 .. s_max``."""
    sq = np.sum(rho.channels ** 2, axis=0)
    tails = np.zeros(max(s_max, rho.horizon) + 1)
    tails[:rho.horizon] = np.cumsum(sq[::-1])[::-1]
    return tails[:s_max + 1]


def memory_tail(rho: FunctionalKernel, s: int) -> float:
    if s < 0:
        raise ValueError("s must be >= 0")
    return float(memory_tails(rho, s)[s])


def spectral_tails(rho: FunctionalKernel, l: int, K: int, rtol: float = NOISE_RTOL) -> np.ndarray:
    """``out[s - 1]`` = spectrum tail from rank ``s`` summed over input
    dimensions, for ``s = 1 .. l**K + 1``."""
    n = l ** K
    restricted = rho.padded(n)
    total = np.zeros(n + 1)
    for row in restricted:
        total += spectrum(hosvd(tensorize(row, l, K)), rtol).tails()
    return total


def spectral_tail(rho: FunctionalKernel, l: int, K: int, s: int, rtol: float = NOISE_RTOL) -> float:
    if l < 2 or K < 1:
        raise ValueError(f"invalid geometry l={l}, K={K}")
    if not 1 <= s <= l ** K + 1:
        raise ValueError(f"rank s={s} outside 1..{l ** K + 1}")
    return float(spectral_tails(rho, l, K, rtol)[s - 1])


def c2_estimate(rho: FunctionalKernel, f: DecayEnvelope, s_max: int | None = None) -> SupEstimate:
    """``sup_{0 <= s <= s_max} memory_tail(s) / f(s)`` and its first maximizer."""
    if s_max is None:
        s_max = rho.horizon
    tails = memory_tails(rho, s_max)
    fs = np.atleast_1d(f(np.arange(s_max + 1)))
    best, arg = 0.0, 0
    for s in range(s_max + 1):
        r = _ratio(tails[s], fs[s])
        if r > best:
            best, arg = r, s
    return SupEstimate(best, arg)


def _c1_from_tables(tables, g: DecayEnvelope):
    best, arg, per_K = 0.0, (1, 1), []
    for K, tails in enumerate(tables, start=1):
        gs = np.atleast_1d(g(np.arange(tails.size - 1)))  # g(s - 1), s = 1 .. l**K
        kbest = 0.0
        for s in range(1, tails.size):
            r = _ratio(tails[s - 1], gs[s - 1])
            kbest = max(kbest, r)
            if r > best:
                best, arg = r, (s, K)
        per_K.append(kbest)
    return best, arg, per_K


def _converged(seq) -> bool:
    if len(seq) < 2:
        return False
    a, b = seq[-2], seq[-1]
    if math.isinf(a) or math.isinf(b):
        return a == b
    return bool(abs(a - b) <= 0.01 * max(abs(a), abs(b)))


def c1_estimate(rho: FunctionalKernel, g: DecayEnvelope, l: int, K_max: int,
                rtol: float = NOISE_RTOL) -> SupEstimate:
    """``sup`` over ``K in 1..K_max``, ``s in 1..l**K`` of
    ``spectral_tail(s) / g(s - 1)``; witness ``(s, K)`` prefers smaller K, then s."""
    if K_max < 1:
        raise ValueError("K_max must be >= 1")
    tables = [spectral_tails(rho, l, K, rtol) for K in range(1, K_max + 1)]
    best, arg, _ = _c1_from_tables(tables, g)
    return SupEstimate(best, arg)


def fit_g(rho: FunctionalKernel, l: int, K_max: int, rtol: float = NOISE_RTOL) -> DecayEnvelope:
    """Tight spectral envelope ``g(m) = max_K spectral_tail_K(m + 1)``."""
    n = l ** K_max
    g = np.zeros(n + 1)
    for K in range(1, K_max + 1):
        t = spectral_tails(rho, l, K, rtol)
        g[:t.size] = np.maximum(g[:t.size], t)
    if not np.any(g > 0):
        # zero kernel: every envelope gives C1 = 0
        return DecayEnvelope.table([1.0])
    return DecayEnvelope.table(g)


def fit_f(rho: FunctionalKernel, s_max: int) -> DecayEnvelope:
    """Tight memory envelope ``f(s) = memory_tail(s)`` on ``0 .. s_max``."""
    tails = memory_tails(rho, s_max)
    if not np.any(tails > 0):
        return DecayEnvelope.table([1.0])
    return DecayEnvelope.table(tails)


@dataclass(eq=False)
class ComplexityReport:
    C1: float
    C2: float
    C1_witness: tuple
    C2_witness: int
    l: int
    K_max: int
    s_max: int
    g: DecayEnvelope
    f: DecayEnvelope
    spectral_tables: list = field(repr=False)
    memory_table: np.ndarray = field(repr=False)
    c1_per_K: list = field(default_factory=list)
    converged: bool = False
    stabilization_K: int = 1

    @property
    def finite(self) -> bool:
        return math.isfinite(self.C1) and math.isfinite(self.C2)

    def recompute(self) -> tuple[float, float]:
        """Re-derive ``(C1, C2)`` from the stored tail tables."""
        c1, _, _ = _c1_from_tables([np.asarray(t) for t in self.spectral_tables], self.g)
        fs = np.atleast_1d(self.f(np.arange(len(self.memory_table))))
        c2 = max((_ratio(t, v) for t, v in zip(self.memory_table, fs)), default=0.0)
        return c1, c2

    def to_json(self) -> dict:
        def num(x):
            return None if math.isinf(x) else float(x)
        return {
            "C1": num(self.C1), "C1_infinite": math.isinf(self.C1),
            "C2": num(self.C2), "C2_infinite": math.isinf(self.C2),
            "C1_witness": {"s": self.C1_witness[0], "K": self.C1_witness[1]},
            "C2_witness": {"s": self.C2_witness},
            "l": self.l, "K_max": self.K_max, "s_max": self.s_max,
            "converged": bool(self.converged), "stabilization_K": self.stabilization_K,
            "c1_per_K": [num(x) for x in self.c1_per_K],
            "g": self.g.to_json(), "f": self.f.to_json(),
            "spectral_tails": {str(K): [float(v) for v in t]
                               for K, t in enumerate(self.spectral_tables, start=1)},
            "memory_tails": [float(v) for v in self.memory_table],
        }

    @classmethod
    def from_json(cls, obj: dict) -> "ComplexityReport":
        def num(x):
            return math.inf if x is None else float(x)
        tables = [np.asarray(obj["spectral_tails"][str(K)])
                  for K in range(1, int(obj["K_max"]) + 1)]
        return cls(
            C1=num(obj["C1"]), C2=num(obj["C2"]),
            C1_witness=(obj["C1_witness"]["s"], obj["C1_witness"]["K"]),
            C2_witness=obj["C2_witness"]["s"],
            l=int(obj["l"]), K_max=int(obj["K_max"]), s_max=int(obj["s_max"]),
            g=DecayEnvelope.from_json(obj["g"]), f=DecayEnvelope.from_json(obj["f"]),
            spectral_tables=tables, memory_table=np.asarray(obj["memory_tails"]),
            c1_per_K=[num(x) for x in obj["c1_per_K"]],
            converged=bool(obj["converged"]), stabilization_K=int(obj["stabilization_K"]),
        )


def complexity_report(rho: FunctionalKernel, g: DecayEnvelope, f: DecayEnvelope,
                      l: int, K_max: int, s_max: int | None = None,
                      rtol: float = NOISE_RTOL) -> ComplexityReport:
    """Both complexity constants with witnesses and the tables behind them.

    ``s_max`` defaults to ``max(horizon, l**K_max)`` so that every memory
    tail a depth-``K_max`` bound refers to is covered.
    """
    if l < 2 or K_max < 1:
        raise ValueError(f"invalid geometry l={l}, K_max={K_max}")
    if s_max is None:
        s_max = max(rho.horizon, l ** K_max)
    tables = [spectral_tails(rho, l, K, rtol) for K in range(1, K_max + 1)]
    c1, c1_arg, per_K = _c1_from_tables(tables, g)
    c2 = c2_estimate(rho, f, s_max)
    return ComplexityReport(
        C1=c1, C2=c2.value, C1_witness=c1_arg, C2_witness=c2.witness,
        l=l, K_max=K_max, s_max=s_max, g=g, f=f,
        spectral_tables=tables, memory_table=memory_tails(rho, s_max),
        c1_per_K=per_K, converged=_converged(per_K),
        stabilization_K=stabilization_depth(rho, l),
    )
