"""Synthetic target kernels with analytically known structure."""
from __future__ import annotations

import json
import warnings
from dataclasses import dataclass, field

import numpy as np
from scipy.special import zeta

from .sequence import FunctionalKernel, make_rng, standard_normal
from .tensor import detensorize

__all__ = ["TargetSpec", "TruncationWarning", "generate", "parse_target", "load_kernel"]

# Relative tail energy beyond the horizon above which truncation is reported.
TRUNCATION_RTOL = 1e-14

_ALIASES = {
    "shift": "shift",
    "exp": "exp", "exponential": "exp",
    "pow": "pow", "power": "pow",
    "lowrank": "lowrank", "random_low_rank": "lowrank",
    "file": "file",
}


class TruncationWarning(UserWarning):
    """An infinite-support target lost non-negligible energy at its horizon."""


@dataclass(frozen=True)
class TargetSpec:
    kind: str
    params: dict = field(default_factory=dict)
    d: int = 1

    def __post_init__(self):
        kind = _ALIASES.get(self.kind)
        if kind is None:
            raise ValueError(f"unknown target kind {self.kind!r}")
        object.__setattr__(self, "kind", kind)
        if self.d < 1:
            raise ValueError("d must be >= 1")
        p = self.params
        try:
            if kind == "shift":
                if int(p["k"]) < 0:
                    raise ValueError("shift k must be >= 0")
            elif kind == "exp":
                if not 0 < float(p["lambda"]) < 1:
                    raise ValueError("exponential target needs 0 < lambda < 1")
                if int(p["horizon"]) < 1:
                    raise ValueError("horizon must be >= 1")
            elif kind == "pow":
                if not float(p["alpha"]) > 0.5:
                    raise ValueError("power-law target needs alpha > 0.5 to be square-summable")
                if int(p["horizon"]) < 1:
                    raise ValueError("horizon must be >= 1")
            elif kind == "lowrank":
                l, K, rank = int(p["l"]), int(p["K"]), int(p["rank"])
                if l < 2 or K < 1:
                    raise ValueError(f"invalid geometry l={l}, K={K}")
                if not 1 <= rank <= l:
                    raise ValueError(
                        f"planted rank must be in 1..l={l} (orthonormal factors per mode)")
            elif kind == "file":
                str(p["path"])
        except KeyError as exc:
            raise ValueError(f"{kind} target is missing parameter {exc}") from None

    def to_json(self) -> dict:
        return {"kind": self.kind, **self.params, "d": self.d}

    @classmethod
    def from_json(cls, obj: dict) -> "TargetSpec":
        obj = dict(obj)
        kind = obj.pop("kind")
        d = int(obj.pop("d", 1))
        return cls(kind, obj, d)


def parse_target(text: str, d: int = 1, seed: int = 0) -> TargetSpec:
    """Parse ``shift:k``, ``exp:lambda:horizon``, ``pow:alpha:horizon``,
    ``lowrank:l:K:rank[:seed]`` or ``file:path``."""
    kind, _, rest = text.partition(":")
    kind = _ALIASES.get(kind.strip().lower())
    args = rest.split(":") if rest else []
    try:
        if kind == "shift" and len(args) == 1:
            return TargetSpec("shift", {"k": int(args[0])}, d)
        if kind == "exp" and len(args) == 2:
            return TargetSpec("exp", {"lambda": float(args[0]), "horizon": int(args[1])}, d)
        if kind == "pow" and len(args) == 2:
            return TargetSpec("pow", {"alpha": float(args[0]), "horizon": int(args[1])}, d)
        if kind == "lowrank" and len(args) in (3, 4):
            s = int(args[3]) if len(args) == 4 else seed
            return TargetSpec("lowrank", {"l": int(args[0]), "K": int(args[1]),
                                          "rank": int(args[2]), "seed": s}, d)
        if kind == "file" and rest:
            return TargetSpec("file", {"path": rest}, d)
    except ValueError as exc:
        raise ValueError(f"bad target spec {text!r}: {exc}") from None
    raise ValueError(f"bad target spec {text!r}")


def load_kernel(path) -> FunctionalKernel:
    """Read a kernel JSON file, or a target-spec JSON file and generate it."""
    with open(path) as fh:
        obj = json.load(fh)
    if "channels" in obj:
        return FunctionalKernel.from_json(obj)
    if "kind" in obj:
        return generate(TargetSpec.from_json(obj))
    raise ValueError(f"{path}: neither a kernel nor a target spec")


def _warn_tail(tail, total, what):
    if total > 0 and tail > TRUNCATION_RTOL * total:
        warnings.warn(f"{what}: energy beyond the horizon is {tail / total:.3g} of the total",
                      TruncationWarning, stacklevel=3)


def _planted(l, K, rank, rng):
    qs = [np.linalg.qr(standard_normal(rng, l * l).reshape(l, l))[0] for _ in range(K)]
    A = np.zeros((l,) * K)
    for r in range(rank):
        term = qs[0][:, r]
        for q in qs[1:]:
            term = np.multiply.outer(term, q[:, r])
        A += 2.0 ** -(r + 1) * term
    return detensorize(A)


def generate(spec: TargetSpec) -> FunctionalKernel:
    p, d = spec.params, spec.d
    if spec.kind == "shift":
        k = int(p["k"])
        row = np.zeros(k + 1)
        row[k] = 1.0
        return FunctionalKernel(np.tile(row, (d, 1)))
    if spec.kind == "exp":
        lam, T = float(p["lambda"]), int(p["horizon"])
        _warn_tail(lam ** (2 * T), 1.0, f"exp:{lam}:{T}")
        return FunctionalKernel(np.tile(lam ** np.arange(T, dtype=np.float64), (d, 1)))
    if spec.kind == "pow":
        alpha, T = float(p["alpha"]), int(p["horizon"])
        _warn_tail(zeta(2 * alpha, T + 1), zeta(2 * alpha, 1), f"pow:{alpha}:{T}")
        row = (1.0 + np.arange(T, dtype=np.float64)) ** -alpha
        return FunctionalKernel(np.tile(row, (d, 1)))
    if spec.kind == "lowrank":
        rng = make_rng(int(p.get("seed", 0)))
        l, K, rank = int(p["l"]), int(p["K"]), int(p["rank"])
        return FunctionalKernel(np.stack([_planted(l, K, rank, rng) for _ in range(d)]))
    rho = load_kernel(p["path"])
    return rho
