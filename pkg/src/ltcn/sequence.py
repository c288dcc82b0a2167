"""Finite sequences, causal dilated convolution and linear functionals.

A linear, causal, time-homogeneous functional on square-summable inputs is
represented by a kernel ``rho`` with

    H_t(x) = sum_{s >= 0} rho(s)^T x(t - s).

Kernels here always have finite support ``[0, T)``.  The norm used for the
distance between two functionals is the operator norm
``sup_t sup_{|x| <= 1} |H_t(x) - G_t(x)|``, which equals the l2 distance of
the kernels (Cauchy-Schwarz, attained by :func:`worst_case_input`).
"""
from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

__all__ = [
    "VectorSeq",
    "FunctionalKernel",
    "dilated_convolve",
    "apply_functional",
    "kernel_l2_distance",
    "functional_error_norm",
    "worst_case_input",
    "gaussian_mse",
    "standard_normal",
    "make_rng",
]

# Samples per Monte-Carlo batch.  Fixed so that the draw order, and hence the
# result, does not depend on the total sample count.
_MC_BATCH = 1 << 15


def _frozen(a: np.ndarray) -> np.ndarray:
    a = np.array(a, dtype=np.float64, copy=True)
    a.setflags(write=False)
    return a


@dataclass(frozen=True, eq=False)
class VectorSeq:
    """A finitely supported sequence ``x: Z -> R^d``.

    ``values[i]`` is ``x(start + i)``; everything outside the stored window
    is zero.
    """

    start: int
    values: np.ndarray

    def __post_init__(self):
        v = np.asarray(self.values, dtype=np.float64)
        if v.ndim == 1:
            v = v[:, None]
        if v.ndim != 2 or v.shape[1] < 1:
            raise ValueError(f"values must have shape (n, d), got {v.shape}")
        if not np.all(np.isfinite(v)):
            raise ValueError("sequence values must be finite")
        object.__setattr__(self, "start", int(self.start))
        object.__setattr__(self, "values", _frozen(v))

    @property
    def d(self) -> int:
        return self.values.shape[1]

    @property
    def end(self) -> int:
        """One past the last stored index."""
        return self.start + self.values.shape[0]

    def __len__(self):
        return self.values.shape[0]

    def at(self, t: int) -> np.ndarray:
        i = t - self.start
        if 0 <= i < len(self):
            return self.values[i].copy()
        return np.zeros(self.d)

    def window(self, lo: int, hi: int) -> np.ndarray:
        """Values on ``[lo, hi)`` as an ``(hi - lo, d)`` array, zero-filled."""
        out = np.zeros((max(hi - lo, 0), self.d))
        a, b = max(lo, self.start), min(hi, self.end)
        if a < b:
            out[a - lo:b - lo] = self.values[a - self.start:b - self.start]
        return out

    def norm(self) -> float:
        return math.sqrt(float(np.sum(self.values ** 2)))

    def shifted(self, tau: int) -> "VectorSeq":
        """``x^(tau)(s) = x(s - tau)``."""
        return VectorSeq(self.start + tau, self.values)

    def scalar(self) -> np.ndarray:
        if self.d != 1:
            raise ValueError("not a scalar sequence")
        return self.values[:, 0].copy()

    def to_json(self) -> dict:
        return {"start": self.start, "values": self.values.tolist()}

    @classmethod
    def from_json(cls, obj: dict) -> "VectorSeq":
        return cls(int(obj.get("start", 0)), np.asarray(obj["values"], dtype=np.float64))


@dataclass(frozen=True, eq=False)
class FunctionalKernel:
    """Kernel of a linear functional, ``channels[j, s] = rho_j(s)``.

    All ``d`` channels share the horizon ``T`` and start at ``s = 0``.
    """

    channels: np.ndarray

    def __post_init__(self):
        c = np.asarray(self.channels, dtype=np.float64)
        if c.ndim == 1:
            c = c[None, :]
        if c.ndim != 2 or c.shape[0] < 1 or c.shape[1] < 1:
            raise ValueError(f"channels must have shape (d, T), got {c.shape}")
        if not np.all(np.isfinite(c)):
            raise ValueError("kernel entries must be finite")
        object.__setattr__(self, "channels", _frozen(c))

    @property
    def d(self) -> int:
        return self.channels.shape[0]

    @property
    def horizon(self) -> int:
        return self.channels.shape[1]

    def at(self, s: int) -> np.ndarray:
        if 0 <= s < self.horizon:
            return self.channels[:, s].copy()
        return np.zeros(self.d)

    def padded(self, n: int) -> np.ndarray:
        """Channels restricted (or zero-extended) to ``[0, n)``."""
        out = np.zeros((self.d, n))
        m = min(n, self.horizon)
        out[:, :m] = self.channels[:, :m]
        return out

    def energy(self) -> float:
        return float(np.sum(self.channels ** 2))

    def is_zero(self) -> bool:
        return not np.any(self.channels)

    def scaled(self, c: float) -> "FunctionalKernel":
        return FunctionalKernel(c * self.channels)

    def to_json(self) -> dict:
        return {"d": self.d, "channels": self.channels.tolist()}

    @classmethod
    def from_json(cls, obj: dict) -> "FunctionalKernel":
        chans = np.asarray(obj["channels"], dtype=np.float64)
        if chans.ndim == 1:
            chans = chans[None, :]
        if "d" in obj and int(obj["d"]) != chans.shape[0]:
            raise ValueError(f"d={obj['d']} but {chans.shape[0]} channels given")
        return cls(chans)

    @classmethod
    def zeros(cls, d: int, horizon: int = 1) -> "FunctionalKernel":
        return cls(np.zeros((d, horizon)))


def _check_dims(a, b):
    if a.d != b.d:
        raise ValueError(f"dimension mismatch: {a.d} != {b.d}")


def _conv_values(f: np.ndarray, g: np.ndarray, r: int) -> np.ndarray:
    # f: (L, d) filter on [0, L); g: (n, d) from its own start.
    L, n = f.shape[0], g.shape[0]
    out = np.zeros(n + r * (L - 1))
    for s in range(L):
        out[r * s:r * s + n] += g @ f[s]
    return out


def dilated_convolve(f, g, r: int = 1) -> VectorSeq:
    """Causal dilated convolution ``(f *_r g)(t) = sum_s f(s)^T g(t - r s)``.

    ``f`` is a filter supported on ``[0, len(f))``, given as a 1-D array
    (scalar taps) or an ``(L, d)`` array.  ``g`` is a :class:`VectorSeq` or a
    1-D array starting at time 0.  The result is a scalar sequence on
    ``[g.start, g.end + r (L - 1))``.
    """
    if int(r) != r or r < 1:
        raise ValueError(f"dilation must be a positive integer, got {r}")
    if not isinstance(g, VectorSeq):
        g = VectorSeq(0, np.asarray(g, dtype=np.float64))
    f = np.asarray(f, dtype=np.float64)
    if f.ndim == 1:
        f = f[:, None]
    if f.shape[1] != g.d:
        raise ValueError(f"dimension mismatch: filter d={f.shape[1]}, sequence d={g.d}")
    if f.shape[0] == 0:
        raise ValueError("empty filter")
    return VectorSeq(g.start, _conv_values(f, g.values, int(r)))


def apply_functional(rho: FunctionalKernel, x: VectorSeq, t: int) -> float:
    """``H_t(x) = sum_{s >= 0} rho(s)^T x(t - s)`` over the overlap of supports."""
    _check_dims(rho, x)
    # s ranges where x(t - s) is stored: start <= t - s < end
    lo = max(0, t - x.end + 1)
    hi = min(rho.horizon, t - x.start + 1)
    total = 0.0
    for s in range(lo, hi):
        total += float(rho.channels[:, s] @ x.values[t - s - x.start])
    return total


def _difference(a: FunctionalKernel, b: FunctionalKernel) -> np.ndarray:
    _check_dims(a, b)
    n = max(a.horizon, b.horizon)
    return a.padded(n) - b.padded(n)


def kernel_l2_distance(a: FunctionalKernel, b: FunctionalKernel) -> float:
    diff = _difference(a, b)
    return math.sqrt(float(np.sum(diff.T ** 2)))


def functional_error_norm(a: FunctionalKernel, b: FunctionalKernel) -> float:
    """Operator-norm distance ``sup_t sup_{|x|<=1} |A_t(x) - B_t(x)|``.

    By time-homogeneity the supremum over ``t`` is attained at every ``t``,
    and by Cauchy-Schwarz the inner supremum is the kernel l2 distance.
    """
    return kernel_l2_distance(a, b)


def worst_case_input(delta: FunctionalKernel, t: int = 0) -> VectorSeq:
    """Unit-norm input at which ``|sum_s delta(s)^T x(t - s)| = |delta|``."""
    nrm = math.sqrt(delta.energy())
    if nrm == 0.0:
        raise ValueError("worst-case input is undefined for a zero kernel")
    T = delta.horizon
    # x(t - s) = delta(s) / |delta|, stored time-major from t - T + 1
    values = delta.channels.T[::-1] / nrm
    return VectorSeq(t - T + 1, values)


def standard_normal(gen: np.random.Generator, n: int) -> np.ndarray:
    """``n`` iid N(0, 1) draws by Box-Muller from consecutive uniform pairs."""
    m = (n + 1) // 2
    u = gen.random(2 * m)
    u1 = 1.0 - u[0::2]  # (0, 1], keeps log finite
    u2 = u[1::2]
    rad = np.sqrt(-2.0 * np.log(u1))
    z = np.empty(2 * m)
    z[0::2] = rad * np.cos(2.0 * np.pi * u2)
    z[1::2] = rad * np.sin(2.0 * np.pi * u2)
    return z[:n]


def make_rng(seed: int) -> np.random.Generator:
    """Counter-based (Philox 4x64) generator; bit-reproducible per seed."""
    return np.random.Generator(np.random.Philox(int(seed)))


def gaussian_mse(a: FunctionalKernel, b: FunctionalKernel, n_samples: int = 100_000,
                 seed: int = 0, exact: bool = False) -> float:
    """Mean squared difference ``E |A_t(x) - B_t(x)|^2`` for iid N(0, 1) inputs.

    With ``exact=True`` the expectation is taken in closed form: for an
    identity input covariance, ``E (sum_s delta(s)^T x(t-s))^2`` reduces to
    ``sum_s |delta(s)|^2``.  Otherwise it is a Monte-Carlo mean over
    ``n_samples`` draws of the input on the window the kernels can see.
    """
    diff = _difference(a, b)  # (d, T)
    if exact:
        # w^T Sigma w with Sigma = I
        v = diff.T.ravel()
        return float(v @ v)
    if n_samples < 1:
        raise ValueError("n_samples must be >= 1")
    w = diff.T.ravel()  # index s*d + c pairs with x(t - s)_c
    if not np.any(w):
        return 0.0
    gen = make_rng(seed)
    acc = 0.0
    done = 0
    while done < n_samples:
        n = min(_MC_BATCH, n_samples - done)
        z = standard_normal(gen, n * w.size).reshape(n, w.size)
        acc += float(np.sum((z @ w) ** 2))
        done += n
    return acc / n_samples
