"""Linear dilated temporal CNN: parameters, forward pass, effective filter.

Layer ``k`` (0-based) convolves with dilation ``l**k``:

    h_1,i     = sum_j w_0ji  *_1      x_j
    h_k+1,i   = sum_j w_kji  *_{l^k}  h_k,j
    y_hat     = sum_i h_K,i

with identity activation, so the whole network is one causal filter of
length ``l**K`` (its effective filter).  Input dimensions are indexed from 0.
"""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .sequence import FunctionalKernel, VectorSeq, _conv_values, make_rng, standard_normal
from .hosvd import RankOneTerm

__all__ = [
    "NET_FORMAT",
    "ConvNetParams",
    "forward",
    "effective_filter",
    "impulse_response",
    "from_rank_one_terms",
]

NET_FORMAT = "ltcn-net-v1"


@dataclass(frozen=True, eq=False)
class ConvNetParams:
    """Filters ``weights[k][j, i, :] = w_kji`` of a K-layer, M-channel net.

    ``weights[0]`` has shape ``(d, M, l)``; every later layer ``(M, M, l)``.
    """

    l: int
    K: int
    M: int
    d: int
    weights: tuple

    def __post_init__(self):
        l, K, M, d = self.l, self.K, self.M, self.d
        if l < 2 or K < 1 or M < 1 or d < 1:
            raise ValueError(f"invalid geometry l={l}, K={K}, M={M}, d={d}")
        ws = tuple(np.array(w, dtype=np.float64) for w in self.weights)
        if len(ws) != K:
            raise ValueError(f"expected {K} layers of weights, got {len(ws)}")
        for k, w in enumerate(ws):
            want = (d if k == 0 else M, M, l)
            if w.shape != want:
                raise ValueError(f"layer {k} weights have shape {w.shape}, expected {want}")
            if not np.all(np.isfinite(w)):
                raise ValueError(f"layer {k} has non-finite weights")
            w.setflags(write=False)
        object.__setattr__(self, "weights", ws)

    @property
    def n_params(self) -> int:
        return sum(w.size for w in self.weights)

    @property
    def receptive_field(self) -> int:
        return self.l ** self.K

    @classmethod
    def zeros(cls, l: int, K: int, M: int, d: int) -> "ConvNetParams":
        ws = [np.zeros((d, M, l))] + [np.zeros((M, M, l)) for _ in range(K - 1)]
        return cls(l, K, M, d, tuple(ws))

    @classmethod
    def random(cls, l, K, M, d, seed=0) -> "ConvNetParams":
        gen = make_rng(seed)
        ws = [standard_normal(gen, d * M * l).reshape(d, M, l)]
        ws += [standard_normal(gen, M * M * l).reshape(M, M, l) for _ in range(K - 1)]
        return cls(l, K, M, d, tuple(ws))

    def to_json(self) -> dict:
        return {
            "fmt": NET_FORMAT,
            "l": self.l, "K": self.K, "M": self.M, "d": self.d,
            "weights": [w.tolist() for w in self.weights],
        }

    @classmethod
    def from_json(cls, obj: dict) -> "ConvNetParams":
        fmt = obj.get("fmt", NET_FORMAT)
        if fmt != NET_FORMAT:
            raise ValueError(f"unsupported network format {fmt!r}")
        return cls(int(obj["l"]), int(obj["K"]), int(obj["M"]), int(obj["d"]),
                   tuple(np.asarray(w, dtype=np.float64) for w in obj["weights"]))


def forward(net: ConvNetParams, x: VectorSeq) -> VectorSeq:
    """Network output, a scalar sequence on ``[x.start, x.end + l**K - 1)``."""
    if x.d != net.d:
        raise ValueError(f"dimension mismatch: net d={net.d}, input d={x.d}")
    h = x.values
    for k, w in enumerate(net.weights):
        r = net.l ** k
        h = np.column_stack([_conv_values(w[:, i, :].T, h, r) for i in range(net.M)])
    return VectorSeq(x.start, h.sum(axis=1))


def effective_filter(net: ConvNetParams) -> FunctionalKernel:
    """Kernel ``rho`` with ``forward(net, x)(t) = sum_s rho(s)^T x(t - s)``.

    Built by the recursion ``e_{k+1}[c'] = sum_c w_{k c c'} *_{l^k} e_k[c]``
    starting from ``e_1[c] = w_{0 i c}``; the result has length ``l**K``.
    """
    rho = np.zeros((net.d, net.l ** net.K))
    for i in range(net.d):
        e = net.weights[0][i].T  # (l, M): time x channel
        for k in range(1, net.K):
            w = net.weights[k]
            r = net.l ** k
            e = np.column_stack([_conv_values(w[:, c, :].T, e, r) for c in range(net.M)])
        rho[i] = e.sum(axis=1)
    return FunctionalKernel(rho)


def impulse_response(net: ConvNetParams, dim: int) -> np.ndarray:
    """Forward response to the unit impulse on input ``dim`` at time 0."""
    if not 0 <= dim < net.d:
        raise ValueError(f"input dimension {dim} out of range 0..{net.d - 1}")
    e = np.zeros((1, net.d))
    e[0, dim] = 1.0
    y = forward(net, VectorSeq(0, e))
    return y.window(0, net.l ** net.K)[:, 0]


def from_rank_one_terms(terms, l: int, K: int, d: int, dim_of_term) -> ConvNetParams:
    """Realize a sum of rank-one tensors as network weights.

    Term ``m`` gets its own channel ``m``: its layer-0 filter reads input
    ``dim_of_term[m]`` only, higher layers pass channel ``m`` to itself, and
    the scale multiplies the last-layer filter.  Then, per input dimension,
    the tensorized effective filter is the sum of its terms' outer products.
    """
    terms = [t if isinstance(t, RankOneTerm) else RankOneTerm(*t) for t in terms]
    dims = list(dim_of_term)
    if not terms:
        raise ValueError("need at least one rank-one term")
    if len(dims) != len(terms):
        raise ValueError(f"{len(terms)} terms but {len(dims)} dimension assignments")
    M = len(terms)
    net = ConvNetParams.zeros(l, K, M, d)
    ws = [w.copy() for w in net.weights]
    for m, (term, j) in enumerate(zip(terms, dims)):
        if not 0 <= j < d:
            raise ValueError(f"term {m}: input dimension {j} out of range 0..{d - 1}")
        fs = [np.asarray(f, dtype=np.float64).ravel() for f in term.factors]
        if len(fs) != K:
            raise ValueError(f"term {m} has {len(fs)} factors, expected K={K}")
        if any(f.size != l for f in fs):
            raise ValueError(f"term {m}: every factor must have length l={l}")
        fs[-1] = term.scale * fs[-1]
        ws[0][j, m] = fs[0]
        for k in range(1, K):
            ws[k][m, m] = fs[k]
    return ConvNetParams(l, K, M, d, tuple(ws))
