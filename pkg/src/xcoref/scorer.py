"""Trainable pairwise coreference scorers.

Each scorer is a feed-forward network with two ReLU hidden layers and a
sigmoid output. The input for a mention pair is
[v_i ; v_j ; v_i * v_j ; e(f)] where * is element-wise multiplication and
e(f) embeds each of the four binary pair features as a learned vector.
Forward, backprop and Adam are implemented here directly; training runs at
64-bit precision.
"""

from __future__ import annotations

import json
import random
import struct

import numpy as np
from scipy.special import expit

BCE_EPS = 1e-7
MODEL_MAGIC = b"XCORefMODEL1"


def relu(x: np.ndarray) -> np.ndarray:
    return np.maximum(x, 0.0)


def sigmoid(x):
    return expit(x)


def bce(p: float, y: float) -> float:
    p = min(max(p, BCE_EPS), 1.0 - BCE_EPS)
    return -(y * np.log(p) + (1.0 - y) * np.log(1.0 - p))


class PairScorer:
    """MLP over pair inputs, with optional binary pair-feature embeddings."""

    def __init__(self, v_dim: int, hidden: int = 4261, femb_dim: int = 50,
                 use_pair_features: bool = True, seed: int = 0):
        self.v_dim = v_dim
        self.hidden = hidden
        self.femb_dim = femb_dim
        self.use_pair_features = use_pair_features
        self.input_dim = 3 * v_dim + (4 * femb_dim if use_pair_features else 0)
        rng = np.random.default_rng(seed)

        def glorot(n_out, n_in):
            return rng.standard_normal((n_out, n_in)) * np.sqrt(2.0 / (n_in + n_out))

        self.params: dict[str, np.ndarray] = {
            "W1": glorot(hidden, self.input_dim),
            "b1": np.zeros(hidden),
            "W2": glorot(hidden, hidden),
            "b2": np.zeros(hidden),
            "w3": glorot(1, hidden)[0],
            "b3": np.zeros(1),
        }
        if use_pair_features:
            # (role, bool) -> embedding
            self.params["femb"] = rng.standard_normal((4, 2, femb_dim)) * 0.1

    # -- forward / backward ------------------------------------------------

    def input_vector(self, v_i: np.ndarray, v_j: np.ndarray,
                     f: tuple[bool, bool, bool, bool] | None) -> np.ndarray:
        parts = [v_i, v_j, v_i * v_j]
        if self.use_pair_features:
            femb = self.params["femb"]
            parts.extend(femb[r, int(bool(fv))] for r, fv in enumerate(f))
        return np.concatenate(parts)

    def forward(self, x: np.ndarray):
        p = self.params
        z1 = p["W1"] @ x + p["b1"]
        a1 = relu(z1)
        z2 = p["W2"] @ a1 + p["b2"]
        a2 = relu(z2)
        z3 = float(p["w3"] @ a2 + p["b3"][0])
        prob = float(sigmoid(z3))
        return prob, (x, z1, a1, z2, a2)

    def backward(self, cache, dz3: float, grads: dict[str, np.ndarray]) -> np.ndarray:
        """Backprop d(loss)/d(output logit) = dz3; returns d(loss)/d(input)."""
        x, z1, a1, z2, a2 = cache
        p = self.params
        grads.setdefault("w3", np.zeros_like(p["w3"]))
        grads.setdefault("b3", np.zeros_like(p["b3"]))
        grads["w3"] += dz3 * a2
        grads["b3"][0] += dz3
        da2 = dz3 * p["w3"]
        dz2 = da2 * (z2 > 0)
        grads.setdefault("W2", np.zeros_like(p["W2"]))
        grads.setdefault("b2", np.zeros_like(p["b2"]))
        grads["W2"] += np.outer(dz2, a1)
        grads["b2"] += dz2
        da1 = p["W2"].T @ dz2
        dz1 = da1 * (z1 > 0)
        grads.setdefault("W1", np.zeros_like(p["W1"]))
        grads.setdefault("b1", np.zeros_like(p["b1"]))
        grads["W1"] += np.outer(dz1, x)
        grads["b1"] += dz1
        return p["W1"].T @ dz1

    def split_input_grad(self, dx: np.ndarray, v_i: np.ndarray, v_j: np.ndarray,
                        f, grads: dict[str, np.ndarray]):
        """Split d(loss)/d(input) into (d v_i, d v_j) and accumulate femb grads."""
        n = self.v_dim
        dv_i = dx[:n] + dx[2 * n:3 * n] * v_j
        dv_j = dx[n:2 * n] + dx[2 * n:3 * n] * v_i
        if self.use_pair_features:
            g = grads.setdefault("femb", np.zeros_like(self.params["femb"]))
            base = 3 * n
            for r, fv in enumerate(f):
                lo = base + r * self.femb_dim
                g[r, int(bool(fv))] += dx[lo:lo + self.femb_dim]
        return dv_i, dv_j

    # -- scoring -----------------------------------------------------------

    def score(self, v_i, v_j, f=None) -> float:
        return self.forward(self.input_vector(v_i, v_j, f))[0]

    def score_symmetric(self, v_i, v_j, f=None) -> float:
        """(S(i,j) + S(j,i)) / 2; symmetric by construction."""
        return 0.5 * (self.score(v_i, v_j, f) + self.score(v_j, v_i, f))


class Adam:
    """Adam over a named dict of arrays (beta1=0.9, beta2=0.999, eps=1e-8)."""

    def __init__(self, lr: float = 1e-3, beta1: float = 0.9, beta2: float = 0.999,
                 eps: float = 1e-8):
        self.lr = lr
        self.beta1 = beta1
        self.beta2 = beta2
        self.eps = eps
        self.t = 0
        self.m: dict[str, np.ndarray] = {}
        self.v: dict[str, np.ndarray] = {}

    def step(self, params: dict[str, np.ndarray], grads: dict[str, np.ndarray]) -> None:
        if self.lr == 0.0:
            return
        self.t += 1
        for name, g in grads.items():
            if not np.all(np.isfinite(g)):
                raise FloatingPointError(f"non-finite gradient for {name}")
            m = self.m.setdefault(name, np.zeros_like(g))
            v = self.v.setdefault(name, np.zeros_like(g))
            m += (1 - self.beta1) * (g - m)
            v += (1 - self.beta2) * (g * g - v)
            m_hat = m / (1 - self.beta1 ** self.t)
            v_hat = v / (1 - self.beta2 ** self.t)
            params[name] -= self.lr * m_hat / (np.sqrt(v_hat) + self.eps)
            if not np.all(np.isfinite(params[name])):
                raise FloatingPointError(f"non-finite parameter {name} after update")

    def state(self) -> dict:
        return {"t": self.t, "m": dict(self.m), "v": dict(self.v)}


# -- training pairs ---------------------------------------------------------

def make_training_pairs(clusters: list[frozenset[str]],
                        gold: dict[str, str], seed: int = 0
                        ) -> list[tuple[tuple[str, str], int]]:
    """All unordered cross-cluster mention pairs, labeled by gold chain equality.

    Pairs are returned in a seed-shuffled order; each pair is a sorted id tuple.
    """
    pairs: list[tuple[tuple[str, str], int]] = []
    ordered = sorted(clusters, key=lambda c: min(c))
    for a in range(len(ordered)):
        for b in range(a + 1, len(ordered)):
            for mi in sorted(ordered[a]):
                for mj in sorted(ordered[b]):
                    i, j = sorted((mi, mj))
                    label = int(gold[i] == gold[j])
                    pairs.append(((i, j), label))
    random.Random(seed).shuffle(pairs)
    return pairs


def batches(items: list, size: int) -> list[list]:
    return [items[i:i + size] for i in range(0, len(items), size)]


# -- checkpoint container ---------------------------------------------------

def _write_arrays(fh, magic: bytes, meta: dict, arrays: dict[str, np.ndarray]) -> None:
    header = dict(meta)
    header["arrays"] = [
        {"name": k, "dtype": str(v.dtype), "shape": list(v.shape)}
        for k, v in arrays.items()
    ]
    raw = json.dumps(header).encode("utf-8")
    fh.write(magic)
    fh.write(struct.pack("<I", len(raw)))
    fh.write(raw)
    for v in arrays.values():
        fh.write(np.ascontiguousarray(v).tobytes())


def _read_arrays(fh, magic: bytes) -> tuple[dict, dict[str, np.ndarray]]:
    got = fh.read(len(magic))
    if got != magic:
        raise ValueError("bad magic: not a model checkpoint file")
    (hlen,) = struct.unpack("<I", fh.read(4))
    header = json.loads(fh.read(hlen).decode("utf-8"))
    arrays = {}
    for spec in header.pop("arrays"):
        dtype = np.dtype(spec["dtype"])
        shape = tuple(spec["shape"])
        count = int(np.prod(shape)) if shape else 1
        buf = fh.read(count * dtype.itemsize)
        arrays[spec["name"]] = np.frombuffer(buf, dtype=dtype).reshape(shape).copy()
    return header, arrays
