"""Hot kernels with a numba path and a pure-numpy fallback.

The backend is chosen once at import from ``CONGRKIT_NUMBA`` ("0" forces
numpy) and can be switched at runtime with :func:`set_backend`, which the
benchmark uses to time both paths on identical inputs.
"""

from __future__ import annotations

import os

import numpy as np

try:
    from numba import njit

    HAS_NUMBA = True
except ImportError:  # pragma: no cover - numba is a declared dependency
    HAS_NUMBA = False

_BACKEND = "numba" if HAS_NUMBA and os.environ.get("CONGRKIT_NUMBA", "1") != "0" else "numpy"


def backend() -> str:
    return _BACKEND


def set_backend(name: str) -> None:
    global _BACKEND
    if name not in ("numba", "numpy"):
        raise ValueError(f"unknown backend {name!r}")
    if name == "numba" and not HAS_NUMBA:
        raise RuntimeError("numba is not installed")
    _BACKEND = name


def key_weights(d: int, q: int) -> np.ndarray | None:
    """Base-q place values for d digits, or None if they overflow int64."""
    if q ** d >= 2**63:
        return None
    return np.array([q ** (d - 1 - i) for i in range(d)], dtype=np.int64)


# --- numpy reference implementations --------------------------------------


def _right_mul_keys_np(X, G, q, weights):
    out = np.matmul(X, G) % q
    keys = out.reshape(len(out), -1) @ weights
    return out, keys


def _average_np(x, perms):
    return x[perms].sum(axis=0) / perms.shape[0]


def _displacements_np(v, perms):
    return np.sqrt(((v[perms] - v[None, :]) ** 2).sum(axis=1))


# --- numba kernels ----------------------------------------------------------

if HAS_NUMBA:

    @njit(cache=True)
    def _right_mul_keys_nb(X, G, q, weights):
        N, d, _ = X.shape
        out = np.empty_like(X)
        keys = np.empty(N, dtype=np.int64)
        for a in range(N):
            key = 0
            for i in range(d):
                for j in range(d):
                    acc = 0
                    for k in range(d):
                        acc += X[a, i, k] * G[k, j]
                    acc %= q
                    out[a, i, j] = acc
                    key += acc * weights[i * d + j]
            keys[a] = key
        return out, keys

    @njit(cache=True)
    def _average_nb(x, perms):
        k, N = perms.shape
        y = np.zeros(N)
        for s in range(k):
            for i in range(N):
                y[i] += x[perms[s, i]]
        for i in range(N):
            y[i] /= k
        return y

    @njit(cache=True)
    def _displacements_nb(v, perms):
        k, N = perms.shape
        out = np.empty(k)
        for s in range(k):
            acc = 0.0
            for i in range(N):
                d = v[perms[s, i]] - v[i]
                acc += d * d
            out[s] = np.sqrt(acc)
        return out


# --- dispatch ---------------------------------------------------------------


def right_mul_keys(X: np.ndarray, G: np.ndarray, q: int, weights: np.ndarray):
    """(X @ G) mod q for a batch of square matrices, plus base-q keys."""
    X = np.ascontiguousarray(X, dtype=np.int64)
    G = np.ascontiguousarray(G, dtype=np.int64)
    if _BACKEND == "numba":
        return _right_mul_keys_nb(X, G, np.int64(q), weights)
    return _right_mul_keys_np(X, G, q, weights)


def average(x: np.ndarray, perms: np.ndarray) -> np.ndarray:
    """Averaging operator (1/|S|) sum_s x[perm_s]."""
    x = np.ascontiguousarray(x, dtype=np.float64)
    if _BACKEND == "numba":
        return _average_nb(x, perms)
    return _average_np(x, perms)


def displacements(v: np.ndarray, perms: np.ndarray) -> np.ndarray:
    """||rho(s) v - v|| for every generator permutation."""
    v = np.ascontiguousarray(v, dtype=np.float64)
    if _BACKEND == "numba":
        return _displacements_nb(v, perms)
    return _displacements_np(v, perms)
