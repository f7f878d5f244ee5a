"""Finite matrix quotients, semidirect products and their Cayley graphs.

Every group here is a group of square integer matrices mod q.  The affine
group (EL_2 mod q) x| (Z/q)^2 is stored as 3x3 matrices [[g, v], [0, 1]],
whose product is (gh, v + g w), so one enumerator serves all cases.

Elements are keyed by their row-major entries.  When q^(d*d) fits in int64
the key is the base-q integer; its numeric order equals the lexicographic
order of the entries, so it agrees with the fixed-width byte key returned
by :meth:`FiniteQuotientGroup.canonical_key`.
"""

from __future__ import annotations

import os
import warnings
from dataclasses import dataclass, field
from typing import Sequence

import numpy as np

from . import _accel
from .errors import (CapExceededError, InvalidDimensionError, InvalidPositionsError,
                     NotUnimodularError)
from .exact_matrix import E, GenSymbol, IntMatrix, bareiss_det, elementary, sigma_symbols

DEFAULT_CAP = 2_000_000


def default_cap() -> int:
    env = os.environ.get("CONGRKIT_CAP")
    return int(env) if env else DEFAULT_CAP


def _det_mod(mat: np.ndarray, q: int) -> int:
    return IntMatrix(mat.tolist()).det() % q


@dataclass
class FiniteQuotientGroup:
    kind: str
    q: int
    elements: np.ndarray          # (N, d, d) int64, identity at index 0
    generators: list[int]         # element indices, closed under inverse
    labels: list[str]
    params: dict = field(default_factory=dict)
    _weights: np.ndarray | None = None
    _sorted_keys: np.ndarray | None = None
    _order: np.ndarray | None = None

    @property
    def size(self) -> int:
        return len(self.elements)

    @property
    def dim(self) -> int:
        return self.elements.shape[1]

    def keys(self, mats: np.ndarray) -> np.ndarray:
        mats = np.asarray(mats, dtype=np.int64)
        flat = mats.reshape(len(mats), -1)
        if self._weights is not None:
            return flat @ self._weights
        return _void_keys(flat, self.q)

    def canonical_key(self, idx: int) -> bytes:
        """Fixed-width big-endian bytes of the entries of element ``idx``."""
        width = _entry_dtype(self.q)
        return self.elements[idx].reshape(-1).astype(width).tobytes()

    def index_of(self, mats: np.ndarray) -> np.ndarray:
        """Indices of the given matrices (already reduced mod q); -1 if absent."""
        k = self.keys(mats)
        pos = np.searchsorted(self._sorted_keys, k)
        pos = np.minimum(pos, len(self._sorted_keys) - 1)
        hit = self._sorted_keys[pos] == k
        return np.where(hit, self._order[pos], -1)

    def multiply(self, a: int, b: int) -> int:
        prod = (self.elements[a] @ self.elements[b]) % self.q
        return int(self.index_of(prod[None])[0])

    def inverse_index(self, a: int) -> int:
        # x a = I: the unique x sent to the identity by right multiplication
        prods = np.matmul(self.elements, self.elements[a]) % self.q
        hits = np.nonzero(self.keys(prods) == self.keys(self.elements[:1])[0])[0]
        return int(hits[0])

    def element_order(self, a: int) -> int:
        cur, k = a, 1
        while cur != 0:
            cur = self.multiply(cur, a)
            k += 1
        return k

    def subgroup_indices(self, mask_fn) -> np.ndarray:
        return np.nonzero(mask_fn(self.elements))[0]

    def cayley_graph(self) -> "CayleyGraph":
        perms = []
        for g in self.generators:
            _, k = _right_mul(self.elements, self.elements[g], self.q, self._weights)
            idx = self.index_of_keys(k)
            if (idx < 0).any():
                raise CapExceededError("group is not closed under a generator")
            perms.append(idx)
        return CayleyGraph(self, np.array(perms, dtype=np.int64).reshape(len(perms), self.size))

    def index_of_keys(self, k: np.ndarray) -> np.ndarray:
        pos = np.searchsorted(self._sorted_keys, k)
        pos = np.minimum(pos, len(self._sorted_keys) - 1)
        hit = self._sorted_keys[pos] == k
        return np.where(hit, self._order[pos], -1)

    def dump_keys(self) -> bytes:
        return b"".join(self.canonical_key(i) for i in range(self.size))

    def describe(self) -> dict:
        return {"kind": self.kind, "q": self.q, "order": self.size,
                "generators": list(self.labels), **self.params}


def _entry_dtype(q: int) -> str:
    if q <= 2**8:
        return ">u1"
    if q <= 2**16:
        return ">u2"
    return ">u4"


def _void_keys(flat: np.ndarray, q: int) -> np.ndarray:
    arr = np.ascontiguousarray(flat.astype(_entry_dtype(q)))
    return arr.view(np.dtype((np.void, arr.shape[1] * arr.dtype.itemsize))).ravel()


def _right_mul(X, G, q, weights):
    if weights is not None:
        return _accel.right_mul_keys(X, G, q, weights)
    out = np.matmul(X, G) % q
    return out, _void_keys(out.reshape(len(out), -1), q)


def enumerate_group(generators: Sequence, q: int, cap: int | None = None, *,
                    kind: str = "MatrixModQ", labels: Sequence[str] | None = None,
                    params: dict | None = None) -> FiniteQuotientGroup:
    """Breadth-first closure of the group generated by matrices mod q.

    Each level is sorted by key, so element indices are deterministic.  The
    generator list is extended by inverses where they are missing, and images
    equal to the identity are dropped.
    """
    cap = default_cap() if cap is None else cap
    if cap < 1:
        raise ValueError("cap must be at least 1")
    if q < 1:
        raise ValueError("modulus must be positive")
    gens = [np.array(g.tolist() if isinstance(g, IntMatrix) else g, dtype=np.int64) % q
            for g in generators]
    if not gens:
        raise InvalidDimensionError("need at least one generator")
    d = gens[0].shape[0]
    if any(g.shape != (d, d) for g in gens):
        raise InvalidDimensionError("generators have mismatched shapes")
    for g in gens:
        det = _det_mod(g, q)
        if q > 1 and np.gcd(det, q) != 1:
            raise NotUnimodularError(f"generator with det {det} is not invertible mod {q}")
    labels = list(labels) if labels is not None else [f"g{k}" for k in range(len(gens))]
    weights = _accel.key_weights(d * d, q)
    ident = np.eye(d, dtype=np.int64)[None] % q

    # with a symmetric generator list, level L+1 only meets levels L and L-1
    walk = {g.tobytes(): g for g in gens + [_inverse_mod(g, q) for g in gens]}
    walk = [walk[b] for b in sorted(walk)]
    levels = [ident]
    prev = np.empty(0, dtype=_keys_of(ident, q, weights).dtype)
    cur = _keys_of(ident, q, weights)
    frontier = ident
    total = 1
    while len(frontier):
        cand_m, cand_k = [], []
        for g in walk:
            out, k = _right_mul(frontier, g, q, weights)
            cand_m.append(out)
            cand_k.append(k)
        cand_m = np.concatenate(cand_m)
        cand_k = np.concatenate(cand_k)
        uk, first = np.unique(cand_k, return_index=True)
        fresh = ~(_isin_sorted(uk, cur) | _isin_sorted(uk, prev))
        frontier = cand_m[first[fresh]]
        total += len(frontier)
        if total > cap:
            raise CapExceededError(f"group exceeds cap {cap} (reached {total})", total)
        if len(frontier):
            levels.append(frontier)
        prev, cur = cur, uk[fresh]
    elements = np.concatenate(levels)
    all_keys = _keys_of(elements, q, weights)
    order = np.argsort(all_keys, kind="stable")
    group = FiniteQuotientGroup(kind, q, elements, [], [], dict(params or {}),
                                weights, all_keys[order], order.astype(np.int64))

    gen_idx = [int(i) for i in group.index_of(np.stack(gens))]
    chosen, names = [], []
    for gi, name in zip(gen_idx, labels):
        if gi != 0 and gi not in chosen:
            chosen.append(gi)
            names.append(name)
    for gi, name in list(zip(chosen, names)):
        inv = group.inverse_index(gi)
        if inv not in chosen:
            chosen.append(inv)
            names.append(name + "^-1")
    group.generators = chosen
    group.labels = names
    return group


def _inverse_mod(g: np.ndarray, q: int) -> np.ndarray:
    if q == 1:
        return g * 0
    rows = g.tolist()
    d = len(rows)
    det = bareiss_det(rows)
    if d == 1:
        adj = [[1]]
    else:
        # adjugate by cofactors; d is tiny here
        adj = [[(-1) ** (i + j) * bareiss_det([r[:i] + r[i + 1:] for k, r in enumerate(rows)
                                               if k != j])
                for j in range(d)] for i in range(d)]
    return (np.array(adj, dtype=np.int64) * pow(det % q, -1, q)) % q


def _keys_of(mats, q, weights):
    flat = mats.reshape(len(mats), -1)
    return flat @ weights if weights is not None else _void_keys(flat, q)


def _isin_sorted(values, sorted_ref):
    if len(sorted_ref) == 0:
        return np.zeros(len(values), dtype=bool)
    pos = np.minimum(np.searchsorted(sorted_ref, values), len(sorted_ref) - 1)
    return sorted_ref[pos] == values


@dataclass
class CayleyGraph:
    """Right-multiplication Cayley graph: vertex x goes to x*s under perms[s]."""

    group: FiniteQuotientGroup
    perms: np.ndarray

    @property
    def degree(self) -> int:
        return self.perms.shape[0]

    def check(self) -> bool:
        n = self.group.size
        for p in self.perms:
            if not np.array_equal(np.sort(p), np.arange(n)):
                return False
        gens = self.group.generators
        for a, g in enumerate(gens):
            inv = gens.index(self.group.inverse_index(g))
            if not np.array_equal(self.perms[inv][self.perms[a]], np.arange(n)):
                return False
        return True

    def edge_list(self) -> np.ndarray:
        """Rows (vertex, generator id, target)."""
        k, n = self.perms.shape
        src = np.tile(np.arange(n), k)
        gid = np.repeat(np.arange(k), n)
        return np.stack([src, gid, self.perms.reshape(-1)], axis=1)

    def is_connected(self) -> bool:
        from scipy.sparse import coo_matrix
        from scipy.sparse.csgraph import connected_components

        e = self.edge_list()
        n = self.group.size
        adj = coo_matrix((np.ones(len(e)), (e[:, 0], e[:, 2])), shape=(n, n))
        return connected_components(adj, directed=False)[0] == 1


# --- concrete families ------------------------------------------------------


def symbol_matrices(symbols: Sequence[GenSymbol], n: int) -> list[np.ndarray]:
    return [np.array(s.matrix(n).tolist(), dtype=np.int64) for s in symbols]


def sl_elementary(n: int, q: int, cap: int | None = None) -> FiniteQuotientGroup:
    """SL_n(Z/q) generated by images of X_ij(1)."""
    syms = [E(i, j, 1) for i in range(1, n + 1) for j in range(1, n + 1) if i != j]
    return enumerate_group(symbol_matrices(syms, n), q, cap,
                           labels=[s.to_line() for s in syms], params={"n": n})


def congruence_quotient(n: int, m: int, cap: int | None = None, *,
                        symbols: Sequence[GenSymbol] | None = None) -> FiniteQuotientGroup:
    """Image of <symbols> (default Sigma_n(m)) in SL_n(Z/m^2)."""
    syms = sigma_symbols(n, m) if symbols is None else list(symbols)
    q = m * m
    return enumerate_group(symbol_matrices(syms, n), q, cap, kind="CongruenceQuotient",
                           labels=[s.to_line() for s in syms], params={"n": n, "m": m})


def congruence_coordinates(mats: np.ndarray, m: int) -> np.ndarray:
    """Coordinates of I + m B mod m^2 in C_m^(n^2-1): off-diagonal B, then B_ii for i < n."""
    mats = np.asarray(mats, dtype=np.int64)
    n = mats.shape[-1]
    B = ((mats - np.eye(n, dtype=np.int64)) // m) % m if m > 1 else np.zeros_like(mats)
    off = [B[..., i, j] for i in range(n) for j in range(n) if i != j]
    diag = [B[..., i, i] for i in range(n - 1)]
    return np.stack(off + diag, axis=-1)


@dataclass
class CoverageReport:
    n: int
    m: int
    quotient_size: int
    e_size: int
    f_size: int
    product_size: int
    covered: bool
    lagrange_ok: bool


def verify_product_decomposition(n: int, m: int, cap: int | None = None) -> CoverageReport:
    """Check that E * F exhausts Gamma_n(m) mod m^2.

    E is generated by X_ij(+-m), F by their y_n conjugates; both are taken
    mod m^2 and the product set is formed pairwise.
    """
    if n < 2 or m < 1:
        raise InvalidDimensionError("need n >= 2 and m >= 1")
    syms = sigma_symbols(n, m)
    half = len(syms) // 2
    full = congruence_quotient(n, m, cap, symbols=syms)
    eg = congruence_quotient(n, m, cap, symbols=syms[:half])
    fg = congruence_quotient(n, m, cap, symbols=syms[half:])
    q = m * m
    cap_v = default_cap() if cap is None else cap
    if eg.size * fg.size > 50 * cap_v:
        raise CapExceededError("product set too large to form", eg.size * fg.size)
    prods = []
    for chunk in np.array_split(np.arange(eg.size), max(1, eg.size // 256)):
        block = np.matmul(eg.elements[chunk][:, None], fg.elements[None]) % q
        prods.append(np.unique(full.keys(block.reshape(-1, n, n))))
    pk = np.unique(np.concatenate(prods))
    covered = len(pk) == full.size and bool(_isin_sorted(pk, full._sorted_keys).all())
    lagrange = full.size % eg.size == 0 and full.size % fg.size == 0
    return CoverageReport(n, m, full.size, eg.size, fg.size, len(pk), covered, lagrange)


# --- semidirect products ----------------------------------------------------


SEMIDIRECT_LABELS = ("U+", "U-", "L+", "L-", "e+", "e-", "f+", "f-")


def affine(g: Sequence[Sequence[int]], v: Sequence[int]) -> np.ndarray:
    return np.array([[g[0][0], g[0][1], v[0]], [g[1][0], g[1][1], v[1]], [0, 0, 1]],
                    dtype=np.int64)


def semidirect_generators(m: int, l: int) -> list[np.ndarray]:
    I = [[1, 0], [0, 1]]
    return [affine([[1, m], [0, 1]], [0, 0]), affine([[1, -m], [0, 1]], [0, 0]),
            affine([[1, 0], [m, 1]], [0, 0]), affine([[1, 0], [-m, 1]], [0, 0]),
            affine(I, [l, 0]), affine(I, [-l, 0]), affine(I, [0, l]), affine(I, [0, -l])]


def build_semidirect(m: int, l: int, q: int, cap: int | None = None) -> FiniteQuotientGroup:
    """(EL_2 generated at level m) x| (l Z)^2, all mod q, as affine 3x3 matrices."""
    if m < 1 or l < 1 or q < 1:
        raise ValueError("m, l, q must be positive")
    G = enumerate_group(semidirect_generators(m, l), q, cap, kind="SemidirectModQ",
                        labels=SEMIDIRECT_LABELS, params={"m": m, "l": l})
    return G


def translation_subgroup(G: FiniteQuotientGroup) -> np.ndarray:
    """Indices of elements with identity linear part."""
    lin = G.elements[:, :2, :2]
    mask = (lin == np.eye(2, dtype=np.int64) % G.q).all(axis=(1, 2))
    return np.nonzero(mask)[0]


# --- level-(m, l) generators and EL_2 embeddings ----------------------------


def alpha_symbols(n: int, m: int, l: int) -> list[GenSymbol]:
    t = m ** l
    out = []
    for i in range(1, n):
        out += [E(i, n, t, t), E(i, n, -t, t)]
    for j in range(1, n):
        out += [E(n, j, t, t), E(n, j, -t, t)]
    return out


def beta_generators(n: int, m: int, l: int,
                    sigma2: Sequence[GenSymbol] | None = None) -> list[GenSymbol]:
    """alpha_n(m, l) together with Sigma_{n-1}(m) in the top-left block."""
    if n < 3 or m < 1 or l < 1:
        raise InvalidDimensionError("need n >= 3, m >= 1, l >= 1")
    if n > 3:
        low = sigma_symbols(n - 1, m)
    elif sigma2 is not None:
        low = list(sigma2)
    else:
        warnings.warn("default generators X_12(+-m), X_21(+-m) may generate a subgroup "
                      "of infinite index in Gamma_2(m)", stacklevel=2)
        low = [E(1, 2, m, m), E(1, 2, -m, m), E(2, 1, m, m), E(2, 1, -m, m)]
    return alpha_symbols(n, m, l) + low


@dataclass
class El2Embedding:
    """Images of U+-, L+-, e+-, f+- as elementary n x n matrices.

    ``mode == "row"``: translations sit in row ``fixed`` at columns ``pair``;
    ``mode == "col"``: in column ``fixed`` at rows ``pair``.
    """

    n: int
    m: int
    l: int
    mode: str
    fixed: int
    pair: tuple[int, int]
    images: dict[str, GenSymbol]

    def matrix(self, label: str) -> IntMatrix:
        return self.images[label].matrix(self.n)

    def translation(self, x: int, y: int) -> IntMatrix:
        """Image of the translation (x, y) * m^l."""
        a, b = self.pair
        rows = IntMatrix.identity(self.n).tolist()
        t = self.m ** self.l
        if self.mode == "row":
            rows[self.fixed - 1][a - 1] += x * t
            rows[self.fixed - 1][b - 1] += y * t
        else:
            rows[a - 1][self.fixed - 1] += x * t
            rows[b - 1][self.fixed - 1] += y * t
        return IntMatrix(rows)

    def check_relations(self) -> bool:
        """Conjugation by each linear image acts on translations as g.v."""
        m = self.m
        lin = {"U+": [[1, m], [0, 1]], "U-": [[1, -m], [0, 1]],
               "L+": [[1, 0], [m, 1]], "L-": [[1, 0], [-m, 1]]}
        basis = [(1, 0), (0, 1), (1, 1), (2, -3)]
        for name, g in lin.items():
            h = self.matrix(name)
            hinv = h.inverse()
            for x, y in basis:
                gv = (g[0][0] * x + g[0][1] * y, g[1][0] * x + g[1][1] * y)
                if h @ self.translation(x, y) @ hinv != self.translation(*gv):
                    return False
        for x, y in basis:
            for u, w in basis:
                s, t = self.translation(x, y), self.translation(u, w)
                if s @ t != t @ s or s @ t != self.translation(x + u, y + w):
                    return False
        return True


def embed_el2_pair(n: int, g: GenSymbol | tuple[int, int], m: int, l: int) -> El2Embedding:
    """Embedding whose translation part contains X_ij(m^l) for g = (i, j).

    Rows i >= 3 use a row embedding (translations X_{i a}, X_{i b}); otherwise
    column j >= 3 is used.  The linear part lives on {a, b} within 1..n-1.
    """
    if n < 3:
        raise InvalidDimensionError("need n >= 3")
    i, j = (g.i, g.j) if isinstance(g, GenSymbol) else g
    if i == j or not (1 <= i <= n and 1 <= j <= n):
        raise InvalidPositionsError(f"bad position ({i}, {j})")
    t = m ** l
    if i >= 3 and j < n:
        mode, fixed, anchor = "row", i, j
    elif j >= 3 and i < n:
        mode, fixed, anchor = "col", j, i
    else:
        raise InvalidPositionsError(f"({i}, {j}) is not a translation position")
    others = [k for k in range(1, n) if k not in (fixed, anchor)]
    if not others:
        raise InvalidPositionsError(f"no free index to pair with {anchor}")
    a, b = anchor, others[0]
    if mode == "row":
        # the row action is w -> w G, so the linear image is g^{-T}
        imgs = {"U+": E(b, a, -m), "U-": E(b, a, m), "L+": E(a, b, -m), "L-": E(a, b, m),
                "e+": E(fixed, a, t), "e-": E(fixed, a, -t),
                "f+": E(fixed, b, t), "f-": E(fixed, b, -t)}
    else:
        imgs = {"U+": E(a, b, m), "U-": E(a, b, -m), "L+": E(b, a, m), "L-": E(b, a, -m),
                "e+": E(a, fixed, t), "e-": E(a, fixed, -t),
                "f+": E(b, fixed, t), "f-": E(b, fixed, -t)}
    return El2Embedding(n, m, l, mode, fixed, (a, b), imgs)


__all__ = [
    "DEFAULT_CAP", "FiniteQuotientGroup", "CayleyGraph", "CoverageReport", "El2Embedding",
    "enumerate_group", "sl_elementary", "congruence_quotient", "congruence_coordinates",
    "verify_product_decomposition", "build_semidirect", "translation_subgroup",
    "semidirect_generators", "alpha_symbols", "beta_generators", "embed_el2_pair",
    "elementary", "symbol_matrices", "default_cap",
]
