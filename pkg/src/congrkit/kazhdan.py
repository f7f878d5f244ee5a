"""Kazhdan constants of finite groups: exact abelian values and spectral bounds.

For an abelian group every unitary representation is a direct integral of
characters, so with c(chi, s) = |chi(s) - 1|^2

    kappa^2 = max_p min_chi sum_s p_s c(chi, s)        (p a distribution on S)
            = min_w max_s sum_chi w_chi c(chi, s)      (w a distribution on chi != 1)

by LP duality.  :func:`abelian_kazhdan_exact` solves this LP by column
generation and reports both sides, so the value is certified by a primal
vector p and a dual mixture w.  The single-character quantity
min_chi max_s |chi(s) - 1| is reported as ``irreducible_min``; it is an upper
bound and coincides with kappa when one character is worst for all of S.
"""

from __future__ import annotations

import json
import math
from dataclasses import asdict, dataclass, field
from typing import Sequence

import numpy as np

from . import _accel
from .errors import NotGeneratingError, ToleranceError
from .quotients import CayleyGraph, FiniteQuotientGroup, congruence_coordinates, symbol_matrices
from .exact_matrix import sigma_symbols

SCHEMA = 1


# --- reference curves -------------------------------------------------------


class ReferenceCurves:
    @staticmethod
    def eps_m(m: int) -> float:
        return 0.0 if m == 1 else math.sin(math.pi / m) / 27

    @staticmethod
    def rel_half(m: int) -> float:
        return ReferenceCurves.eps_m(m) / 2

    @staticmethod
    def abelian_cap(N: int, k: int) -> float:
        return abelian_upper_bound(N, k)

    @staticmethod
    def cyclic_exact(m: int) -> float:
        return 2 * math.sin(math.pi / m)

    @staticmethod
    def sl_lower(n: int) -> float:
        return 1 / (42 * math.sqrt(n) + 860)

    @staticmethod
    def sl_upper(n: int) -> float:
        return 2 / math.sqrt(n)

    @staticmethod
    def corollary_shape(n: int, m: int) -> float:
        return 1 / (n ** 3 * m)


def abelian_upper_bound(N: int, k: int) -> float:
    """2 pi / (N^(1/k) - 1); ``inf`` means the bound gives no constraint."""
    if N < 1 or k < 1:
        raise ValueError("need N >= 1 and k >= 1")
    root = N ** (1.0 / k)
    if root <= 1.0:
        return math.inf
    return 2 * math.pi / (root - 1)


# --- result record ----------------------------------------------------------


@dataclass
class KazhdanBounds:
    lower: float
    upper: float
    exact: bool
    method: tuple[str, ...]
    order: int
    n_gens: int
    mu: float | None = None
    residual: float | None = None
    group: dict = field(default_factory=dict)
    generators: list = field(default_factory=list)
    extra: dict = field(default_factory=dict)

    @property
    def value(self) -> float:
        """Best point estimate: the certified value when exact, else the lower bound."""
        return self.lower

    def check(self, tol: float = 1e-9) -> bool:
        return (0 <= self.lower <= self.upper + tol) and self.upper <= 2 + tol

    def to_dict(self) -> dict:
        d = asdict(self)
        d["method"] = list(self.method)
        d["schema"] = SCHEMA
        return d

    def to_json(self) -> str:
        return json.dumps(self.to_dict(), sort_keys=True, default=_json_default)


def _json_default(obj):
    if isinstance(obj, (np.integer,)):
        return int(obj)
    if isinstance(obj, (np.floating,)):
        return float(obj)
    if isinstance(obj, np.ndarray):
        return obj.tolist()
    if obj == math.inf:
        return "inf"
    raise TypeError(type(obj))


# --- characters of finite abelian groups -----------------------------------


class CharacterSpace:
    """Characters of C_{m_1} x ... x C_{m_r} evaluated on a generator list.

    A character theta sends s to exp(2 pi i sum theta_i s_i / m_i).  Phases are
    kept as integers mod M = lcm(m_i), so costs come from one lookup table.
    Searches run depth first over a prefix of coordinates and evaluate the
    remaining coordinates as one vectorized block.
    """

    def __init__(self, moduli: Sequence[int], gens: np.ndarray, block: int = 2048):
        self.moduli = [int(x) for x in moduli]
        if any(x < 1 for x in self.moduli):
            raise ValueError("moduli must be positive")
        r = len(self.moduli)
        gens = np.asarray(gens, dtype=np.int64).reshape(-1, r) % np.array(self.moduli)
        self.M = math.lcm(*self.moduli) if r else 1
        self.gens = gens
        self.k = len(gens)
        scale = np.array([self.M // x for x in self.moduli], dtype=np.int64)
        self.cost_table = 4 * np.sin(np.pi * np.arange(self.M) / self.M) ** 2
        # coordinates touched only through single-support generators go first
        single = [(np.count_nonzero(gens[:, i]) and
                   int(np.sum((gens[:, i] != 0) & (np.count_nonzero(gens, axis=1) == 1))))
                  for i in range(r)]
        self.order = sorted(range(r), key=lambda i: -single[i])
        # contribution of value v on coordinate i: (v * s_i * M / m_i) mod M
        self.contrib = [(np.arange(self.moduli[i])[:, None] * gens[None, :, i] * scale[i]) % self.M
                        for i in self.order]
        split = r
        size = 1
        while split > 0 and (size == 1 or size * self.moduli[self.order[split - 1]] <= block):
            split -= 1
            size *= self.moduli[self.order[split]]
        self.split = split
        self.leaf_size = size
        leaf = np.zeros((1, self.k), dtype=np.int64)
        for pos in range(split, r):
            c = self.contrib[pos]
            leaf = ((leaf[:, None, :] + c[None, :, :]) % self.M).reshape(-1, self.k)
        self.leaf_phase = leaf
        # which generators become fully determined after each prefix coordinate
        last = np.full(self.k, -1)
        for pos, i in enumerate(self.order):
            last[gens[:, i] != 0] = pos
        self.determined = [np.nonzero(last == pos)[0] for pos in range(split)]

    @property
    def size(self) -> int:
        return math.prod(self.moduli)

    def theta_of(self, prefix: Sequence[int], leaf_idx: int) -> tuple[int, ...]:
        vals = list(prefix)
        tail = []
        for pos in range(len(self.order) - 1, self.split - 1, -1):
            mi = self.moduli[self.order[pos]]
            tail.append(leaf_idx % mi)
            leaf_idx //= mi
        vals += tail[::-1]
        theta = [0] * len(self.order)
        for pos, i in enumerate(self.order):
            theta[i] = int(vals[pos])
        return tuple(theta)

    def phases(self, theta: Sequence[int]) -> np.ndarray:
        scale = np.array([self.M // x for x in self.moduli], dtype=np.int64)
        return (self.gens @ (np.asarray(theta, dtype=np.int64) * scale)) % self.M

    def costs(self, theta: Sequence[int]) -> np.ndarray:
        return self.cost_table[self.phases(theta)]

    def search(self, weights: np.ndarray | None, threshold: float, *,
               max_hits: int = 1, shrink: bool = False):
        """Nontrivial characters whose objective falls below ``threshold``.

        The objective is sum_s w_s c(chi, s) when ``weights`` is given and
        max_s c(chi, s) otherwise.  Returns (minimum found or threshold,
        list of (value, theta)).  With ``shrink`` the threshold tightens to the
        best value seen, which turns the search into an exact minimization.
        """
        best = [threshold]
        hits: list[tuple[float, tuple[int, ...]]] = []
        use_sum = weights is not None
        w = np.asarray(weights, dtype=np.float64) if use_sum else None
        table = self.cost_table
        M = self.M

        def leaf(prefix, phase, all_zero):
            cost = table[(phase[None, :] + self.leaf_phase) % M]
            vals = cost @ w if use_sum else cost.max(axis=1, initial=0.0)
            if all_zero:
                vals[0] = np.inf
            cut = best[0]
            idx = np.nonzero(vals < cut)[0]
            if len(idx) == 0:
                return False
            idx = idx[np.argsort(vals[idx], kind="stable")]
            for j in idx[: max_hits]:
                hits.append((float(vals[j]), self.theta_of(prefix, int(j))))
            if shrink:
                best[0] = float(vals[idx[0]])
            return len(hits) >= max_hits and not shrink

        def visit(pos, prefix, phase, partial, all_zero):
            if pos == self.split:
                return leaf(prefix, phase, all_zero)
            mi = self.moduli[self.order[pos]]
            det = self.determined[pos]
            c = self.contrib[pos]
            # values in order 0, 1, -1, 2, -2, ...
            seq = [0] + [v for d in range(1, mi // 2 + 1) for v in (d, mi - d) if v < mi]
            for v in dict.fromkeys(seq):
                ph = (phase + c[v]) % M
                if len(det):
                    cd = table[ph[det]]
                    add = float(cd @ w[det]) if use_sum else float(cd.max())
                    part = partial + add if use_sum else max(partial, add)
                else:
                    part = partial
                if part >= best[0]:
                    continue
                if visit(pos + 1, prefix + [v], ph, part, all_zero and v == 0):
                    return True
            return False

        if self.size > 1 and self.k:
            visit(0, [], np.zeros(self.k, dtype=np.int64), 0.0, True)
        hits.sort()
        found = min((h[0] for h in hits), default=threshold)
        return min(found, best[0] if shrink else threshold), hits


def _solve_master(cols: np.ndarray):
    from scipy.optimize import linprog

    nc, k = cols.shape
    c = np.zeros(k + 1)
    c[-1] = -1.0
    A_ub = np.hstack([-cols, np.ones((nc, 1))])
    A_eq = np.zeros((1, k + 1))
    A_eq[0, :k] = 1.0
    bounds = [(0, None)] * k + [(None, None)]
    res = linprog(c, A_ub=A_ub, b_ub=np.zeros(nc), A_eq=A_eq, b_eq=[1.0],
                  bounds=bounds, method="highs")
    if res.status != 0:
        raise ToleranceError(f"master LP failed: {res.message}")
    p = np.clip(res.x[:k], 0, None)
    p /= p.sum()
    w = np.clip(-res.ineqlin.marginals, 0, None)
    w = w / w.sum() if w.sum() > 0 else np.full(nc, 1.0 / nc)
    return p, float(res.x[-1]), w


def abelian_kazhdan_exact(moduli: Sequence[int], gens: Sequence[Sequence[int]], *,
                          max_rounds: int = 500, tol: float = 1e-12,
                          label: dict | None = None) -> KazhdanBounds:
    """Exact Kazhdan constant of an abelian group given by generator coordinates.

    Duplicate and trivial generator images are dropped.  ``lower`` and
    ``upper`` are square roots of the primal and dual LP certificates.
    """
    moduli = [int(x) for x in moduli]
    r = len(moduli)
    arr = np.asarray(gens, dtype=np.int64).reshape(-1, r) % np.array(moduli, dtype=np.int64)
    uniq = []
    for row in arr:
        t = tuple(int(v) for v in row)
        if any(t) and t not in uniq:
            uniq.append(t)
    N = math.prod(moduli)
    group = dict(label or {"kind": "abelian", "moduli": moduli})
    if N == 1:
        return KazhdanBounds(2.0, 2.0, True, ("characters", "vacuous"), 1, len(uniq),
                             group=group, extra={"irreducible_min": 2.0})
    if not uniq:
        raise NotGeneratingError("generators are all trivial")
    G = np.array(uniq, dtype=np.int64)
    space = CharacterSpace(moduli, G)
    _check_generates(moduli, G)
    k = len(G)

    irr2, irr_hits = space.search(None, 4.0 + 1e-9, max_hits=1, shrink=True)
    irr_theta = irr_hits[0][1]
    uniform = np.full(k, 1.0 / k)
    uni2, uni_hits = space.search(uniform, 4.0 + 1e-9, max_hits=1, shrink=True)

    if uni2 >= irr2 - tol:
        # one character is simultaneously worst for every mixture
        lower2 = upper2 = irr2
        p, rounds = uniform, 0
        w_cols = [irr_theta]
        w = np.array([1.0])
        method = ("characters",)
    else:
        cols_theta = [irr_theta, uni_hits[0][1]]
        cols = np.array([space.costs(t) for t in cols_theta])
        for rounds in range(1, max_rounds + 1):
            p, t, w = _solve_master(cols)
            _, hits = space.search(p, t - tol * max(1.0, t), max_hits=8)
            new = [h[1] for h in hits if h[1] not in cols_theta]
            if not new:
                break
            cols_theta += new
            cols = np.vstack([cols, [space.costs(th) for th in new]])
        else:
            raise ToleranceError("column generation did not converge", None)
        # exact minimum of the primal objective over all characters
        lower2, _ = space.search(p, t + 1e-9, max_hits=1, shrink=True)
        lower2 = max(lower2, uni2)
        upper2 = float((w @ cols[: len(w)]).max())
        w_cols = cols_theta
        method = ("characters", "lp-duality")

    lower, upper = math.sqrt(max(lower2, 0.0)), math.sqrt(upper2)
    support = [(list(th), float(x)) for th, x in zip(w_cols, w) if x > 1e-12]
    return KazhdanBounds(
        lower, upper, upper - lower <= 1e-9, method, N, k, group=group,
        generators=[list(g) for g in uniq],
        extra={"irreducible_min": math.sqrt(irr2), "irreducible_theta": list(irr_theta),
               "uniform_lower": math.sqrt(max(uni2, 0.0)),
               "weights": [float(x) for x in p], "worst_mixture": support,
               "prop26_cap": abelian_upper_bound(N, k)})


def _check_generates(moduli, G):
    """The images generate iff no nontrivial character kills all of them."""
    space = CharacterSpace(moduli, G)
    _, hits = space.search(None, 1e-12, max_hits=1)
    if hits:
        raise NotGeneratingError(f"character {hits[0][1]} is trivial on every generator")


def cyclic_kappa(m: int) -> KazhdanBounds:
    return abelian_kazhdan_exact([m], [[1], [m - 1]], label={"kind": "cyclic", "m": m})


# --- spectral bounds on Cayley graphs ---------------------------------------


def _dense_matrix(perms: np.ndarray) -> np.ndarray:
    k, N = perms.shape
    A = np.zeros((N, N))
    rows = np.arange(N)
    for p in perms:
        np.add.at(A, (rows, p), 1.0 / k)
    return A


def _top_eigenpair(apply, N, dense_builder, tol, maxiter, dense_limit, engine, seed=0):
    """Largest eigenpair of a PSD operator given as a matvec (already shifted)."""
    if N <= dense_limit:
        M = dense_builder()
        vals, vecs = np.linalg.eigh((M + M.T) / 2)
        return float(vals[-1]), vecs[:, -1]
    rng = np.random.default_rng(seed)
    v0 = rng.standard_normal(N)
    if engine == "power":
        x = apply(v0)
        x /= np.linalg.norm(x)
        lam = 0.0
        for _ in range(int(maxiter)):
            y = apply(x)
            lam = float(x @ y)
            if np.linalg.norm(y - lam * x) <= tol:
                break
            x = y / np.linalg.norm(y)
        return lam, x
    from scipy.sparse.linalg import LinearOperator, eigsh

    op = LinearOperator((N, N), matvec=apply, dtype=np.float64)
    vals, vecs = eigsh(op, k=1, which="LA", v0=apply(v0), tol=tol * 1e-2,
                       maxiter=int(maxiter), ncv=40)
    return float(vals[0]), vecs[:, 0]


def spectral_bounds(graph: CayleyGraph, *, tol: float = 1e-10, maxiter: int = 100_000,
                    dense_limit: int = 4096, character_upper: float | None = None,
                    engine: str = "lanczos") -> KazhdanBounds:
    """Bounds from the averaging operator on the complement of constants."""
    G = graph.group
    perms = graph.perms
    k, N = perms.shape
    desc = G.describe()
    if N == 1:
        return KazhdanBounds(2.0, 2.0, True, ("vacuous",), 1, k, group=desc,
                             generators=list(G.labels))
    if not graph.is_connected():
        raise NotGeneratingError("Cayley graph is disconnected")

    def project(x):
        return x - x.mean()

    def apply(x):
        x = project(x)
        return project(_accel.average(x, perms)) + x

    def dense():
        A = _dense_matrix(perms) + np.eye(N)
        P = np.eye(N) - 1.0 / N
        return P @ A @ P

    lam, v = _top_eigenpair(apply, N, dense, tol, maxiter, dense_limit, engine)
    v = project(v)
    v /= np.linalg.norm(v)
    mu = lam - 1.0
    residual = float(np.linalg.norm(_accel.average(v, perms) - mu * v))
    if residual > tol:
        raise ToleranceError(f"eigen-residual {residual:.3e} exceeds {tol:.1e}", residual)
    mu = min(max(mu, -1.0), 1.0)
    lower = math.sqrt(max(2 * (1 - mu), 0.0))
    disp = float(_accel.displacements(v, perms).max())
    upper = min(disp, 2.0)
    method = ["spectral-gap", "eigenvector-displacement"]
    if character_upper is not None and character_upper < upper:
        upper = character_upper
        method.append("characters")
    return KazhdanBounds(lower, max(upper, lower), False, tuple(method), N, k, mu=mu,
                         residual=residual, group=desc, generators=list(G.labels))


def left_coset_labels(G: FiniteQuotientGroup, B: Sequence[int]) -> np.ndarray:
    """Label of the left coset xB of each element x (smallest index in it)."""
    lab = np.arange(G.size)
    for b in B:
        prods = np.matmul(G.elements, G.elements[b]) % G.q
        lab = np.minimum(lab, G.index_of(prods))
    return lab


def is_normal(G: FiniteQuotientGroup, B: Sequence[int]) -> bool:
    Bset = set(int(b) for b in B)
    for g in G.generators:
        ginv = G.inverse_index(g)
        for b in Bset:
            if G.multiply(G.multiply(ginv, b), g) not in Bset:
                return False
    return True


def relative_spectral_bound(G: FiniteQuotientGroup, B: Sequence[int], *,
                            tol: float = 1e-10, maxiter: int = 100_000,
                            dense_limit: int = 4096, m: int | None = None) -> KazhdanBounds:
    """Spectral gap of the averaging operator on functions orthogonal to B-invariants."""
    graph = G.cayley_graph()
    perms = graph.perms
    k, N = perms.shape
    B = sorted(set(int(b) for b in B))
    lab = left_coset_labels(G, B)
    _, inv = np.unique(lab, return_inverse=True)
    n_cosets = int(inv.max()) + 1
    dim_h0 = N - n_cosets
    m = G.params.get("m") if m is None else m
    extra = {"dim_H0": dim_h0, "subgroup_order": len(B), "normal": is_normal(G, B),
             "eps_reference": ReferenceCurves.eps_m(m) if m else None,
             "rel_half_reference": ReferenceCurves.rel_half(m) if m else None}
    if dim_h0 == 0:
        return KazhdanBounds(2.0, 2.0, True, ("vacuous",), N, k, group=G.describe(),
                             generators=list(G.labels),
                             extra={**extra, "note": "no representations to constrain"})
    if not graph.is_connected():
        raise NotGeneratingError("Cayley graph is disconnected")
    counts = np.bincount(inv, minlength=n_cosets).astype(float)

    def project(x):
        return x - (np.bincount(inv, weights=x, minlength=n_cosets) / counts)[inv]

    def apply(x):
        x = project(x)
        return project(_accel.average(x, perms)) + x

    def dense():
        P = np.eye(N) - (inv[:, None] == inv[None, :]) / counts[inv][:, None]
        return P @ (_dense_matrix(perms) + np.eye(N)) @ P

    lam, v = _top_eigenpair(apply, N, dense, tol, maxiter, dense_limit, "lanczos")
    v = project(v)
    v /= np.linalg.norm(v)
    mu = lam - 1.0
    Av = project(_accel.average(v, perms))
    residual = float(np.linalg.norm(Av - mu * v))
    if residual > tol:
        raise ToleranceError(f"eigen-residual {residual:.3e} exceeds {tol:.1e}", residual)
    mu = min(max(mu, -1.0), 1.0)
    lower = math.sqrt(max(2 * (1 - mu), 0.0))
    if extra["normal"]:
        # H0 is then a subrepresentation without B-invariant vectors
        upper = min(float(_accel.displacements(v, perms).max()), 2.0)
        method = ("spectral-gap", "eigenvector-displacement")
    else:
        upper = 2.0
        method = ("spectral-gap",)
    return KazhdanBounds(lower, max(upper, lower), False, method, N, k, mu=mu,
                         residual=residual, group=G.describe(), generators=list(G.labels),
                         extra=extra)


# --- congruence quotients ---------------------------------------------------


def congruence_generator_coords(n: int, m: int) -> np.ndarray:
    """Images of Sigma_n(m) in Gamma_n(m)/Gamma_n(m^2) = C_m^(n^2-1)."""
    mats = np.array(symbol_matrices(sigma_symbols(n, m), n)) % (m * m)
    return congruence_coordinates(mats, m)


def congruence_kappa(n: int, m: int) -> KazhdanBounds:
    """Exact kappa of Gamma_n(m)/Gamma_n(m^2) with respect to the image of Sigma_n(m)."""
    coords = congruence_generator_coords(n, m)
    return abelian_kazhdan_exact([m] * (n * n - 1), coords,
                                 label={"kind": "CongruenceQuotient", "n": n, "m": m,
                                        "order": m ** (n * n - 1)})


@dataclass
class ProjectionWitness:
    n: int
    m: int
    value: float
    theta: tuple[int, ...]
    images: tuple[int, ...]

    @property
    def stated_bound(self) -> float:
        """The cruder constant 2/m, which 2 sin(pi/m) exceeds for every m > 1."""
        return 2 / self.m

    @property
    def exceeds_stated(self) -> bool:
        return self.value > self.stated_bound

    def verify(self) -> bool:
        nonzero = [x for x in self.images if x]
        return bool(nonzero) and all(x in (-1, 1) for x in nonzero)


def projection_upper_bound(n: int, m: int) -> float:
    """2 sin(pi/m): the displacement of the worst generator under a map onto C_m."""
    if n < 3 or m < 2:
        raise ValueError("need n >= 3 and m >= 2")
    return 2 * math.sin(math.pi / m)


def projection_witness(n: int, m: int) -> ProjectionWitness:
    """A homomorphism Gamma_n(m) -> C_m sending every generator into {-1, 0, 1}.

    It is found on the abelianized quotient Gamma_n(m)/Gamma_n(m^2), through
    which every map onto C_m factors.
    """
    coords = congruence_generator_coords(n, m)
    space = CharacterSpace([m] * (n * n - 1), coords)
    val, hits = space.search(None, 4.0 + 1e-9, max_hits=1, shrink=True)
    theta = hits[0][1]
    ph = space.phases(theta)
    images = tuple(int(x) if x <= m // 2 else int(x) - m for x in ph)
    return ProjectionWitness(n, m, math.sqrt(val), theta, images)


# --- non-uniformity demo ----------------------------------------------------


def is_prime(p: int) -> bool:
    if p < 2:
        return False
    if p % 2 == 0:
        return p == 2
    d = 3
    while d * d <= p:
        if p % d == 0:
            return False
        d += 2
    return True


def curve(p: int, k: int) -> float:
    return abelian_upper_bound(p, k)


def minimal_prime(eps: float, k: int) -> int:
    """Least prime p with 2 pi / (p^(1/k) - 1) < eps."""
    p = max(2, int(math.floor((1 + 2 * math.pi / eps) ** k)) - 2)
    while p > 2 and curve(p, k) < eps:
        p -= 1
    while not (is_prime(p) and curve(p, k) < eps):
        p += 1
    return p


def previous_prime(p: int) -> int | None:
    q = p - 1
    while q >= 2 and not is_prime(q):
        q -= 1
    return q if q >= 2 else None


@dataclass
class NonuniformReport:
    p: int
    k: int
    curve: float
    trials: list[dict]
    all_below: bool
    target_eps: float | None = None
    minimal_p: int | None = None
    previous_prime: int | None = None
    previous_curve: float | None = None
    seed: int = 0

    def to_dict(self) -> dict:
        d = asdict(self)
        d["schema"] = SCHEMA
        return d


def nonuniform_demo(k: int, *, p: int | None = None, eps: float | None = None,
                    trials: int = 3, seed: int = 0) -> NonuniformReport:
    """Exact kappa of C_p under random k-element generating sets, against the curve."""
    if k < 1:
        raise ValueError("k must be positive")
    minimal = prev = prev_curve = None
    if eps is not None:
        minimal = minimal_prime(eps, k)
        prev = previous_prime(minimal)
        prev_curve = curve(prev, k) if prev else None
    if p is None:
        p = minimal if minimal is not None else 2
    if not is_prime(p):
        raise ValueError(f"{p} is not prime")
    rng = np.random.default_rng(seed)
    bound = curve(p, k)
    rows = []
    for _ in range(trials):
        gens = sorted(set(int(x) for x in rng.integers(1, p, size=k))) if p > 2 else [1]
        res = abelian_kazhdan_exact([p], [[g] for g in gens])
        rows.append({"generators": gens, "kappa": res.lower, "upper": res.upper,
                     "below_curve": res.upper <= bound + 1e-12})
    return NonuniformReport(p, k, bound, rows, all(r["below_curve"] for r in rows),
                            eps, minimal, prev, prev_curve, seed)


# --- sweeps -----------------------------------------------------------------

SCAN_COLUMNS = ("n", "m", "order", "kappa", "kappa_upper", "irreducible_min",
                "spectral_lower", "projection_upper", "eps_m", "abelian_cap",
                "sl_lower", "corollary_shape", "status")


def scan_row(n: int, m: int) -> dict:
    row = {"n": n, "m": m, "order": m ** (n * n - 1)}
    try:
        res = congruence_kappa(n, m)
    except Exception as exc:  # rows record failures instead of aborting the sweep
        row.update({c: "" for c in SCAN_COLUMNS if c not in row})
        row["status"] = type(exc).__name__
        return row
    row.update({
        "kappa": res.lower, "kappa_upper": res.upper,
        "irreducible_min": res.extra["irreducible_min"],
        "spectral_lower": res.extra["uniform_lower"],
        "projection_upper": projection_upper_bound(n, m) if m >= 2 else 2.0,
        "eps_m": ReferenceCurves.eps_m(m),
        "abelian_cap": res.extra["prop26_cap"],
        "sl_lower": ReferenceCurves.sl_lower(n),
        "corollary_shape": ReferenceCurves.corollary_shape(n, m),
        "status": "exact" if res.exact else "bounds"})
    return row


def loglog_slope(ms: Sequence[float], values: Sequence[float]) -> float | None:
    pts = [(math.log(a), math.log(b)) for a, b in zip(ms, values) if a > 0 and b and b > 0]
    if len(pts) < 2:
        return None
    x, y = np.array(pts).T
    return float(np.polyfit(x, y, 1)[0])


__all__ = [
    "KazhdanBounds", "ReferenceCurves", "CharacterSpace", "abelian_kazhdan_exact",
    "abelian_upper_bound", "cyclic_kappa", "spectral_bounds", "relative_spectral_bound",
    "congruence_kappa", "congruence_generator_coords", "projection_upper_bound",
    "projection_witness", "ProjectionWitness", "nonuniform_demo", "NonuniformReport",
    "minimal_prime", "is_prime", "scan_row", "loglog_slope", "SCAN_COLUMNS",
    "left_coset_labels", "is_normal",
]
