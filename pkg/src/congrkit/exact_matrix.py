"""Exact integer matrices, elementary generator symbols and words.

Everything here uses Python integers; no floating point is involved.
Positions in :class:`GenSymbol` are 1-based to match the usual X_ij notation,
all list indexing underneath is 0-based.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from fractions import Fraction
from functools import lru_cache
from typing import Iterable, Sequence

import numpy as np

from .errors import (
    InvalidDimensionError,
    InvalidPositionsError,
    InvalidWordError,
    NotUnimodularError,
    ParseError,
)

ELEMENTARY = "E"
CONJ_ELEMENTARY = "C"


class IntMatrix:
    """Immutable square matrix of arbitrary-precision integers."""

    __slots__ = ("_rows", "_hash")

    def __init__(self, rows: Iterable[Iterable[int]]):
        rows = tuple(tuple(int(x) for x in r) for r in rows)
        n = len(rows)
        if n == 0 or any(len(r) != n for r in rows):
            raise InvalidDimensionError("matrix must be square and non-empty")
        self._rows = rows
        self._hash = None

    @classmethod
    def identity(cls, n: int) -> "IntMatrix":
        return cls(identity_rows(n))

    @property
    def n(self) -> int:
        return len(self._rows)

    @property
    def rows(self) -> tuple[tuple[int, ...], ...]:
        return self._rows

    def __getitem__(self, ij):
        i, j = ij
        return self._rows[i][j]

    def tolist(self) -> list[list[int]]:
        return [list(r) for r in self._rows]

    def __eq__(self, other):
        if not isinstance(other, IntMatrix):
            return NotImplemented
        return self._rows == other._rows

    def __hash__(self):
        if self._hash is None:
            self._hash = hash(self._rows)
        return self._hash

    def __repr__(self):
        return f"IntMatrix({self.tolist()!r})"

    def __matmul__(self, other: "IntMatrix") -> "IntMatrix":
        if not isinstance(other, IntMatrix):
            return NotImplemented
        if other.n != self.n:
            raise InvalidDimensionError("dimension mismatch in product")
        return IntMatrix(mat_mul(self._rows, other._rows))

    def transpose(self) -> "IntMatrix":
        return IntMatrix(zip(*self._rows))

    def det(self) -> int:
        return bareiss_det(self._rows)

    def inverse(self) -> "IntMatrix":
        """Exact inverse; requires determinant +-1."""
        d = self.det()
        if d not in (1, -1):
            raise NotUnimodularError(f"determinant {d} is not a unit in Z")
        inv = fraction_inverse(self._rows)
        return IntMatrix([[int(x) for x in r] for r in inv])

    def is_identity(self) -> bool:
        return all(
            x == (1 if i == j else 0)
            for i, r in enumerate(self._rows)
            for j, x in enumerate(r)
        )

    def mod(self, q: int) -> "IntMatrix":
        return IntMatrix([[x % q for x in r] for r in self._rows])

    def block(self, k: int) -> "IntMatrix":
        """Top-left k x k block."""
        return IntMatrix([r[:k] for r in self._rows[:k]])

    def embed(self, n: int) -> "IntMatrix":
        """Embed into the top-left corner of the n x n identity."""
        k = self.n
        if n < k:
            raise InvalidDimensionError("cannot embed into a smaller dimension")
        rows = identity_rows(n)
        for i in range(k):
            rows[i][:k] = self._rows[i]
        return IntMatrix(rows)

    def is_embedded_from(self, k: int) -> bool:
        """True when rows/columns k.. agree with the identity."""
        n = self.n
        for i in range(n):
            for j in range(n):
                if (i >= k or j >= k) and self._rows[i][j] != (1 if i == j else 0):
                    return False
        return True

    def to_text(self) -> str:
        lines = [str(self.n)]
        lines += [" ".join(str(x) for x in r) for r in self._rows]
        return "\n".join(lines) + "\n"

    @classmethod
    def from_text(cls, text: str) -> "IntMatrix":
        lines = [ln for ln in text.strip().splitlines() if ln.strip()]
        try:
            n = int(lines[0])
            rows = [[int(tok) for tok in ln.split()] for ln in lines[1 : n + 1]]
        except (ValueError, IndexError) as exc:
            raise ParseError(f"malformed matrix text: {exc}") from exc
        if n < 1 or len(rows) != n or any(len(r) != n for r in rows):
            raise ParseError("matrix text does not contain an n x n block")
        return cls(rows)


def identity_rows(n: int) -> list[list[int]]:
    return [[1 if i == j else 0 for j in range(n)] for i in range(n)]


def mat_mul(a: Sequence[Sequence[int]], b: Sequence[Sequence[int]]) -> list[list[int]]:
    bt = list(zip(*b))
    return [[sum(x * y for x, y in zip(row, col)) for col in bt] for row in a]


def bareiss_det(rows: Sequence[Sequence[int]]) -> int:
    """Fraction-free Gaussian elimination determinant."""
    a = [list(r) for r in rows]
    n = len(a)
    sign = 1
    prev = 1
    for k in range(n - 1):
        if a[k][k] == 0:
            swap = next((i for i in range(k + 1, n) if a[i][k] != 0), None)
            if swap is None:
                return 0
            a[k], a[swap] = a[swap], a[k]
            sign = -sign
        akk = a[k][k]
        for i in range(k + 1, n):
            aik = a[i][k]
            ri, rk = a[i], a[k]
            for j in range(k + 1, n):
                ri[j] = (ri[j] * akk - aik * rk[j]) // prev
        prev = akk
    return sign * a[n - 1][n - 1]


def fraction_inverse(rows: Sequence[Sequence[int]]) -> list[list[Fraction]]:
    n = len(rows)
    a = [[Fraction(x) for x in r] + [Fraction(int(i == j)) for j in range(n)]
         for i, r in enumerate(rows)]
    for c in range(n):
        p = next((r for r in range(c, n) if a[r][c] != 0), None)
        if p is None:
            raise NotUnimodularError("singular matrix")
        a[c], a[p] = a[p], a[c]
        piv = a[c][c]
        a[c] = [x / piv for x in a[c]]
        for r in range(n):
            if r != c and a[r][c] != 0:
                f = a[r][c]
                a[r] = [x - f * y for x, y in zip(a[r], a[c])]
    inv = [r[n:] for r in a]
    if any(x.denominator != 1 for r in inv for x in r):
        raise NotUnimodularError("inverse is not integral")
    return inv


# --- generators -----------------------------------------------------------


def make_y(n: int) -> IntMatrix:
    """Lower bidiagonal matrix: ones on the diagonal, -1 just below it."""
    return IntMatrix(_y_rows(n))


@lru_cache(maxsize=None)
def _y_rows(n: int) -> tuple[tuple[int, ...], ...]:
    if n < 2:
        raise InvalidDimensionError(f"y_n needs n >= 2, got {n}")
    rows = identity_rows(n)
    for i in range(n - 1):
        rows[i + 1][i] = -1
    return tuple(tuple(r) for r in rows)


@lru_cache(maxsize=None)
def _y_inv_rows(n: int) -> tuple[tuple[int, ...], ...]:
    # inverse of I - N is the lower triangular all-ones matrix
    return tuple(tuple(1 if j <= i else 0 for j in range(n)) for i in range(n))


def elementary(n: int, i: int, j: int, t: int) -> IntMatrix:
    """X_ij(t) with 1-based positions."""
    _check_positions(n, i, j)
    rows = identity_rows(n)
    rows[i - 1][j - 1] = t
    return IntMatrix(rows)


def _check_positions(n, *pos):
    if any(p < 1 or p > n for p in pos) or len(set(pos)) != len(pos):
        raise InvalidPositionsError(f"positions {pos} invalid for n={n}")


@dataclass(frozen=True)
class GenSymbol:
    """One letter of the decomposition alphabet.

    ``kind == "E"`` is X_ij(t); ``kind == "C"`` is y_k^{-1} X_ij(t) y_k with
    y_k sitting in the top-left k x k block.
    """

    kind: str
    i: int
    j: int
    t: int
    level: int = 1
    conj_dim: int = 0

    def __post_init__(self):
        if self.kind not in (ELEMENTARY, CONJ_ELEMENTARY):
            raise InvalidWordError(f"unknown symbol kind {self.kind!r}")
        if self.i == self.j or self.i < 1 or self.j < 1:
            raise InvalidPositionsError(f"bad positions ({self.i}, {self.j})")
        if self.t == 0:
            raise InvalidWordError("symbol value must be non-zero")
        if self.level < 1 or self.t % self.level:
            raise InvalidWordError(f"value {self.t} not divisible by level {self.level}")
        if self.kind == CONJ_ELEMENTARY:
            if self.conj_dim < 2 or max(self.i, self.j) > self.conj_dim:
                raise InvalidWordError("conjugated symbol outside its y_k block")
        elif self.conj_dim:
            raise InvalidWordError("elementary symbols carry no conjugator")

    @property
    def max_index(self) -> int:
        return max(self.i, self.j, self.conj_dim)

    def inverse(self) -> "GenSymbol":
        return GenSymbol(self.kind, self.i, self.j, -self.t, self.level, self.conj_dim)

    def rank_one(self, n: int) -> tuple[list[int], list[int]]:
        """Vectors u, v with symbol matrix = I + t * u v^T."""
        if self.max_index > n:
            raise InvalidWordError(f"symbol {self} does not fit in dimension {n}")
        u = [0] * n
        v = [0] * n
        if self.kind == ELEMENTARY:
            u[self.i - 1] = 1
            v[self.j - 1] = 1
        else:
            k = self.conj_dim
            yinv, y = _y_inv_rows(k), _y_rows(k)
            for r in range(k):
                u[r] = yinv[r][self.i - 1]
                v[r] = y[self.j - 1][r]
        return u, v

    def matrix(self, n: int) -> IntMatrix:
        u, v = self.rank_one(n)
        rows = identity_rows(n)
        for r in range(n):
            if u[r]:
                for c in range(n):
                    rows[r][c] += self.t * u[r] * v[c]
        return IntMatrix(rows)

    def to_line(self) -> str:
        if self.kind == ELEMENTARY:
            return f"E {self.i} {self.j} {self.t}"
        return f"C {self.conj_dim} {self.i} {self.j} {self.t}"

    @classmethod
    def from_line(cls, line: str, level: int = 1) -> "GenSymbol":
        tok = line.split()
        try:
            if tok[0] == ELEMENTARY and len(tok) == 4:
                return cls(ELEMENTARY, int(tok[1]), int(tok[2]), int(tok[3]), level)
            if tok[0] == CONJ_ELEMENTARY and len(tok) == 5:
                return cls(CONJ_ELEMENTARY, int(tok[2]), int(tok[3]), int(tok[4]),
                           level, int(tok[1]))
        except ValueError as exc:
            raise ParseError(f"bad symbol line {line!r}") from exc
        raise ParseError(f"bad symbol line {line!r}")


def E(i: int, j: int, t: int, level: int = 1) -> GenSymbol:
    return GenSymbol(ELEMENTARY, i, j, t, level)


def C(k: int, i: int, j: int, t: int, level: int = 1) -> GenSymbol:
    return GenSymbol(CONJ_ELEMENTARY, i, j, t, level, k)


@dataclass(frozen=True)
class Word:
    n: int
    symbols: tuple[GenSymbol, ...] = field(default_factory=tuple)

    def __post_init__(self):
        object.__setattr__(self, "symbols", tuple(self.symbols))
        if self.n < 2:
            raise InvalidDimensionError("word dimension must be >= 2")
        for s in self.symbols:
            if s.max_index > self.n:
                raise InvalidWordError(f"symbol {s.to_line()} exceeds dimension {self.n}")

    def __len__(self):
        return len(self.symbols)

    def __add__(self, other: "Word") -> "Word":
        if other.n != self.n:
            raise InvalidWordError("cannot concatenate words of different dimension")
        return Word(self.n, self.symbols + other.symbols)

    def inverse(self) -> "Word":
        return Word(self.n, tuple(s.inverse() for s in reversed(self.symbols)))

    def embed(self, n: int) -> "Word":
        return Word(n, self.symbols)

    def counts(self) -> dict[str, int]:
        out = {ELEMENTARY: 0, CONJ_ELEMENTARY: 0}
        for s in self.symbols:
            out[s.kind] += 1
        return out

    def to_text(self) -> str:
        return "".join(s.to_line() + "\n" for s in self.symbols)

    @classmethod
    def from_text(cls, n: int, text: str, level: int = 1) -> "Word":
        syms = [GenSymbol.from_line(ln, level) for ln in text.splitlines() if ln.strip()]
        return cls(n, syms)


def eval_word(w: Word) -> IntMatrix:
    """Left-to-right product of the symbol matrices."""
    n = w.n
    m = identity_rows(n)
    for s in w.symbols:
        _right_apply(m, s, n)
    return IntMatrix(m)


def _right_apply(m: list[list[int]], s: GenSymbol, n: int) -> None:
    # M <- M (I + t u v^T) = M + t (M u) v^T
    u, v = s.rank_one(n)
    t = s.t
    nzu = [(c, uc) for c, uc in enumerate(u) if uc]
    nzv = [(c, vc) for c, vc in enumerate(v) if vc]
    for row in m:
        mu = sum(row[c] * uc for c, uc in nzu)
        if mu:
            f = t * mu
            for c, vc in nzv:
                row[c] += f * vc


def is_in_gamma(a: IntMatrix, m: int) -> bool:
    """Membership in the principal congruence subgroup of level m."""
    if m < 1:
        raise ValueError("level must be a positive integer")
    if a.det() != 1:
        raise NotUnimodularError("matrix is not in SL_n(Z)")
    return all(
        (x - (1 if i == j else 0)) % m == 0
        for i, r in enumerate(a.rows)
        for j, x in enumerate(r)
    )


def commutator(a: IntMatrix, b: IntMatrix) -> IntMatrix:
    """[a, b] = a b a^-1 b^-1."""
    return a @ b @ a.inverse() @ b.inverse()


def steinberg_check(i: int, k: int, j: int, s: int, t: int, n: int | None = None) -> bool:
    """Check [X_ik(s), X_kj(t)] == X_ij(st) by exact multiplication."""
    if n is None:
        n = max(3, i, j, k)
    _check_positions(n, i, k, j)
    if s == 0 or t == 0:
        raise InvalidWordError("zero-valued elementary symbols are excluded")
    lhs = commutator(elementary(n, i, k, s), elementary(n, k, j, t))
    return lhs == elementary(n, i, j, s * t)


# --- generating sets and random sampling ------------------------------------


def sigma_symbols(n: int, m: int, conj_dim: int | None = None) -> list[GenSymbol]:
    """Symmetric generating letters X_ij(+-m) and their y-conjugates."""
    k = n if conj_dim is None else conj_dim
    out = []
    for i in range(1, k + 1):
        for j in range(1, k + 1):
            if i != j:
                for sgn in (1, -1):
                    out.append(E(i, j, sgn * m, m))
    for i in range(1, k + 1):
        for j in range(1, k + 1):
            if i != j:
                for sgn in (1, -1):
                    out.append(C(k, i, j, sgn * m, m))
    return out


def elementary_symbols(n: int, m: int) -> list[GenSymbol]:
    return [E(i, j, sgn * m, m) for i in range(1, n + 1) for j in range(1, n + 1)
            if i != j for sgn in (1, -1)]


def random_word(n: int, m: int, length: int, rng: np.random.Generator,
                alphabet: Sequence[GenSymbol] | None = None) -> Word:
    letters = sigma_symbols(n, m) if alphabet is None else list(alphabet)
    idx = rng.integers(0, len(letters), size=length)
    return Word(n, [letters[int(k)] for k in idx])
