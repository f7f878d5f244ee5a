"""Bounded-word decomposition of congruence-subgroup elements.

``decompose_full`` peels one level at a time: a coset word fixes the element
modulo m^2, then ``corner_reduce`` clears the last row and column with at
most 3k-2 level-m elementary letters, leaving an element of the next smaller
congruence subgroup.  The recursion stops at a 2 x 2 residual.
"""

from __future__ import annotations

import hashlib
from dataclasses import dataclass, field
from functools import lru_cache
from math import gcd
from typing import Sequence

from .errors import InternalInvariantError, InvalidDimensionError, ParseError, WrongLevelError
from .exact_matrix import (
    CONJ_ELEMENTARY,
    ELEMENTARY,
    C,
    E,
    GenSymbol,
    IntMatrix,
    Word,
    eval_word,
    is_in_gamma,
)
from .stable_range import prime_set_multiplier


def word_budget(n: int) -> int:
    """Length budget for a full decomposition in dimension n."""
    return sum((k * k - 1) + (3 * k - 2) for k in range(3, n + 1))


# --- Smith normal form and linear congruences --------------------------------


@dataclass(frozen=True)
class SmithForm:
    """U @ M @ V == D with U, V unimodular and D diagonal (d_1 | d_2 | ...)."""

    U: tuple[tuple[int, ...], ...]
    V: tuple[tuple[int, ...], ...]
    diag: tuple[int, ...]
    shape: tuple[int, int]


def smith_normal_form(M: Sequence[Sequence[int]]) -> SmithForm:
    rows = len(M)
    cols = len(M[0]) if rows else 0
    A = [list(map(int, r)) for r in M]
    U = [[int(i == j) for j in range(rows)] for i in range(rows)]
    V = [[int(i == j) for j in range(cols)] for i in range(cols)]

    def swap_rows(i, j):
        A[i], A[j] = A[j], A[i]
        U[i], U[j] = U[j], U[i]

    def swap_cols(i, j):
        for r in A:
            r[i], r[j] = r[j], r[i]
        for r in V:
            r[i], r[j] = r[j], r[i]

    def add_row(dst, src, f):  # row_dst += f * row_src
        A[dst] = [x + f * y for x, y in zip(A[dst], A[src])]
        U[dst] = [x + f * y for x, y in zip(U[dst], U[src])]

    def add_col(dst, src, f):  # col_dst += f * col_src
        for r in A:
            r[dst] += f * r[src]
        for r in V:
            r[dst] += f * r[src]

    t = 0
    while t < min(rows, cols):
        nz = [(abs(A[i][j]), i, j) for i in range(t, rows) for j in range(t, cols) if A[i][j]]
        if not nz:
            break
        _, pi, pj = min(nz)
        swap_rows(t, pi)
        swap_cols(t, pj)
        while True:
            done = True
            for i in range(t + 1, rows):
                if A[i][t]:
                    add_row(i, t, -(A[i][t] // A[t][t]))
                    if A[i][t]:
                        swap_rows(t, i)
                        done = False
            for j in range(t + 1, cols):
                if A[t][j]:
                    add_col(j, t, -(A[t][j] // A[t][t]))
                    if A[t][j]:
                        swap_cols(t, j)
                        done = False
            if not done:
                continue
            # divisibility d_t | every remaining entry
            bad = next(((i, j) for i in range(t + 1, rows) for j in range(t + 1, cols)
                        if A[i][j] % A[t][t]), None)
            if bad is None:
                break
            add_row(t, bad[0], 1)
        if A[t][t] < 0:
            A[t] = [-x for x in A[t]]
            U[t] = [-x for x in U[t]]
        t += 1
    diag = tuple(A[i][i] for i in range(min(rows, cols)))
    return SmithForm(tuple(map(tuple, U)), tuple(map(tuple, V)), diag, (rows, cols))


@lru_cache(maxsize=64)
def _cached_snf(M: tuple[tuple[int, ...], ...]) -> SmithForm:
    return smith_normal_form(M)


def solve_mod(M: Sequence[Sequence[int]], b: Sequence[int], m: int) -> list[int] | None:
    """x with M x == b (mod m), or None when the congruence has no solution."""
    if m < 1:
        raise ValueError("modulus must be positive")
    key = tuple(tuple(int(x) for x in r) for r in M)
    rows = len(key)
    if len(b) != rows:
        raise InvalidDimensionError("right-hand side has the wrong length")
    cols = len(key[0]) if rows else 0
    snf = _cached_snf(key)
    c = [sum(u * bi for u, bi in zip(urow, b)) % m for urow in snf.U]
    z = [0] * cols
    for i in range(rows):
        d = snf.diag[i] if i < len(snf.diag) else 0
        g = gcd(d, m)
        if c[i] % g:
            return None
        if d % m == 0:
            continue
        mg = m // g
        z[i] = (c[i] // g) * pow(d // g, -1, mg) % mg if mg > 1 else 0
    x = [sum(v * zj for v, zj in zip(vrow, z)) % m for vrow in snf.V]
    return x


# --- coset words ----------------------------------------------------------


def _coset_letters(k: int) -> list[tuple[str, int, int]]:
    """Letters whose images form a basis of the level-m abelian quotient."""
    out = [(ELEMENTARY, i, j) for i in range(1, k + 1) for j in range(1, k + 1) if i != j]
    out += [(CONJ_ELEMENTARY, i, i + 1) for i in range(1, k)]
    return out


@lru_cache(maxsize=None)
def _coset_system(k: int) -> tuple[tuple[int, ...], ...]:
    # column g = entries of (symbol(1) - I), flattened row-major
    cols = []
    for kind, i, j in _coset_letters(k):
        sym = GenSymbol(kind, i, j, 1, 1, k if kind == CONJ_ELEMENTARY else 0)
        mat = sym.matrix(k)
        cols.append([mat[r, c] - (r == c) for r in range(k) for c in range(k)])
    return tuple(zip(*cols))


def _sym_rep(c: int, m: int) -> int:
    c %= m
    return c - m if c > m // 2 else c


def abelian_coset_word(A: IntMatrix, m: int) -> Word:
    """Word of at most k^2 - 1 letters agreeing with A modulo m^2."""
    k = A.n
    if k < 2:
        raise InvalidDimensionError("need k >= 2")
    if not is_in_gamma(A, m):
        raise WrongLevelError(f"matrix is not congruent to I mod {m}")
    if m == 1:
        return Word(k)
    b = [(A[r, c] - (r == c)) // m % m for r in range(k) for c in range(k)]
    coeffs = solve_mod(_coset_system(k), b, m)
    if coeffs is None:
        raise InternalInvariantError("coset system unsolvable")
    syms = []
    for (kind, i, j), c in zip(_coset_letters(k), coeffs):
        c = _sym_rep(c, m)
        if c:
            syms.append(E(i, j, c * m, m) if kind == ELEMENTARY else C(k, i, j, c * m, m))
    w = Word(k, syms)
    if eval_word(w).mod(m * m) != A.mod(m * m):
        raise InternalInvariantError("coset word does not match modulo m^2")
    return w


# --- corner reduction -------------------------------------------------------


def _ext_gcd(a: int, b: int) -> tuple[int, int, int]:
    x0, x1, y0, y1 = 1, 0, 0, 1
    while b:
        q, a, b = a // b, b, a % b
        x0, x1 = x1, x0 - q * x1
        y0, y1 = y1, y0 - q * y1
    if a < 0:
        a, x0, y0 = -a, -x0, -y0
    return a, x0, y0


def corner_reduce(A: IntMatrix, m: int) -> tuple[Word, IntMatrix]:
    """Split A in Gamma_n(m^2) as eval(w) @ embed(C) with C in Gamma_{n-1}(m).

    w uses at most 3n - 2 level-m elementary letters.
    """
    n = A.n
    if n < 3:
        raise InvalidDimensionError("corner reduction needs n >= 3")
    if not is_in_gamma(A, m * m):
        raise WrongLevelError(f"matrix is not congruent to I mod {m * m}")
    rows = [list(r) for r in A.rows]
    ops: list[tuple[int, int, int]] = []  # (dst, src, f): row_dst += f * row_src

    def row_op(dst, src, f):
        if f:
            rows[dst] = [x + f * y for x, y in zip(rows[dst], rows[src])]
            ops.append((dst, src, f))

    last = n - 1
    col = [r[last] for r in rows]
    if col[last] != 1:
        a_n = (col[last] - 1) // (m * m)
        nz = [i for i in range(last) if col[i]]
        if len(nz) >= 2:
            p1, p2 = nz[0], nz[1]
            others = [i for i in range(last) if i not in (p1, p2)]
            head = col[p1]
            for idx, q in enumerate(others):
                middle = [col[v] for v in others[idx + 1:]] + [col[p2], col[last]]
                x = prime_set_multiplier(head, middle, col[q], radical=False, minimal=True)
                row_op(p1, q, x * m)
                head += x * m * col[q]
            x = prime_set_multiplier(head, [col[p2]], col[last], radical=False)
            row_op(p1, last, x * m)
        elif len(nz) == 1:
            p1, p2 = nz[0], (1 if nz[0] == 0 else 0)
            row_op(p2, last, m)
        else:
            p1, p2 = 0, None
            row_op(p1, last, m)
        e1 = rows[p1][last]
        e2 = rows[p2][last] if p2 is not None else 0
        g, y1, y2 = _ext_gcd(e1, e2)
        if g != m:
            raise InternalInvariantError(f"corner gcd {g} != {m}")
        row_op(last, p1, -a_n * m * y1)
        if p2 is not None:
            row_op(last, p2, -a_n * m * y2)
        if rows[last][last] != 1:
            raise InternalInvariantError("corner entry did not become 1")
    for i in range(last):
        row_op(i, last, -rows[i][last])
    # rows now = [[Cm, 0], [r, 1]] = (prod_j X_nj(u_j)) @ embed(Cm) with u = r Cm^-1
    Cm = IntMatrix([r[:last] for r in rows[:last]])
    r_vec = rows[last][:last]
    Cinv = Cm.inverse()
    u = [sum(r_vec[i] * Cinv[i, j] for i in range(last)) for j in range(last)]
    # L A = rows with L = op_last ... op_first, so A = op_first^-1 ... op_last^-1 rows
    syms = [E(dst + 1, src + 1, -f, m) for dst, src, f in ops]
    syms += [E(n, j + 1, uj, m) for j, uj in enumerate(u) if uj]
    w = Word(n, syms)
    if len(w) > 3 * n - 2:
        raise InternalInvariantError(f"corner word length {len(w)} exceeds {3 * n - 2}")
    if eval_word(w) @ Cm.embed(n) != A:
        raise InternalInvariantError("corner reduction does not reconstruct its input")
    if not is_in_gamma(Cm, m):
        raise InternalInvariantError("corner residual left the level-m subgroup")
    return w, Cm


# --- full recursion ---------------------------------------------------------


@dataclass(frozen=True)
class Decomposition:
    input: IntMatrix
    word: Word
    residual: IntMatrix
    m: int
    level_lengths: tuple[tuple[int, int, int], ...] = field(default=())

    @property
    def n(self) -> int:
        return self.input.n

    @property
    def budget(self) -> int:
        return word_budget(self.n)

    def counts(self) -> dict[str, int]:
        return self.word.counts()

    def reconstruct(self) -> IntMatrix:
        return eval_word(self.word) @ self.residual.embed(self.n)

    def check(self) -> bool:
        return (
            self.reconstruct() == self.input
            and self.residual.n == 2
            and is_in_gamma(self.residual, self.m)
            and len(self.word) <= self.budget
        )


def decompose_full(A: IntMatrix, m: int) -> Decomposition:
    """Word over level-m letters times an embedded 2 x 2 residual in Gamma_2(m)."""
    n = A.n
    if n < 3:
        raise InvalidDimensionError("decomposition needs n >= 3")
    if not is_in_gamma(A, m):
        raise WrongLevelError(f"matrix is not congruent to I mod {m}")
    syms: list[GenSymbol] = []
    levels = []
    cur = A
    for k in range(n, 2, -1):
        if cur.is_embedded_from(k - 1):
            cur = cur.block(k - 1)
            levels.append((k, 0, 0))
            continue
        coset = abelian_coset_word(cur, m)
        rest = eval_word(coset.inverse()) @ cur
        corner, cur = corner_reduce(rest, m)
        syms.extend(coset.symbols)
        syms.extend(corner.symbols)
        levels.append((k, len(coset), len(corner)))
    dec = Decomposition(A, Word(n, syms), cur, m, tuple(levels))
    if dec.reconstruct() != A:
        raise InternalInvariantError("decomposition does not reconstruct its input")
    return dec


# --- greedy residual reduction ----------------------------------------------


@dataclass(frozen=True)
class GreedyResult:
    word: Word
    success: bool
    remainder: IntMatrix
    steps: int


def residual_reduce_greedy(r: IntMatrix, m: int, cap: int = 10_000) -> GreedyResult:
    """Try to write a 2 x 2 level-m matrix as a word in X_12, X_21 letters.

    Reduces the first column Euclid-style with level-m row operations.  On
    success ``eval(word) == r``; otherwise ``eval(word) @ remainder == r``.
    """
    if r.n != 2:
        raise InvalidDimensionError("residual must be 2 x 2")
    a, b = list(r.rows[0]), list(r.rows[1])
    ops = []  # (dst, f): row_dst += f * row_other
    steps = 0

    def best(x, y):
        # f in mZ minimizing |x + f y|
        if y == 0:
            return 0
        q = (-x) // (m * y)
        f = min((q * m, (q + 1) * m), key=lambda f: (abs(x + f * y), abs(f)))
        return f if abs(x + f * y) < abs(x) else 0

    while steps < cap and not (a[0] == 1 and b[0] == 0):
        f = best(a[0], b[0])
        if f:
            a = [x + f * y for x, y in zip(a, b)]
            ops.append((0, f))
        else:
            f = best(b[0], a[0])
            if not f:
                break
            b = [x + f * y for x, y in zip(b, a)]
            ops.append((1, f))
        steps += 1
    syms = [E(1, 2, -f, m) if dst == 0 else E(2, 1, -f, m) for dst, f in ops]
    remainder = IntMatrix([a, b])
    success = a[0] == 1 and b[0] == 0
    if success:
        # remainder is [[1, t], [0, 1]] with m | t
        if a[1]:
            syms.append(E(1, 2, a[1], m))
        remainder = IntMatrix.identity(2)
    w = Word(2, syms)
    if eval_word(w) @ remainder != r:
        raise InternalInvariantError("greedy reduction lost track of its input")
    return GreedyResult(w, success, remainder, steps)


# --- certificates -----------------------------------------------------------

CERT_MAGIC = "congrkit-certificate 1"


def matrix_checksum(mat: IntMatrix) -> str:
    return hashlib.sha256(mat.to_text().encode()).hexdigest()


def certificate_text(dec: Decomposition) -> str:
    n = dec.n
    lines = [CERT_MAGIC, f"n {n}", f"m {dec.m}", f"budget {dec.budget}",
             f"length {len(dec.word)}", "input"]
    lines += [" ".join(str(x) for x in row) for row in dec.input.rows]
    lines.append("word")
    lines += [s.to_line() for s in dec.word.symbols]
    lines.append("residual")
    lines += [" ".join(str(x) for x in row) for row in dec.residual.rows]
    lines.append(f"checksum {matrix_checksum(dec.reconstruct())}")
    return "\n".join(lines) + "\n"


@dataclass(frozen=True)
class CertificateReport:
    ok: bool
    message: str
    line: int | None = None


@dataclass(frozen=True)
class _ParsedCertificate:
    n: int
    m: int
    budget: int
    input: IntMatrix
    symbols: list
    symbol_lines: list
    residual: IntMatrix
    residual_line: int
    checksum: str
    checksum_line: int


def _expect(lines, pos, key):
    tok = lines[pos].split()
    if not tok or tok[0] != key:
        raise ParseError(f"line {pos + 1}: expected {key!r}")
    return tok


def _parse_certificate(text: str) -> _ParsedCertificate:
    lines = text.splitlines()
    try:
        if lines[0].strip() != CERT_MAGIC:
            raise ParseError("line 1: missing certificate header")
        n = int(_expect(lines, 1, "n")[1])
        m = int(_expect(lines, 2, "m")[1])
        budget = int(_expect(lines, 3, "budget")[1])
        length = int(_expect(lines, 4, "length")[1])
        _expect(lines, 5, "input")
        inp = IntMatrix([[int(t) for t in lines[6 + r].split()] for r in range(n)])
        pos = 6 + n
        _expect(lines, pos, "word")
        pos += 1
        syms, sym_lines = [], []
        for off in range(length):
            syms.append(GenSymbol.from_line(lines[pos + off]))
            sym_lines.append(pos + off + 1)
        pos += length
        _expect(lines, pos, "residual")
        residual = IntMatrix([[int(t) for t in lines[pos + 1 + r].split()] for r in range(2)])
        pos += 3
        checksum = _expect(lines, pos, "checksum")[1]
    except (IndexError, ValueError) as exc:
        if isinstance(exc, ParseError):
            raise
        raise ParseError(f"malformed certificate: {exc}") from exc
    if inp.n != n:
        raise ParseError("input block has the wrong size")
    return _ParsedCertificate(n, m, budget, inp, syms, sym_lines, residual, pos - 2,
                              checksum, pos + 1)


def verify_certificate(text: str) -> CertificateReport:
    """Re-check a certificate by exact multiplication.

    Structural problems raise ParseError; failed checks come back as
    ``ok=False`` together with the first offending line number.
    """
    c = _parse_certificate(text)
    if c.budget != word_budget(c.n):
        return CertificateReport(False, "budget header disagrees with n", 4)
    if len(c.symbols) > c.budget:
        return CertificateReport(False, f"length exceeds budget {c.budget}", 5)
    for s, line in zip(c.symbols, c.symbol_lines):
        if s.t % c.m or s.max_index > c.n:
            return CertificateReport(False, "symbol is not a level-m letter", line)
    if c.residual.det() != 1 or not is_in_gamma(c.residual, c.m):
        return CertificateReport(False, "residual is not in Gamma_2(m)", c.residual_line)
    product = eval_word(Word(c.n, c.symbols)) @ c.residual.embed(c.n)
    if product != c.input:
        bad = c.symbol_lines[0] if c.symbol_lines else c.residual_line
        return CertificateReport(False, "word times residual does not reproduce the input", bad)
    if matrix_checksum(product) != c.checksum:
        return CertificateReport(False, "checksum mismatch", c.checksum_line)
    return CertificateReport(True, "ok")
