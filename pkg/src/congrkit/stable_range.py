"""Stable-range witnesses over Z and their level-m refinements.

The three public routines return multipliers that make a gcd collapse to a
prescribed value.  Each one follows the prime-set construction: collect the
primes of the "middle" gcd that divide neither end of the tuple, and use
their product as the multiplier.
"""

from __future__ import annotations

import json
from dataclasses import asdict, dataclass
from functools import reduce
from math import gcd, prod
from typing import Sequence

from .errors import InternalInvariantError, InvalidDimensionError, NotCoprimeError, ZeroEntryError

_WHEEL_STEPS = (4, 2, 4, 2, 4, 6, 2, 6)


def prime_factors(n: int) -> list[int]:
    """Distinct prime divisors of |n| by 2-3-5 wheel trial division."""
    n = abs(n)
    if n == 0:
        raise ValueError("0 has no finite prime factorization")
    out = []
    for p in (2, 3, 5):
        if n % p == 0:
            out.append(p)
            while n % p == 0:
                n //= p
    p, k = 7, 0
    while p * p <= n:
        if n % p == 0:
            out.append(p)
            while n % p == 0:
                n //= p
        p += _WHEEL_STEPS[k]
        k = (k + 1) % 8
    if n > 1:
        out.append(n)
    return out


def gcd_all(values: Sequence[int]) -> int:
    return reduce(gcd, values, 0)


def coprime_part(d: int, other: int) -> int:
    """Largest divisor of |d| sharing no prime with ``other``."""
    d = abs(d)
    if other == 0:
        return 1
    g = gcd(d, other)
    while g > 1:
        d //= g
        g = gcd(d, g)
    return d


def prime_set_multiplier(first: int, middle: Sequence[int], last: int, *,
                         radical: bool = True, minimal: bool = False) -> int:
    """Multiplier x with gcd(first + x*last, *middle) == 1.

    Requires gcd(first, *middle, last) == 1 and a non-zero middle.  With
    ``radical`` the result is the product of the distinct primes p | gcd(middle)
    with p not dividing first or last (1 if there are none); otherwise the
    coprime part of gcd(middle) is used, which has the same prime support and
    needs no factorization.  ``minimal`` returns 0 when no correction is needed.
    """
    d = gcd_all(middle)
    if d == 0:
        raise ZeroEntryError("middle entries are all zero")
    if minimal and (last == 0 or gcd(first, d) == 1):
        return 0
    # a zero end is divisible by every prime, so then no prime qualifies
    part = coprime_part(d, first * last)
    if radical:
        return prod(prime_factors(part)) if part > 1 else 1
    return part


@dataclass(frozen=True)
class GcdWitness:
    """Serializable record of a witness and the gcd it is supposed to produce."""

    kind: str
    m: int
    a: tuple[int, ...]
    x_values: tuple[int, ...]
    target_gcd: int

    def combination(self) -> list[int]:
        return witness_terms(self.kind, self.m, self.a, self.x_values)

    def achieved_gcd(self) -> int:
        return gcd_all(self.combination())

    def verify(self) -> bool:
        return self.achieved_gcd() == self.target_gcd

    def to_json(self) -> str:
        return json.dumps(asdict(self), sort_keys=True)

    @classmethod
    def from_json(cls, text: str) -> "GcdWitness":
        d = json.loads(text)
        return cls(d["kind"], d["m"], tuple(d["a"]), tuple(d["x_values"]), d["target_gcd"])


def witness_terms(kind: str, m: int, a: Sequence[int], xs: Sequence[int]) -> list[int]:
    """The integers whose gcd a witness controls."""
    n = len(a)
    if kind == "stable":
        return [a[0] + xs[0] * a[-1], *a[1:-1]]
    if kind == "level":
        head = m * a[0] + sum(x * m * m * a[k + 2] for k, x in enumerate(xs))
        return [head, m * a[1], m * a[-1] + 1]
    if kind == "corner":
        head = m * m * a[0] + sum(x * m ** 3 * a[k + 2] for k, x in enumerate(xs[: n - 3]))
        head += xs[n - 3] * m * (m * m * a[-1] + 1)
        return [head, m * m * a[1]]
    raise ValueError(f"unknown witness kind {kind!r}")


def _check_tuple(a, need_nonzero=True):
    if len(a) < 3:
        raise InvalidDimensionError("tuples need n > 2 entries")
    if need_nonzero and any(x == 0 for x in a):
        raise ZeroEntryError("entries must be non-zero")


def stabilize_gcd(a: Sequence[int]) -> int:
    """x with gcd(a_1 + x a_n, a_2, ..., a_{n-1}) == 1."""
    a = [int(v) for v in a]
    _check_tuple(a)
    if gcd_all(a) != 1:
        raise NotCoprimeError(f"gcd{tuple(a)} != 1")
    return prime_set_multiplier(a[0], a[1:-1], a[-1])


def stabilize_witness(a: Sequence[int]) -> GcdWitness:
    x = stabilize_gcd(a)
    return GcdWitness("stable", 1, tuple(a), (x,), 1)


def _level_iterate(m, a, *, radical, minimal):
    n = len(a)
    head = m * a[0]
    xs = []
    for k in range(n - 3):
        last = m * a[k + 2]
        middle = [m * v for v in a[k + 3 : n - 1]] + [m * a[1], m * a[-1] + 1]
        x = prime_set_multiplier(head, middle, last, radical=radical, minimal=minimal)
        xs.append(x)
        # the multiplier is applied with an extra factor m
        head += x * m * last
    return xs, head


def level_stabilize(m: int, a: Sequence[int], *, minimal: bool = False) -> list[int]:
    """x_1..x_{n-3} with gcd(m a_1 + sum x_k m^2 a_{k+2}, m a_2, m a_n + 1) == 1."""
    a = [int(v) for v in a]
    _check_tuple(a)
    if m < 1:
        raise ValueError("m must be positive")
    if gcd_all([m * v for v in a[:-1]] + [m * a[-1] + 1]) != 1:
        raise NotCoprimeError("precondition gcd is not 1")
    xs, head = _level_iterate(m, a, radical=True, minimal=minimal)
    if gcd_all([head, m * a[1], m * a[-1] + 1]) != 1:
        raise InternalInvariantError("level stabilization failed its gcd postcondition")
    return xs


def corner_gcd_witness(m: int, a: Sequence[int], *, radical: bool = True,
                       minimal: bool = False) -> list[int]:
    """x_1..x_{n-2} making the corner gcd exactly m.

    Only a_1 and a_2 must be non-zero; the remaining entries may vanish.
    """
    a = [int(v) for v in a]
    if len(a) < 3:
        raise InvalidDimensionError("tuples need n > 2 entries")
    if a[0] == 0 or a[1] == 0:
        raise ZeroEntryError("a_1 and a_2 must be non-zero")
    if m < 1:
        raise ValueError("m must be positive")
    c = m * m * a[-1] + 1
    if gcd_all([m * m * v for v in a[:-1]] + [c]) != 1:
        raise NotCoprimeError("precondition gcd is not 1")
    xs, head = _level_iterate(m, [m * v for v in a], radical=radical, minimal=minimal)
    x_last = prime_set_multiplier(head, [m * m * a[1]], c, radical=radical)
    xs.append(x_last)
    d = gcd_all(witness_terms("corner", m, a, xs))
    if d != m:
        raise InternalInvariantError(f"corner gcd is {d}, expected {m}")
    return xs


def corner_witness(m: int, a: Sequence[int]) -> GcdWitness:
    xs = corner_gcd_witness(m, a)
    return GcdWitness("corner", m, tuple(a), tuple(xs), m)


def level_witness(m: int, a: Sequence[int]) -> GcdWitness:
    xs = level_stabilize(m, a)
    return GcdWitness("level", m, tuple(a), tuple(xs), 1)
