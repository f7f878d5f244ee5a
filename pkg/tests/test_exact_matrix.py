import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from congrkit.errors import InvalidPositionsError, InvalidWordError, NotUnimodularError, ParseError
from congrkit.exact_matrix import (C, E, GenSymbol, IntMatrix, Word, commutator, elementary,
                                   eval_word, is_in_gamma, make_y, random_word, sigma_symbols,
                                   steinberg_check)


def naive_product(word):
    out = IntMatrix.identity(word.n)
    for s in word.symbols:
        out = out @ s.matrix(word.n)
    return out


def test_y_is_lower_bidiagonal():
    y = make_y(4)
    assert y.tolist() == [[1, 0, 0, 0], [-1, 1, 0, 0], [0, -1, 1, 0], [0, 0, -1, 1]]
    assert y.inverse().tolist() == [[1, 0, 0, 0], [1, 1, 0, 0], [1, 1, 1, 0], [1, 1, 1, 1]]


def test_conjugated_symbol_matches_definition():
    for k in (2, 3, 4):
        y = make_y(k).embed(5)
        for i in range(1, k + 1):
            for j in range(1, k + 1):
                if i != j:
                    want = y.inverse() @ elementary(5, i, j, 3) @ y
                    assert C(k, i, j, 3).matrix(5) == want


def test_det_and_inverse():
    a = IntMatrix([[2, 3, 1], [1, 2, 1], [0, 0, 1]])
    assert a.det() == 1
    assert a @ a.inverse() == IntMatrix.identity(3)
    with pytest.raises(NotUnimodularError):
        IntMatrix([[2, 0], [0, 1]]).inverse()


def test_text_round_trip():
    a = IntMatrix([[1, -4], [2, -7]])
    assert IntMatrix.from_text(a.to_text()) == a
    with pytest.raises(ParseError):
        IntMatrix.from_text("2\n1 2\n3")


def test_symbol_validation():
    with pytest.raises(InvalidWordError):
        E(1, 2, 0)
    with pytest.raises(InvalidWordError):
        E(1, 2, 3, level=2)
    with pytest.raises(InvalidPositionsError):
        E(2, 2, 1)
    with pytest.raises(InvalidWordError):
        C(2, 1, 3, 1)
    assert GenSymbol.from_line("C 3 1 2 -4", 2) == C(3, 1, 2, -4, 2)
    with pytest.raises(ParseError):
        GenSymbol.from_line("E 1 x 2")


def test_membership():
    assert is_in_gamma(elementary(3, 1, 2, 6), 3)
    assert not is_in_gamma(elementary(3, 1, 2, 4), 3)
    with pytest.raises(NotUnimodularError):
        is_in_gamma(IntMatrix([[2, 0], [0, 1]]), 1)


def test_sigma_is_symmetric():
    syms = sigma_symbols(3, 2)
    assert len(syms) == 24
    assert {s.inverse() for s in syms} == set(syms)


def test_steinberg_examples():
    assert steinberg_check(1, 2, 3, 2, 5)
    assert commutator(elementary(3, 1, 2, 1), elementary(3, 2, 1, 1)) != IntMatrix.identity(3)
    with pytest.raises(InvalidWordError):
        steinberg_check(1, 2, 3, 0, 1)


@settings(max_examples=50, deadline=None)
@given(st.integers(3, 5), st.integers(1, 4), st.integers(0, 30), st.integers(0, 2**32 - 1))
def test_eval_word_matches_naive(n, m, length, seed):
    w = random_word(n, m, length, np.random.default_rng(seed))
    prod = eval_word(w)
    assert prod == naive_product(w)
    assert prod @ eval_word(w.inverse()) == IntMatrix.identity(n)
    assert is_in_gamma(prod, m)
    assert Word.from_text(n, w.to_text(), m) == w
