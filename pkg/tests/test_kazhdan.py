import itertools
import math

import numpy as np
import pytest
from scipy.optimize import linprog

from congrkit import quotients as Q
from congrkit.errors import NotGeneratingError, ToleranceError
from congrkit.kazhdan import (KazhdanBounds, ReferenceCurves, abelian_kazhdan_exact,
                              abelian_upper_bound, congruence_kappa, cyclic_kappa,
                              minimal_prime, nonuniform_demo, projection_upper_bound,
                              projection_witness, relative_spectral_bound, spectral_bounds)


def brute_kappa(moduli, gens):
    """Kazhdan constant by a dense LP over every nontrivial character."""
    chars = [t for t in itertools.product(*[range(m) for m in moduli]) if any(t)]
    cost = np.array([[abs(np.exp(2j * np.pi * sum(a * s / m for a, s, m in zip(t, g, moduli))) - 1) ** 2
                      for g in gens] for t in chars])
    k = len(gens)
    res = linprog(np.r_[np.zeros(k), -1], A_ub=np.c_[-cost, np.ones(len(chars))],
                  b_ub=np.zeros(len(chars)), A_eq=[np.r_[np.ones(k), 0]], b_eq=[1],
                  bounds=[(0, None)] * k + [(None, None)], method="highs")
    return math.sqrt(-res.fun)


def cyclic_graph(m):
    return Q.enumerate_group([np.array([[1, 1], [0, 1]])], m).cayley_graph()


def test_reference_curves():
    assert ReferenceCurves.cyclic_exact(2) == 2
    assert ReferenceCurves.eps_m(6) == pytest.approx(0.5 / 27)
    assert ReferenceCurves.sl_lower(3) == pytest.approx(1.0721e-3, rel=1e-3)
    assert ReferenceCurves.sl_upper(4) == 1
    assert ReferenceCurves.corollary_shape(2, 5) == 1 / 40


def test_cyclic_values():
    for m in range(2, 51):
        assert cyclic_kappa(m).lower == pytest.approx(2 * math.sin(math.pi / m), abs=1e-12)
    assert cyclic_kappa(4).lower == pytest.approx(math.sqrt(2), abs=1e-12)
    assert abelian_kazhdan_exact([2], [[1]]).lower == 2


@pytest.mark.parametrize("moduli,gens", [
    ([2, 2], [[1, 0], [0, 1]]),
    ([6], [[1], [2]]),
    ([3, 3], [[1, 0], [0, 1], [1, 1]]),
    ([4, 2], [[1, 1], [1, 0]]),
    ([5], [[1], [2], [3]]),
])
def test_lp_against_dense_oracle(moduli, gens):
    r = abelian_kazhdan_exact(moduli, gens)
    assert r.exact
    assert r.lower == pytest.approx(brute_kappa(moduli, gens), abs=1e-9)
    assert r.lower <= r.extra["irreducible_min"] + 1e-12
    assert r.upper <= abelian_upper_bound(r.order, r.n_gens)


def test_klein_group_is_not_the_single_character_value():
    r = abelian_kazhdan_exact([2, 2], [[1, 0], [0, 1]])
    assert r.lower == pytest.approx(math.sqrt(2), abs=1e-12)
    assert r.extra["irreducible_min"] == pytest.approx(2)


def test_more_generators_never_decrease_kappa():
    small = abelian_kazhdan_exact([7], [[1]])
    big = abelian_kazhdan_exact([7], [[1], [3]])
    assert big.lower >= small.lower - 1e-12


def test_non_generating_set_rejected():
    with pytest.raises(NotGeneratingError):
        abelian_kazhdan_exact([2, 2], [[1, 0]])


def test_abelian_upper_bound():
    assert abelian_upper_bound(2, 1) == pytest.approx(2 * math.pi)
    assert abelian_upper_bound(1, 3) == math.inf
    for p in range(2, 2000):
        assert 2 * math.sin(math.pi / p) <= abelian_upper_bound(p, 1) + 1e-15


def test_congruence_kappa_small():
    r = congruence_kappa(3, 2)
    assert r.order == 256 and r.exact
    assert r.lower == pytest.approx(2 / math.sqrt(6), abs=1e-12)
    assert r.upper <= projection_upper_bound(3, 2)


@pytest.mark.parametrize("m", [2, 3, 4, 5, 6])
def test_projection_witness(m):
    w = projection_witness(3, m)
    assert w.verify()
    assert w.value == pytest.approx(projection_upper_bound(3, m), abs=1e-12)


def test_projection_values():
    assert projection_upper_bound(3, 2) == 2
    assert projection_upper_bound(5, 4) == pytest.approx(math.sqrt(2))


@pytest.mark.parametrize("m", [2, 3, 4, 6, 7])
def test_spectral_matches_characters_on_cycles(m):
    spec = spectral_bounds(cyclic_graph(m))
    assert spec.lower == pytest.approx(cyclic_kappa(m).lower, abs=1e-8)
    assert spec.lower == pytest.approx(math.sqrt(2 * (1 - spec.mu)), abs=1e-15)
    assert spec.check()


def test_c2_has_mu_minus_one():
    spec = spectral_bounds(cyclic_graph(2))
    assert spec.mu == pytest.approx(-1) and spec.lower == pytest.approx(2)


def test_sandwich_on_abelian_products():
    G = Q.enumerate_group([np.diag([1, 1, 1]) + np.eye(3, k=1).astype(int),
                           np.diag([-1, 1, 1])], 3)
    spec = spectral_bounds(G.cayley_graph())
    assert spec.check()


def test_sparse_and_power_paths_agree_with_dense():
    G = Q.sl_elementary(2, 7)
    graph = G.cayley_graph()
    dense = spectral_bounds(graph)
    sparse = spectral_bounds(graph, dense_limit=0)
    power = spectral_bounds(graph, dense_limit=0, engine="power", tol=1e-9)
    assert sparse.mu == pytest.approx(dense.mu, abs=1e-10)
    assert power.mu == pytest.approx(dense.mu, abs=1e-8)
    assert sparse.residual <= 1e-10


def test_tolerance_failure_reported():
    graph = Q.sl_elementary(2, 7).cayley_graph()
    with pytest.raises(ToleranceError) as exc:
        spectral_bounds(graph, dense_limit=0, engine="power", maxiter=2, tol=1e-14)
    assert exc.value.residual is not None


def test_disconnected_graph_rejected():
    G = Q.sl_elementary(2, 3)
    graph = G.cayley_graph()
    graph.perms = graph.perms[:1]
    with pytest.raises(NotGeneratingError):
        spectral_bounds(graph)


def test_relative_bound_semidirect():
    G = Q.build_semidirect(1, 1, 2)
    B = Q.translation_subgroup(G)
    r = relative_spectral_bound(G, B)
    assert r.extra["dim_H0"] == 18 and r.extra["normal"]
    assert r.lower > 0 and r.check()


def test_relative_bound_degenerate_subgroups():
    G = Q.build_semidirect(1, 1, 3)
    whole = relative_spectral_bound(G, range(G.size))
    plain = spectral_bounds(G.cayley_graph())
    assert whole.extra["dim_H0"] == G.size - 1
    assert whole.mu == pytest.approx(plain.mu, abs=1e-10)
    trivial = relative_spectral_bound(G, [0])
    assert trivial.extra["dim_H0"] == 0 and "vacuous" in trivial.method


def test_nonuniform_demo():
    rep = nonuniform_demo(1, p=3)
    assert rep.curve == pytest.approx(math.pi)
    assert all(t["kappa"] <= rep.curve for t in rep.trials)
    rep = nonuniform_demo(1, p=2)
    assert rep.curve == pytest.approx(2 * math.pi) and rep.trials[0]["kappa"] == 2
    p = minimal_prime(0.1, 3)
    assert p > (1 + 20 * math.pi) ** 3
    with pytest.raises(ValueError):
        nonuniform_demo(2, p=4)


def test_bounds_serialize():
    r = cyclic_kappa(5)
    d = r.to_dict()
    assert d["schema"] == 1 and d["method"] == ["characters"]
    assert isinstance(KazhdanBounds(**{k: v for k, v in d.items() if k != "schema"}).lower,
                      float)
    assert '"schema": 1' in r.to_json()


def test_projection_exceeds_stated_constant():
    for m in range(2, 12):
        w = projection_witness(3, m)
        assert w.exceeds_stated and w.stated_bound == 2 / m
