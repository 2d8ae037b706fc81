import itertools
import random
from fractions import Fraction as F

import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from gdm.matroids import (ContractLoopError, FreeMatroid, GraphicMatroid,
                          PartitionMatroid, SeparationCapExceeded,
                          TransversalMatroid, UniformMatroid, make_matroid)

from conftest import MATROID_KINDS, random_instance, random_matroid


def small_matroids():
    k3 = GraphicMatroid({0: (0, 1), 1: (1, 2), 2: (2, 0)})
    return [
        FreeMatroid(range(4)),
        UniformMatroid(2, range(4)),
        PartitionMatroid([[0, 1], [2]], [1, 1]),
        k3,
        TransversalMatroid({0: frozenset({9}), 1: frozenset({9}),
                            2: frozenset({8, 9})}),
    ]


def brute_rank(oracle, A):
    best = 0
    A = sorted(A)
    for r in range(len(A) + 1):
        for combo in itertools.combinations(A, r):
            if oracle.is_independent(combo):
                best = max(best, r)
    return best


def test_rank_examples():
    assert UniformMatroid(2, range(4)).rank(range(4)) == 2
    assert GraphicMatroid({0: (0, 1), 1: (1, 2), 2: (2, 0)}).rank([0, 1, 2]) == 2
    assert PartitionMatroid([[0, 1], [2]], [1, 1]).rank([0, 1, 2]) == 2


def test_matroid_axioms_and_greedy_rank():
    for oracle in small_matroids():
        ground = sorted(oracle.ground)
        assert oracle.is_independent(())
        for r in range(len(ground) + 1):
            for combo in itertools.combinations(ground, r):
                ind = oracle.is_independent(combo)
                if ind:
                    for e in combo:  # downward closure
                        assert oracle.is_independent(set(combo) - {e})
                assert oracle.rank(combo) == brute_rank(oracle, combo)
        # exchange property
        for a_len in range(len(ground) + 1):
            for A in itertools.combinations(ground, a_len):
                if not oracle.is_independent(A):
                    continue
                for B in itertools.combinations(ground, a_len + 1):
                    if not oracle.is_independent(B):
                        continue
                    assert any(oracle.is_independent(set(A) | {e})
                               for e in set(B) - set(A))


def test_rank_monotone_submodular():
    for oracle in small_matroids():
        ground = sorted(oracle.ground)
        subsets = [frozenset(c) for r in range(len(ground) + 1)
                   for c in itertools.combinations(ground, r)]
        rk = {A: oracle.rank(A) for A in subsets}
        for A in subsets:
            for B in subsets:
                if A <= B:
                    assert rk[A] <= rk[B]
                assert rk[A | B] + rk[A & B] <= rk[A] + rk[B]


def test_delete_contract_match_quoted_definitions():
    rng = random.Random(11)
    for oracle in small_matroids():
        ground = sorted(oracle.ground)
        for e in ground:
            d = oracle.delete(e)
            assert d.ground == oracle.ground - {e}
            for r in range(len(d.ground) + 1):
                for combo in itertools.combinations(sorted(d.ground), r):
                    assert d.is_independent(combo) == oracle.is_independent(combo)
            if oracle.is_independent({e}):
                c = oracle.contract(e)
                assert c.ground == oracle.ground - {e}
                assert e in c.contracted
                for r in range(len(c.ground) + 1):
                    for combo in itertools.combinations(sorted(c.ground), r):
                        assert c.is_independent(combo) == \
                            oracle.is_independent(set(combo) | {e})


def test_contract_loop_raises():
    u = UniformMatroid(1, [0, 1])
    c = u.contract(0)
    assert not c.is_independent({1})  # 1 became a loop
    with pytest.raises(ContractLoopError):
        c.contract(1)


def test_contract_examples():
    g = GraphicMatroid({0: (0, 1), 1: (1, 2), 2: (2, 0)})
    g2 = g.contract(0)
    assert not g2.is_independent({1, 2})  # parallel after contraction
    assert g2.rank([1, 2]) == 1
    u = UniformMatroid(2, [0, 1, 2]).delete(0)
    assert u.rank(u.ground) == 2


def test_loops_dropped_at_construction():
    g = GraphicMatroid({0: (0, 0), 1: (0, 1)})
    assert g.ground == {1}
    t = TransversalMatroid({0: frozenset(), 1: frozenset({5})})
    assert t.ground == {1}
    p = PartitionMatroid([[0], [1]], [0, 1])
    assert p.ground == {1}
    assert UniformMatroid(0, [0, 1]).ground == frozenset()


def test_post_contraction_loops_stay_in_ground():
    g = GraphicMatroid({0: (0, 1), 1: (0, 1)})
    c = g.contract(0)
    assert c.ground == {1}
    assert c.rank([1]) == 0  # a loop of the minor, visible to the LP boxes


def test_separation_examples():
    u = UniformMatroid(1, [0, 1])
    res = u.separate({0: F(3, 5), 1: F(3, 5)})
    assert not res.inside and res.violated == {0, 1} and res.gap == F(1, 5)

    p = PartitionMatroid([[0, 1], [2]], [1, 1])
    assert p.separate({0: F(1, 2), 1: F(1, 2), 2: F(1)}).inside

    g = GraphicMatroid({0: (0, 1), 1: (1, 2), 2: (2, 0)})
    res = g.separate({e: F(9, 10) for e in range(3)})
    assert not res.inside and res.violated == {0, 1, 2} and res.gap == F(7, 10)


def test_make_matroid_examples(k3):
    free = make_matroid({"kind": "free"}, k3)
    assert free.is_independent(k3.edge_ids)
    t = make_matroid({"kind": "transversal",
                      "available": {"0": [0], "1": [0]}}, k3)
    assert not t.is_independent({0, 1})
    g = make_matroid({"kind": "graphic"}, k3)
    assert g.is_independent({0, 1}) and not g.is_independent({0, 1, 2})
    with pytest.raises(ValueError):
        make_matroid({"kind": "nope"}, k3)
    with pytest.raises(ValueError):
        make_matroid({}, k3)


def rand_point(rng, ids, max_support):
    support = rng.sample(ids, min(len(ids), rng.randint(1, max_support)))
    return {e: F(rng.randint(1, 12), rng.randint(6, 12)) for e in support}


def exhaustive_min_gap(oracle, x):
    support = [e for e, v in x.items() if v > 0]
    worst = F(0)
    worst_set = None
    for r in range(1, len(support) + 1):
        for combo in itertools.combinations(support, r):
            gap = sum((x[e] for e in combo), F(0)) - oracle.rank(combo)
            if gap > worst:
                worst, worst_set = gap, frozenset(combo)
    return worst, worst_set


def test_separate_agrees_with_exhaustive_minimisation():
    rng = random.Random(23)
    for kind in MATROID_KINDS:
        for _ in range(30):
            inst = random_instance(rng, n_max=7, m_max=10)
            if not inst.edges:
                continue
            oracle = random_matroid(rng, kind, inst)
            if not oracle.ground:
                continue
            x = rand_point(rng, sorted(oracle.ground), 8)
            res = oracle.separate(x)
            worst, _ = exhaustive_min_gap(oracle, x)
            if res.inside:
                assert worst == 0
            else:
                assert res.gap == worst > 0
                got = sum((x[e] for e in res.violated), F(0)) \
                    - oracle.rank(res.violated)
                assert got == res.gap


def test_separation_cap():
    t = TransversalMatroid({e: frozenset({e}) for e in range(30)})
    x = {e: F(1, 2) for e in range(30)}
    with pytest.raises(SeparationCapExceeded):
        t.separate(x)
