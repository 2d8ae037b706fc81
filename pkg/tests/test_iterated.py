import itertools
import random
from fractions import Fraction as F

import pytest

from gdm.core import is_feasible, load
from gdm.iterated import bicriteria_base, iterated_base, iterated_relax
from gdm.lp import Infeasible, lp_value
from gdm.matroids import FreeMatroid, PartitionMatroid, make_matroid

from conftest import (MATROID_KINDS, mk_instance, random_instance,
                      random_matroid, sweep)


def test_k3_trace(k3):
    free = FreeMatroid(k3.edge_ids)
    rel = iterated_relax(k3, free)
    assert rel.trace[0]["lp"] == "3/2"
    # first LP is (1/2, 1/2, 1/2): no integral coordinate, so a vertex drops
    assert rel.trace[0]["event"] == "drop"
    assert F(rel.trace[0]["score"]) == 1 <= 2
    assert len(rel.m_prime) == 2
    assert k3.profit(rel.m_prime) == 2 >= F(3, 2)
    for v in k3.vertices:
        inc = [e for e in k3.incident(v) if e in rel.m_prime]
        rest = [e for e in inc if e not in rel.large[v]]
        assert load(k3, v, rest) <= k3.capacities[v]
        assert load(k3, v, inc) <= k3.capacities[v] + 2 * 1


def test_single_edge_fixes_to_one():
    inst = mk_instance({0: 4, 1: 4}, [(((0, 2), (1, 2)), 5)])
    rel = iterated_relax(inst, FreeMatroid([0]))
    assert rel.m_prime == {0}
    assert [ev["event"] for ev in rel.trace] == ["fix1"]


def test_integral_lp_never_drops_a_vertex():
    # two vertex-disjoint edges: x = 1 on both is optimal and integral
    inst = mk_instance({0: 2, 1: 2, 2: 2, 3: 2},
                       [(((0, 1), (1, 1)), 3), (((2, 1), (3, 1)), 4)])
    rel = iterated_relax(inst, FreeMatroid([0, 1]))
    assert rel.m_prime == {0, 1}
    assert all(ev["event"] != "drop" for ev in rel.trace)


def test_relax_guarantees_across_sweep():
    for inst, matroid, kind in sweep(97, 25, n_max=6, m_max=9):
        rel = iterated_relax(inst, matroid)
        assert matroid.is_independent(rel.m_prime)
        assert inst.profit(rel.m_prime) >= lp_value(inst, matroid)
        for v in inst.vertices:
            inc = [e for e in inst.incident(v) if e in rel.m_prime]
            L = rel.large[v]
            assert len(L) <= min(2, len(inc))
            assert load(inst, v, [e for e in inc if e not in L]) \
                <= inst.capacities[v]
        for ev in rel.trace:
            if ev["event"] == "drop":
                assert F(ev["score"]) <= inst.k


def test_base_unique_tree():
    inst = mk_instance({0: 2, 1: 2, 2: 2},
                       [(((0, 1), (1, 1)), 5), (((1, 1), (2, 1)), 7)])
    g = make_matroid({"kind": "graphic"}, inst)
    base = iterated_base(inst, g)
    assert base.edge_ids == {0, 1}


def test_base_infeasible_zero_caps():
    zero = mk_instance({0: 0, 1: 0, 2: 0},
                       [(((0, 1), (1, 1)), 1), (((1, 1), (2, 1)), 1),
                        (((2, 1), (0, 1)), 1)])
    with pytest.raises(Infeasible):
        iterated_base(zero, make_matroid({"kind": "graphic"}, zero))


def spanning_trees(inst):
    g = make_matroid({"kind": "graphic"}, inst)
    r = g.full_rank()
    for combo in itertools.combinations(sorted(g.ground), r):
        if g.is_independent(combo):
            yield frozenset(combo)


def test_k4_congestion_bounds_against_all_trees():
    spec = []
    import itertools as it
    for u, v in it.combinations(range(4), 2):
        spec.append((((u, 1), (v, 1)), len(spec) + 1))
    inst = mk_instance({v: 2 for v in range(4)}, spec)
    g = make_matroid({"kind": "graphic"}, inst)
    base = iterated_base(inst, g)
    trees = list(spanning_trees(inst))
    assert frozenset(base.edge_ids) in trees
    lpb = lp_value(inst, g, mode="base")
    assert inst.profit(base.edge_ids) <= lpb
    feas_costs = [inst.profit(t) for t in trees if is_feasible(inst, t)]
    assert lpb <= min(feas_costs)
    for v in inst.vertices:
        inc = [e for e in inst.incident(v) if e in base.edge_ids]
        worst = max(inst.demand(v, e) for e in inc) if inc else F(0)
        assert load(inst, v, inc) <= inst.capacities[v] + 2 * worst


def test_bicriteria_certificate(k3):
    roomy = mk_instance({0: 5, 1: 5, 2: 5},
                        [(((0, 1), (1, 1)), 4), (((1, 1), (2, 1)), 1),
                         (((2, 1), (0, 1)), 2)])
    out = bicriteria_base(roomy, make_matroid({"kind": "graphic"}, roomy))
    assert out["cost"] <= out["lp"] == 3
    assert out["factor_certified"] is True
    for v in roomy.vertices:
        assert load(roomy, v, out["base"].edge_ids) <= 3 * roomy.capacities[v]


def test_hyperedges_k3_base():
    spec = [(((0, 1), (1, 1), (2, 1)), 4),
            (((0, 2), (3, 1)), 3),
            (((3, 1),), 1),
            (((1, 1), (2, 1), (3, 1)), 2)]
    inst = mk_instance({0: 4, 1: 2, 2: 2, 3: 3}, spec, k=3)
    pm = PartitionMatroid([[0, 1], [2, 3]], [1, 1])
    base = iterated_base(inst, pm)
    assert len(base.edge_ids) == 2
    for v in inst.vertices:
        inc = [e for e in inst.incident(v) if e in base.edge_ids]
        worst = max((inst.demand(v, e) for e in inc), default=F(0))
        assert load(inst, v, inc) <= inst.capacities[v] + 3 * worst
