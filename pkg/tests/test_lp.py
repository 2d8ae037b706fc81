import random
from fractions import Fraction as F

import pytest

from gdm.lp import (Infeasible, LpSubproblem, lp_value, make_subproblem,
                    simplex_solve, solve_extreme)
from gdm.matroids import FreeMatroid, UniformMatroid, make_matroid

from conftest import (MATROID_KINDS, full_lp_rows, lp_by_vertex_enumeration,
                      mk_instance, random_instance, random_matroid)


def test_simplex_basic():
    # max x0 + x1 st x0 + x1 <= 1, x0 <= 3/4
    x, obj, tight, _ = simplex_solve(
        2, [([F(1), F(1)], "<=", F(1)), ([F(1), F(0)], "<=", F(3, 4))],
        [F(1), F(1)])
    assert obj == 1 and sum(x) == 1
    assert 0 in tight


def test_simplex_equality_and_minimise():
    # min 2 x0 + x1 st x0 + x1 == 2, x0 <= 3, x1 <= 3
    x, obj, _, _ = simplex_solve(
        2, [([F(1), F(1)], "==", F(2)), ([F(1), F(0)], "<=", F(3)),
            ([F(0), F(1)], "<=", F(3))],
        [F(2), F(1)], minimize=True)
    assert obj == 2 and x == [F(0), F(2)]


def test_simplex_infeasible_equality():
    with pytest.raises(Infeasible):
        simplex_solve(1, [([F(1)], "<=", F(1)), ([F(1)], "==", F(2))], [F(1)])


def test_k3_extreme_point(k3):
    fp = solve_extreme(make_subproblem(k3, FreeMatroid(k3.edge_ids)))
    assert fp.objective == F(3, 2)
    assert all(v == F(1, 2) for v in fp.values.values())
    assert fp.basic
    assert len(fp.tight) >= 3  # the three capacity rows pin the vertex


def test_single_edge(star_655):
    single = mk_instance({0: 10, 1: 10}, [(((0, 2), (1, 2)), 7)])
    fp = solve_extreme(make_subproblem(single, FreeMatroid([0])))
    assert fp.values[0] == 1 and fp.objective == 7


def test_rank_cut_binds():
    inst = mk_instance({0: 9, 1: 9, 2: 9},
                       [(((0, 1), (1, 1)), 3), (((1, 1), (2, 1)), 2)])
    fp = solve_extreme(make_subproblem(inst, UniformMatroid(1, [0, 1])))
    assert fp.objective == 3
    assert fp.values == {0: F(1), 1: F(0)}


def test_lp_value_examples(k3):
    assert lp_value(k3, FreeMatroid(k3.edge_ids)) == F(3, 2)
    empty = mk_instance({0: 1}, [])
    assert lp_value(empty, FreeMatroid([])) == 0
    pair = mk_instance({0: 9, 1: 9, 2: 9, 3: 9},
                       [(((0, 1), (1, 1)), 4), (((2, 1), (3, 1)), 5)])
    assert lp_value(pair, FreeMatroid([0, 1])) == 9


def test_base_mode_value_and_infeasibility(k3):
    g = make_matroid({"kind": "graphic"}, k3)
    zero = mk_instance({0: 0, 1: 0, 2: 0},
                       [(((0, 1), (1, 1)), 1), (((1, 1), (2, 1)), 1),
                        (((2, 1), (0, 1)), 1)])
    with pytest.raises(Infeasible):
        lp_value(zero, make_matroid({"kind": "graphic"}, zero), mode="base")
    # ample capacities: cheapest spanning tree of K3 is the two cheap edges
    roomy = mk_instance({0: 5, 1: 5, 2: 5},
                        [(((0, 1), (1, 1)), 4), (((1, 1), (2, 1)), 1),
                         (((2, 1), (0, 1)), 2)])
    assert lp_value(roomy, make_matroid({"kind": "graphic"}, roomy),
                    mode="base") == 3


def test_solve_extreme_matches_vertex_enumeration():
    rng = random.Random(17)
    checked = 0
    for trial in range(40):
        inst = random_instance(rng, n_max=5, m_max=4, demand_max=4, cap_max=8)
        if not inst.edges:
            continue
        kind = MATROID_KINDS[trial % len(MATROID_KINDS)]
        oracle = random_matroid(rng, kind, inst)
        order = sorted(set(inst.edge_ids) & oracle.ground)
        if not order:
            continue
        fp = solve_extreme(make_subproblem(inst, oracle))
        rows = full_lp_rows(inst, oracle, order)
        objective = [inst.edge(e).profit for e in order]
        best = lp_by_vertex_enumeration(len(order), rows, objective)
        assert best is not None
        assert fp.objective == best[0], (trial, kind)
        checked += 1
    assert checked >= 30


def test_base_mode_matches_vertex_enumeration():
    rng = random.Random(31)
    checked = 0
    for trial in range(30):
        inst = random_instance(rng, n_max=5, m_max=4, demand_max=3, cap_max=9)
        if not inst.edges:
            continue
        kind = MATROID_KINDS[trial % len(MATROID_KINDS)]
        oracle = random_matroid(rng, kind, inst)
        order = sorted(set(inst.edge_ids) & oracle.ground)
        if not order:
            continue
        sub = make_subproblem(inst, oracle, mode="base")
        rows = full_lp_rows(inst, oracle, order)
        objective = [inst.edge(e).profit for e in order]
        eq = ([F(1)] * len(order), F(oracle.rank(order)))
        best = lp_by_vertex_enumeration(len(order), rows, objective,
                                        eq_rows=[eq], minimize=True)
        try:
            fp = solve_extreme(sub)
        except Infeasible:
            assert best is None
            checked += 1
            continue
        assert best is not None and fp.objective == best[0], (trial, kind)
        checked += 1
    assert checked >= 20


def test_returned_point_passes_full_audit():
    rng = random.Random(41)
    for trial in range(20):
        inst = random_instance(rng, n_max=6, m_max=8)
        if not inst.edges:
            continue
        oracle = random_matroid(rng, MATROID_KINDS[trial % 5], inst)
        if not (set(inst.edge_ids) & oracle.ground):
            continue
        fp = solve_extreme(make_subproblem(inst, oracle))
        for e, xe in fp.values.items():
            assert 0 <= xe <= 1
        for v in inst.vertices:
            used = sum((inst.demand(v, e) * xe for e, xe in fp.values.items()
                        if v in inst.edge(e).vertices), F(0))
            assert used <= inst.capacities[v]
        assert oracle.separate({e: v for e, v in fp.values.items() if v > 0}).inside


def test_objective_monotone_under_vertex_drop():
    rng = random.Random(53)
    for _ in range(10):
        inst = random_instance(rng, n_max=5, m_max=6)
        if not inst.edges:
            continue
        oracle = FreeMatroid(inst.edge_ids)
        full = solve_extreme(make_subproblem(inst, oracle)).objective
        for v in inst.vertices:
            sub = LpSubproblem(inst, frozenset(inst.vertices) - {v},
                               tuple(sorted(inst.edge_ids)), oracle,
                               dict(inst.capacities))
            assert solve_extreme(sub).objective >= full
