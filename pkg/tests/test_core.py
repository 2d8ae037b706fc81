import itertools
import json
import random
from fractions import Fraction as F

import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from gdm.core import (Edge, Instance, classify, instance_from_json,
                      instance_to_json, is_feasible, load, perturb,
                      scale_integral, validate)
from gdm.matroids import FreeMatroid, PartitionMatroid

from conftest import mk_instance, random_instance


def test_load_examples(k3, star_655):
    assert load(k3, 1, {0, 1}) == 2
    assert load(k3, 0, set()) == 0
    assert load(star_655, 0, {0, 1}) == 11


def test_load_unknown_ids(k3):
    with pytest.raises(KeyError):
        load(k3, 99, {0})
    with pytest.raises(KeyError):
        load(k3, 0, {42})


def test_is_feasible_examples(k3):
    free = FreeMatroid(k3.edge_ids)
    assert is_feasible(k3, {0}, free)
    assert not is_feasible(k3, {0, 1}, free)
    two = mk_instance({0: 5, 1: 5},
                      [(((0, 1), (1, 1)), 1), (((0, 1), (1, 1)), 1)])
    pm = PartitionMatroid([[0, 1]], [1])
    assert not is_feasible(two, {0, 1}, pm)
    assert is_feasible(two, {0, 1})


def test_validate_drops_oversized():
    inst = mk_instance({0: 3, 1: 9}, [(((0, 5), (1, 1)), 4),
                                      (((0, 1), (1, 2)), 2)])
    cleaned, dropped = validate(inst)
    assert dropped == [0]
    assert len(cleaned.edges) == 1 and cleaned.edges[0].profit == 2
    again, dropped2 = validate(cleaned)
    assert dropped2 == [] and again is cleaned


def test_validate_identity(star_655):
    cleaned, dropped = validate(star_655)
    assert dropped == [] and cleaned is star_655


def test_perturb_two_equal_demands():
    # two edges with demand 3 at the shared vertex become 3 - 2/12, 3 - 4/12
    inst = mk_instance({0: 6, 1: 6, 2: 6},
                       [(((0, 3), (1, 3)), 1), (((0, 3), (2, 3)), 1)])
    pert = perturb(inst)
    assert pert.demand(0, 0) == F(3) - F(2, 12)
    assert pert.demand(0, 1) == F(3) - F(4, 12)
    demands = [d for e in pert.edges for _, d in e.endpoints]
    assert len(set(demands)) == len(demands)


def test_perturb_scales_first():
    inst = mk_instance({0: F("3/2"), 1: 2}, [(((0, F("1/2")), (1, 1)), 1)])
    pert = perturb(inst)
    assert pert.capacities[0] == 3  # scaled by lcm of denominators
    assert pert.demand(0, 0) == 1 - F(2, 3)


@settings(max_examples=60, deadline=None)
@given(st.randoms(use_true_random=False))
def test_perturb_preserves_feasibility_exhaustively(pyrng):
    inst = random_instance(pyrng, n_max=5, m_max=6, demand_max=4, cap_max=6)
    pert = perturb(inst)
    ids = inst.edge_ids
    assert pert.edge_ids == ids
    for r in range(len(ids) + 1):
        for combo in itertools.combinations(ids, r):
            assert is_feasible(inst, combo) == is_feasible(pert, combo)


@settings(max_examples=60, deadline=None)
@given(st.randoms(use_true_random=False))
def test_load_additive_on_disjoint_sets(pyrng):
    inst = random_instance(pyrng, n_max=6, m_max=8)
    ids = list(inst.edge_ids)
    pyrng.shuffle(ids)
    cut = len(ids) // 2
    S, T = set(ids[:cut]), set(ids[cut:])
    for v in inst.vertices:
        assert load(inst, v, S | T) == load(inst, v, S) + load(inst, v, T)


def test_classify_k3(k3):
    cls = classify(k3)
    assert cls["bipartite"] is False
    assert cls["conflict_free"] is False  # any two edges overload a vertex
    assert cls["consistent_order"] is not None  # symmetric demands
    assert cls["epsilon_small"] == 1


def test_classify_consistent_order_is_demand_sorted():
    rng = random.Random(5)
    for _ in range(25):
        inst = random_instance(rng, n_max=6, m_max=8)
        # symmetric demands always admit a consistent ordering
        sym = mk_instance(
            {v: inst.capacities[v] * 2 for v in inst.vertices},
            [(tuple((v, e.endpoints[0][1]) for v, _ in e.endpoints), e.profit)
             for e in inst.edges])
        order = classify(sym)["consistent_order"]
        assert order is not None
        pos = {e: i for i, e in enumerate(order)}
        for v in sym.vertices:
            inc = sorted(sym.incident(v), key=pos.get)
            assert all(sym.demand(v, a) <= sym.demand(v, b)
                       for a, b in zip(inc, inc[1:]))


def test_classify_no_consistent_order():
    # e0 < e1 at vertex 0 but e1 < e0 at vertex 1: cyclic precedence
    inst = mk_instance({0: 10, 1: 10},
                       [(((0, 1), (1, 5)), 1), (((0, 2), (1, 3)), 1)])
    assert classify(inst)["consistent_order"] is None


def test_classify_epsilon_small():
    inst = mk_instance({0: 8, 1: 8, 2: 8},
                       [(((0, 1), (1, 1)), 1), (((0, 1), (2, 1)), 1)])
    assert classify(inst)["epsilon_small"] == F(1, 8)


def test_classify_bipartite():
    even = mk_instance({0: 2, 1: 2, 2: 2, 3: 2},
                       [(((0, 1), (1, 1)), 1), (((1, 1), (2, 1)), 1),
                        (((2, 1), (3, 1)), 1), (((3, 1), (0, 1)), 1)])
    assert classify(even)["bipartite"] is True


def test_scale_integral_noop_for_integers(star_655):
    assert scale_integral(star_655) is star_655


def test_json_roundtrip(star_655):
    data = instance_to_json(star_655)
    text = json.dumps(data)
    back = instance_from_json(json.loads(text))
    assert back.edge_ids == star_655.edge_ids
    assert back.capacities == star_655.capacities
    assert all(back.edge(e.id).endpoints == e.endpoints
               for e in star_655.edges)


def test_json_accepts_fraction_strings():
    data = {"vertices": [{"id": 0, "capacity": "7/2"}],
            "edges": [{"id": 0, "endpoints": [{"v": 0, "demand": "3/2"}],
                       "profit": "5"}],
            "k": 2}
    inst = instance_from_json(data)
    assert inst.capacities[0] == F(7, 2)
    assert inst.demand(0, 0) == F(3, 2)


def test_edge_invariants():
    with pytest.raises(ValueError):
        Edge(0, ((0, F(1)), (0, F(2))), F(1))  # repeated endpoint vertex
    with pytest.raises(ValueError):
        Edge(0, ((0, F(-1)),), F(1))
    with pytest.raises(ValueError):
        Instance([0], [Edge(0, ((0, F(1)), (1, F(1))), F(1))], {0: F(1)})
