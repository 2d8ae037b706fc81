"""Shared builders and independent oracles for the test suite.

The LP oracle here enumerates polytope vertices by solving square subsystems
with its own Gaussian elimination; it shares no code with the simplex under
test.  Random sweeps are seeded and deterministic.
"""
import itertools
import random
from fractions import Fraction as F

import pytest

from gdm.core import Edge, Instance, validate
from gdm.matroids import (FreeMatroid, GraphicMatroid, PartitionMatroid,
                          TransversalMatroid, UniformMatroid, make_matroid)

MATROID_KINDS = ("free", "uniform", "partition", "graphic", "transversal")


def mk_instance(vertex_caps, edge_spec, k=2):
    """edge_spec: list of (endpoints as ((v, demand), ...), profit)."""
    vs = sorted(vertex_caps)
    edges = [Edge(i, tuple((v, F(d)) for v, d in eps), F(p))
             for i, (eps, p) in enumerate(edge_spec)]
    return Instance(vs, edges, {v: F(c) for v, c in vertex_caps.items()}, k)


@pytest.fixture
def k3():
    return mk_instance({0: 1, 1: 1, 2: 1},
                       [(((0, 1), (1, 1)), 1),
                        (((1, 1), (2, 1)), 1),
                        (((2, 1), (0, 1)), 1)])


@pytest.fixture
def star_655():
    return mk_instance({0: 10, 1: 6, 2: 5, 3: 5},
                       [(((0, 6), (1, 6)), 6),
                        (((0, 5), (2, 5)), 5),
                        (((0, 5), (3, 5)), 5)])


def grid_instance(rows, cols, cap=2, demand=1, profit_fn=None):
    vs = list(range(rows * cols))
    spec = []
    for r in range(rows):
        for c in range(cols):
            v = r * cols + c
            if c + 1 < cols:
                spec.append((((v, demand), (v + 1, demand)),
                             profit_fn(len(spec)) if profit_fn else 1))
            if r + 1 < rows:
                spec.append((((v, demand), (v + cols, demand)),
                             profit_fn(len(spec)) if profit_fn else 1))
    return mk_instance({v: cap for v in vs}, spec)


def random_instance(rng, n_max=8, m_max=14, demand_max=6, cap_max=12,
                    profit_max=9, allow_parallel=True):
    n = rng.randint(2, n_max)
    m = rng.randint(1, m_max)
    vs = list(range(n))
    spec = []
    for _ in range(m):
        u, v = rng.sample(vs, 2)
        spec.append((((u, rng.randint(1, demand_max)),
                      (v, rng.randint(1, demand_max))), rng.randint(0, profit_max)))
    inst = mk_instance({v: rng.randint(1, cap_max) for v in vs}, spec)
    cleaned, _ = validate(inst)
    return cleaned


def random_matroid(rng, kind, instance):
    ids = list(instance.edge_ids)
    if not ids:
        return FreeMatroid(ids)
    if kind == "free":
        return FreeMatroid(ids)
    if kind == "uniform":
        return UniformMatroid(rng.randint(1, len(ids)), ids)
    if kind == "partition":
        shuffled = ids[:]
        rng.shuffle(shuffled)
        ncl = rng.randint(1, max(1, len(ids) // 2))
        classes = [[] for _ in range(ncl)]
        for i, e in enumerate(shuffled):
            classes[i % ncl].append(e)
        return PartitionMatroid([sorted(c) for c in classes],
                                [rng.randint(1, 3) for _ in range(ncl)])
    if kind == "graphic":
        return make_matroid({"kind": "graphic"}, instance)
    if kind == "transversal":
        outlets = range(max(2, len(ids) // 2))
        avail = {e: frozenset(rng.sample(list(outlets),
                                         rng.randint(1, min(3, len(outlets)))))
                 for e in ids}
        return TransversalMatroid(avail)
    raise ValueError(kind)


def sweep(seed, count, **kwargs):
    """Deterministic (instance, matroid, kind) triples cycling all kinds."""
    rng = random.Random(seed)
    out = []
    while len(out) < count:
        inst = random_instance(rng, **kwargs)
        if not inst.edges:
            continue
        kind = MATROID_KINDS[len(out) % len(MATROID_KINDS)]
        out.append((inst, random_matroid(rng, kind, inst), kind))
    return out


# -- independent LP oracle ----------------------------------------------------


def gauss_solve(A, b):
    """Solve a square rational system; None if singular."""
    n = len(A)
    M = [row[:] + [b[i]] for i, row in enumerate(A)]
    for col in range(n):
        piv = next((r for r in range(col, n) if M[r][col] != 0), None)
        if piv is None:
            return None
        M[col], M[piv] = M[piv], M[col]
        pv = M[col][col]
        M[col] = [x / pv for x in M[col]]
        for r in range(n):
            if r != col and M[r][col] != 0:
                f = M[r][col]
                M[r] = [x - f * y for x, y in zip(M[r], M[col])]
    return [M[i][n] for i in range(n)]


def lp_by_vertex_enumeration(n, le_rows, objective, eq_rows=(), minimize=False):
    """Optimum over the polytope by brute-force basis enumeration.

    le_rows: (coeffs, rhs) inequalities (include nonnegativity explicitly);
    eq_rows are always tight.  Returns (value, argmax) or None if infeasible.
    """
    rows = [(list(c), F(r)) for c, r in le_rows]
    eqs = [(list(c), F(r)) for c, r in eq_rows]
    best = None
    need = n - len(eqs)
    for combo in itertools.combinations(range(len(rows)), need):
        A = [eqs[i][0] for i in range(len(eqs))] + [rows[i][0] for i in combo]
        b = [eqs[i][1] for i in range(len(eqs))] + [rows[i][1] for i in combo]
        x = gauss_solve(A, b)
        if x is None:
            continue
        if any(sum(c * xi for c, xi in zip(coef, x)) > rhs
               for coef, rhs in rows):
            continue
        if any(sum(c * xi for c, xi in zip(coef, x)) != rhs
               for coef, rhs in eqs):
            continue
        val = sum(c * xi for c, xi in zip(objective, x))
        if best is None or (val < best[0] if minimize else val > best[0]):
            best = (val, x)
    return best


def full_lp_rows(instance, oracle, edge_order):
    """Every capacity, box, nonnegativity and rank constraint, explicitly."""
    idx = {e: j for j, e in enumerate(edge_order)}
    rows = []
    for v in instance.vertices:
        coeffs = [F(0)] * len(edge_order)
        touched = False
        for e in instance.incident(v):
            if e in idx:
                coeffs[idx[e]] = instance.demand(v, e)
                touched = True
        if touched:
            rows.append((coeffs, instance.capacities[v]))
    for r in range(1, len(edge_order) + 1):
        for combo in itertools.combinations(edge_order, r):
            coeffs = [F(0)] * len(edge_order)
            for e in combo:
                coeffs[idx[e]] = F(1)
            rows.append((coeffs, F(oracle.rank(combo))))
    for e in edge_order:
        coeffs = [F(0)] * len(edge_order)
        coeffs[idx[e]] = F(-1)
        rows.append((coeffs, F(0)))
    return rows
