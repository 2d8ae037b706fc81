"""Exact solvers: the ground truth every ratio in this package is checked against.

`exact_dm` is a branch and bound over edge inclusion with an LP bound from
the relaxation; `use_lp_bound=False` degrades it to a plain feasible-subset
search, which is the cross-check mode.  Both are desk-scale tools behind a
hard edge-count cap.
"""
from __future__ import annotations

import itertools
from fractions import Fraction
from typing import Optional

from .core import Instance, Solution, is_feasible
from .lp import LpSubproblem, solve_extreme
from .matroids import FreeMatroid, MatroidOracle


class OracleCapExceeded(Exception):
    pass


DEFAULT_CAP = 24


def exact_dm(instance: Instance, matroid: Optional[MatroidOracle] = None,
             cap: int = DEFAULT_CAP, use_lp_bound: bool = True) -> dict:
    """Maximum-profit feasible independent edge set, exactly.

    Returns {"opt_value": Fraction, "witness": Solution}.
    """
    if len(instance.edges) > cap:
        raise OracleCapExceeded(
            f"{len(instance.edges)} edges exceed the oracle cap {cap}")
    if matroid is None:
        matroid = FreeMatroid(instance.edge_ids)
    order = sorted(set(instance.edge_ids) & matroid.ground,
                   key=lambda e: (-instance.edge(e).profit, e))
    best_value = Fraction(0)
    best_set: frozenset = frozenset()
    caps = dict(instance.capacities)

    def bound(idx: int, oracle: MatroidOracle, residual: dict) -> Fraction:
        rest = [e for e in order[idx:] if e in oracle.ground]
        if not rest:
            return Fraction(0)
        if not use_lp_bound:
            return sum((instance.edge(e).profit for e in rest), Fraction(0))
        sub = LpSubproblem(instance, frozenset(instance.vertices),
                           tuple(sorted(rest)), oracle, residual, "max")
        return solve_extreme(sub).objective

    def recurse(idx: int, taken: list, value: Fraction,
                oracle: MatroidOracle, residual: dict):
        nonlocal best_value, best_set
        if value > best_value:
            best_value, best_set = value, frozenset(taken)
        if idx == len(order):
            return
        if value + bound(idx, oracle, residual) <= best_value:
            return
        e = order[idx]
        if e in oracle.ground:
            fits = all(residual[v] >= d for v, d in instance.edge(e).endpoints)
            if fits and oracle.is_independent({e}):
                for v, d in instance.edge(e).endpoints:
                    residual[v] -= d
                taken.append(e)
                recurse(idx + 1, taken, value + instance.edge(e).profit,
                        oracle.contract(e), residual)
                taken.pop()
                for v, d in instance.edge(e).endpoints:
                    residual[v] += d
        recurse(idx + 1, taken, value, oracle, residual)

    recurse(0, [], Fraction(0), matroid, caps)
    assert is_feasible(instance, best_set, matroid)
    return {"opt_value": best_value, "witness": Solution(best_set)}


def enumerate_dm(instance: Instance,
                 matroid: Optional[MatroidOracle] = None) -> dict:
    """Literal 2^m sweep; only for cross-checking exact_dm."""
    if matroid is None:
        matroid = FreeMatroid(instance.edge_ids)
    ids = sorted(set(instance.edge_ids) & matroid.ground)
    best_value = Fraction(0)
    best_set: frozenset = frozenset()
    for r in range(len(ids) + 1):
        for combo in itertools.combinations(ids, r):
            S = frozenset(combo)
            if is_feasible(instance, S, matroid):
                v = instance.profit(S)
                if v > best_value:
                    best_value, best_set = v, S
    return {"opt_value": best_value, "witness": Solution(best_set)}


def gap_report(instance: Instance, matroid: Optional[MatroidOracle] = None,
               cap: int = DEFAULT_CAP) -> dict:
    """LP optimum, exact optimum, and their exact ratio."""
    from .lp import lp_value
    if matroid is None:
        matroid = FreeMatroid(instance.edge_ids)
    lp = lp_value(instance, matroid)
    res = exact_dm(instance, matroid, cap)
    opt = res["opt_value"]
    gap = lp / opt if opt else Fraction(1)
    return {"lp": lp, "opt": opt, "gap": gap, "witness": res["witness"]}


def exact_base(instance: Instance, matroid: MatroidOracle,
               cap: int = DEFAULT_CAP) -> Optional[dict]:
    """Cheapest capacity-feasible base, or None when no base fits."""
    if len(instance.edges) > cap:
        raise OracleCapExceeded(
            f"{len(instance.edges)} edges exceed the oracle cap {cap}")
    ids = sorted(set(instance.edge_ids) & matroid.ground)
    r = matroid.full_rank()
    best: Optional[tuple[Fraction, frozenset]] = None
    for combo in itertools.combinations(ids, r):
        B = frozenset(combo)
        if not matroid.is_independent(B):
            continue
        if not is_feasible(instance, B):
            continue
        cost = instance.profit(B)
        if best is None or cost < best[0]:
            best = (cost, B)
    if best is None:
        return None
    return {"cost": best[0], "base": Solution(best[1])}
