"""Iterated relaxation: solve, fix exact 0/1 variables, drop capacities.

The loop solves the relaxation to a basic optimum, permanently deletes
0-edges, contracts 1-edges into the partial solution, and otherwise drops
the capacity constraint of a vertex whose fractional slack count is at most
k.  Runtime audits enforce the guarantees the accounting relies on: the drop
score bound, non-loop contractions, the potential inequality that yields
p(M') >= OPT(LP), and the per-vertex overload bound of the output.
"""
from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction

from .core import Instance, Solution, load
from .lp import Infeasible, LpSubproblem, solve_extreme
from .matroids import MatroidOracle


@dataclass(frozen=True)
class RelaxedOutput:
    """Result of a relaxation run: independent set, large sets, trace."""

    m_prime: frozenset
    large: dict  # v -> tuple of the <= k largest-demand incident edges
    trace: tuple  # iteration events, serialisable via trace_to_json


def _largest_edges(instance: Instance, v: int, edge_set, k: int) -> tuple:
    inc = [e for e in instance.incident(v) if e in edge_set]
    inc.sort(key=lambda e: (-instance.demand(v, e), e))
    return tuple(inc[:k])


def _drop_scores(instance: Instance, W, F, x):
    scores = {}
    for v in sorted(W):
        inc = [e for e in instance.incident(v) if e in F]
        scores[v] = len(inc) - sum((x[e] for e in inc), Fraction(0))
    return scores


def _run(instance: Instance, oracle: MatroidOracle, mode: str):
    k = instance.k
    F = set(instance.edge_ids) & oracle.ground
    W = set(instance.vertices)
    b = dict(instance.capacities)
    cur = oracle
    fixed: set[int] = set()
    trace: list[dict] = []
    cut_pool: list = []
    prev_potential = None
    first = True
    sign = 1 if mode == "max" else -1

    while F:
        sub = LpSubproblem(instance, frozenset(W), tuple(sorted(F)), cur,
                           b, mode, cut_pool)
        try:
            fp = solve_extreme(sub)
        except Infeasible:
            if first and mode == "base":
                raise
            raise RuntimeError("relaxation became infeasible mid-run; "
                               "this contradicts the restriction argument")
        first = False
        x = fp.values

        # potential p(fixed) + z is monotone: nondecreasing for max mode,
        # nonincreasing for base mode (fix-1 steps change z by at most p_e)
        potential = instance.profit(fixed) + fp.objective
        if prev_potential is not None:
            assert sign * (potential - prev_potential) >= 0, \
                "LP objective accounting violated"
        prev_potential = potential

        zero = [e for e in sorted(F) if x[e] == 0]
        one = [e for e in sorted(F) if x[e] == 1]
        if zero:
            e = zero[0]
            F.remove(e)
            cur = cur.delete(e)
            trace.append({"event": "fix0", "edge": e, "lp": str(fp.objective)})
        elif one:
            e = one[0]
            F.remove(e)
            cur = cur.contract(e)  # raises ContractLoopError on a loop
            fixed.add(e)
            for v, d in instance.edge(e).endpoints:
                b[v] -= d
                assert v not in W or b[v] >= 0, \
                    "residual capacity went negative on a 1-fix"
            trace.append({"event": "fix1", "edge": e, "lp": str(fp.objective)})
        else:
            assert W, ("fractional extreme point over a pure matroid "
                       "polytope; integrality of the polytope is violated")
            scores = _drop_scores(instance, W, F, x)
            v = min(sorted(W), key=lambda u: (scores[u], u))
            assert scores[v] <= k, \
                f"drop score {scores[v]} exceeds k={k} at vertex {v}"
            W.remove(v)
            trace.append({"event": "drop", "vertex": v,
                          "score": str(scores[v]), "lp": str(fp.objective)})

    return frozenset(fixed), tuple(trace)


def iterated_relax(instance: Instance, oracle: MatroidOracle) -> RelaxedOutput:
    """Maximisation pass.  Requires a validated instance.

    The output is independent in the input matroid, has profit at least the
    LP optimum, and at every vertex the demand of all but the k largest
    chosen edges fits the capacity.  All three facts are asserted.
    """
    from .lp import lp_value
    initial = lp_value(instance, oracle)
    m_prime, trace = _run(instance, oracle, "max")
    assert oracle.is_independent(m_prime), "output not independent"
    p = instance.profit(m_prime)
    assert p >= initial, "profit fell below the LP optimum"
    large = {}
    for v in instance.vertices:
        L = _largest_edges(instance, v, m_prime, instance.k)
        rest = [e for e in instance.incident(v) if e in m_prime and e not in L]
        assert load(instance, v, rest) <= instance.capacities[v], \
            f"overload beyond the {instance.k} largest edges at {v}"
        large[v] = L
    return RelaxedOutput(m_prime, large, trace)


def iterated_base(instance: Instance, oracle: MatroidOracle) -> Solution:
    """Base-polytope pass: min-cost base with bounded capacity violation.

    Raises lp.Infeasible when the base relaxation is empty (there is then no
    integral point either).
    """
    from .lp import make_subproblem
    if not oracle.ground <= set(instance.edge_ids):
        raise ValueError("matroid ground set must consist of instance edges")
    initial = solve_extreme(make_subproblem(instance, oracle, "base")).objective
    base, trace = _run(instance, oracle, "base")
    assert oracle.is_independent(base)
    assert len(base) == oracle.full_rank(), "returned set is not a base"
    assert instance.profit(base) <= initial, "cost exceeds the LP optimum"
    for v in instance.vertices:
        inc = [e for e in instance.incident(v) if e in base]
        if inc:
            worst = max(instance.demand(v, e) for e in inc)
            assert load(instance, v, inc) <= instance.capacities[v] \
                + instance.k * worst, f"congestion bound violated at {v}"
    return Solution(base)


def bicriteria_base(instance: Instance, oracle: MatroidOracle) -> dict:
    """Corollary wrapper: certify cost <= LP-B and load <= (1+k) b_v.

    The (1+k) factor needs every edge to fit its endpoints by itself; on an
    unvalidated instance only the additive k * max-demand bound is certified
    (infeasibility detection still runs first either way).
    """
    from .lp import lp_value
    base = iterated_base(instance, oracle)
    lpb = lp_value(instance, oracle, mode="base")
    cost = instance.profit(base.edge_ids)
    assert cost <= lpb
    k = instance.k
    validated = all(d <= instance.capacities[v]
                    for e in instance.edges for v, d in e.endpoints)
    if validated:
        for v in instance.vertices:
            lv = load(instance, v, base.edge_ids)
            assert lv <= (1 + k) * instance.capacities[v], \
                f"(1, 1+k) violation bound failed at {v}"
    return {"base": base, "cost": cost, "lp": lpb,
            "factor_certified": validated}


def trace_to_json(trace) -> list:
    return [dict(ev) for ev in trace]
