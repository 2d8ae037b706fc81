"""Exact rational LP solving for the capacity/matroid relaxations.

The engine is a dense two-phase simplex over `fractions.Fraction` with
Bland's anti-cycling rule, so every returned optimum is a basic (extreme
point) solution and 0/1 coordinates are detected exactly.  Rank constraints
are generated lazily by the matroid separation oracle and re-checked before
a point is returned.
"""
from __future__ import annotations

from dataclasses import dataclass, field
from fractions import Fraction
from typing import Optional

from .core import Instance
from .matroids import MatroidOracle


class Infeasible(Exception):
    """The LP has no feasible point (only possible in base mode)."""


class _Unbounded(Exception):
    pass


# -- generic simplex --------------------------------------------------------


def simplex_solve(n: int, rows: list[tuple[list[Fraction], str, Fraction]],
                  objective: list[Fraction], minimize: bool = False):
    """Solve {max|min} c.x st rows, x >= 0.  Senses are '<=' or '=='.

    All right-hand sides must be nonnegative (true for every LP this package
    builds).  Returns (x, objective value, tight row indices, basis columns).
    """
    for coeffs, sense, rhs in rows:
        if rhs < 0:
            raise ValueError("internal: negative rhs fed to simplex")
        if sense not in ("<=", "=="):
            raise ValueError(f"bad sense {sense}")

    m = len(rows)
    slack_of: dict[int, int] = {}
    art_of: dict[int, int] = {}
    ncols = n
    for i, (_, sense, _) in enumerate(rows):
        if sense == "<=":
            slack_of[i] = ncols
            ncols += 1
    art_start = ncols
    for i, (_, sense, _) in enumerate(rows):
        if sense == "==":
            art_of[i] = ncols
            ncols += 1

    T = [[Fraction(0)] * (ncols + 1) for _ in range(m)]
    basis = [0] * m
    for i, (coeffs, sense, rhs) in enumerate(rows):
        for j, c in enumerate(coeffs):
            T[i][j] = c
        T[i][ncols] = rhs
        col = slack_of.get(i, art_of.get(i))
        T[i][col] = Fraction(1)
        basis[i] = col

    def pivot(r, c):
        piv = T[r][c]
        T[r] = [v / piv for v in T[r]]
        for i in range(m):
            if i != r and T[i][c] != 0:
                f = T[i][c]
                T[i] = [a - f * b for a, b in zip(T[i], T[r])]
        basis[r] = c

    def run(costs: list[Fraction], allowed: int):
        # maximize costs.x with Bland's rule over columns [0, allowed)
        while True:
            z = [Fraction(0)] * allowed
            for i in range(m):
                cb = costs[basis[i]] if basis[i] < allowed else Fraction(0)
                if cb != 0:
                    for j in range(allowed):
                        z[j] += cb * T[i][j]
            enter = -1
            for j in range(allowed):
                if costs[j] - z[j] > 0:
                    enter = j
                    break
            if enter < 0:
                return
            leave, best = -1, None
            for i in range(m):
                if T[i][enter] > 0:
                    ratio = T[i][ncols] / T[i][enter]
                    if best is None or ratio < best or (
                            ratio == best and basis[i] < basis[leave]):
                        best, leave = ratio, i
            if leave < 0:
                raise _Unbounded
            pivot(leave, enter)

    if art_of:
        costs1 = [Fraction(0)] * ncols
        for col in art_of.values():
            costs1[col] = Fraction(-1)
        run(costs1, ncols)
        infeas = sum((T[i][ncols] for i in range(m) if basis[i] >= art_start),
                     Fraction(0))
        if infeas > 0:
            raise Infeasible("no feasible point")
        # pivot artificials out of the basis where possible; a zero row is a
        # redundant constraint and can stay (its rhs is 0)
        for i in range(m):
            if basis[i] >= art_start:
                for j in range(art_start):
                    if T[i][j] != 0:
                        pivot(i, j)
                        break

    costs2 = list(objective) + [Fraction(0)] * (ncols - n)
    if minimize:
        costs2 = [-c for c in costs2]
    run(costs2, art_start)

    x = [Fraction(0)] * n
    for i in range(m):
        if basis[i] < n:
            x[basis[i]] = T[i][ncols]
    obj = sum((objective[j] * x[j] for j in range(n)), Fraction(0))
    tight = []
    for i, (coeffs, sense, rhs) in enumerate(rows):
        lhs = sum((coeffs[j] * x[j] for j in range(n) if coeffs[j] != 0),
                  Fraction(0))
        if lhs == rhs:
            tight.append(i)
    return x, obj, tight, tuple(basis)


# -- subproblem layer -------------------------------------------------------


@dataclass
class LpSubproblem:
    """One LP of the iterated relaxation.

    W is the vertex set whose capacity constraints are still active, F the
    active edges, b_prime the residual capacities, mode 'max' for the
    independence polytope LP and 'base' for the min-cost base variant.
    The cut pool is shared down the iterations; sets are re-ranked against
    the current oracle whenever the LP is rebuilt.
    """

    instance: Instance
    W: frozenset
    F: tuple
    oracle: MatroidOracle
    b_prime: dict
    mode: str = "max"
    cut_pool: list = field(default_factory=list)


@dataclass(frozen=True)
class FractionalPoint:
    values: dict  # edge id -> Fraction, for every e in F
    basic: bool
    objective: Fraction
    tight: tuple = ()  # constraint descriptors that are tight at the point


def _build_rows(sub: LpSubproblem):
    F = list(sub.F)
    idx = {e: j for j, e in enumerate(F)}
    rows: list[tuple[list[Fraction], str, Fraction]] = []
    descr: list[tuple] = []
    for v in sorted(sub.W):
        inc = [e for e in sub.instance.incident(v) if e in idx]
        if not inc:
            continue
        coeffs = [Fraction(0)] * len(F)
        for e in inc:
            coeffs[idx[e]] = sub.instance.demand(v, e)
        rows.append((coeffs, "<=", sub.b_prime[v]))
        descr.append(("cap", v))
    for e in F:
        coeffs = [Fraction(0)] * len(F)
        coeffs[idx[e]] = Fraction(1)
        rows.append((coeffs, "<=", Fraction(sub.oracle.rank([e]))))
        descr.append(("box", e))
    fset = frozenset(F)
    seen = set()
    for A in sub.cut_pool:
        Af = frozenset(A) & fset
        if len(Af) <= 1 or Af in seen:
            continue  # singletons are covered by the boxes
        seen.add(Af)
        coeffs = [Fraction(0)] * len(F)
        for e in Af:
            coeffs[idx[e]] = Fraction(1)
        rows.append((coeffs, "<=", Fraction(sub.oracle.rank(Af))))
        descr.append(("rank", tuple(sorted(Af))))
    if sub.mode == "base":
        coeffs = [Fraction(1)] * len(F)
        rows.append((coeffs, "==", Fraction(sub.oracle.rank(fset))))
        descr.append(("base", None))
    return F, idx, rows, descr


_MAX_CUT_ROUNDS = 10000


def solve_extreme(sub: LpSubproblem) -> FractionalPoint:
    """Optimal basic point of the subproblem, with all rank constraints.

    Cutting-plane loop: solve with the current rows, separate, add the
    violated rank set, repeat.  Each added set is new, so the loop is finite.
    The final point is audited: capacities, boxes, and a fresh separation
    call must all pass.
    """
    if sub.mode not in ("max", "base"):
        raise ValueError(f"bad mode {sub.mode}")
    if not sub.F:
        # base mode: x(emptyset) = rank(emptyset) = 0 holds trivially
        return FractionalPoint({}, True, Fraction(0), ())
    profits = {e: sub.instance.edge(e).profit for e in sub.F}
    for _ in range(_MAX_CUT_ROUNDS):
        F, idx, rows, descr = _build_rows(sub)
        objective = [profits[e] for e in F]
        try:
            x, obj, tight, _basis = simplex_solve(
                len(F), rows, objective, minimize=(sub.mode == "base"))
        except Infeasible:
            raise Infeasible("no integral point in LP-B")
        xmap = {e: x[idx[e]] for e in F}
        sep = sub.oracle.separate({e: v for e, v in xmap.items() if v > 0})
        if sep.inside:
            _audit_point(sub, xmap)
            return FractionalPoint(xmap, True, obj,
                                   tuple(descr[i] for i in tight))
        got = sum((xmap[e] for e in sep.violated), Fraction(0)) \
            - sub.oracle.rank(sep.violated)
        assert got == sep.gap > 0, "separation reported a non-violated set"
        sub.cut_pool.append(frozenset(sep.violated))
    raise RuntimeError("cutting-plane loop failed to converge")


def _audit_point(sub: LpSubproblem, xmap: dict):
    for e, xe in xmap.items():
        assert 0 <= xe <= sub.oracle.rank([e]), f"box violated at {e}"
    for v in sub.W:
        lhs = sum((sub.instance.demand(v, e) * xe for e, xe in xmap.items()
                   if v in sub.instance.edge(e).vertices), Fraction(0))
        assert lhs <= sub.b_prime[v], f"capacity violated at {v}"
    if sub.mode == "base":
        assert sum(xmap.values(), Fraction(0)) == sub.oracle.rank(frozenset(xmap)), \
            "base equality violated"


def make_subproblem(instance: Instance, oracle: MatroidOracle,
                    mode: str = "max") -> LpSubproblem:
    F = tuple(sorted(set(instance.edge_ids) & oracle.ground))
    return LpSubproblem(instance, frozenset(instance.vertices), F, oracle,
                        dict(instance.capacities), mode)


def lp_value(instance: Instance, oracle: MatroidOracle,
             mode: str = "max") -> Fraction:
    """Optimum of the relaxation over the full instance."""
    return solve_extreme(make_subproblem(instance, oracle, mode)).objective
