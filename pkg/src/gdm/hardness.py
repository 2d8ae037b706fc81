"""SAT-to-demand-matching instance generator and its equivalence verifier.

Each variable becomes a three-vertex gadget with two heavy edges (choose one
side); each clause becomes a unit-capacity vertex whose unit edges attach to
the literal sides that would satisfy it.  A formula is satisfiable exactly
when the optimum matching value reaches heavy * |X| + |C|, which the
verifier checks by truth-table enumeration against the exact solver.
"""
from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction
from typing import Sequence

from .core import Edge, Instance, validate
from .oracle import exact_dm


@dataclass(frozen=True)
class Cnf:
    n_vars: int
    clauses: tuple  # tuple of tuples of signed ints, 1-based variables

    def __post_init__(self):
        for cl in self.clauses:
            if not cl:
                raise ValueError("empty clause")
            for lit in cl:
                if lit == 0 or abs(lit) > self.n_vars:
                    raise ValueError(f"literal {lit} out of range")

    def satisfiable(self) -> bool:
        for mask in range(1 << self.n_vars):
            if all(any((lit > 0) == bool(mask >> (abs(lit) - 1) & 1)
                       for lit in cl) for cl in self.clauses):
                return True
        return False


def parse_dimacs(text: str) -> Cnf:
    n_vars = 0
    clauses = []
    cur: list[int] = []
    for raw in text.splitlines():
        line = raw.strip()
        if not line or line.startswith(("c", "%")):
            continue
        if line.startswith("p"):
            parts = line.split()
            if len(parts) < 4 or parts[1] != "cnf":
                raise ValueError(f"bad problem line: {line!r}")
            n_vars = int(parts[2])
            continue
        for tok in line.split():
            lit = int(tok)
            if lit == 0:
                if cur:
                    clauses.append(tuple(cur))
                    cur = []
            else:
                cur.append(lit)
    if cur:
        clauses.append(tuple(cur))
    return Cnf(n_vars, tuple(clauses))


def incidence_degree(cnf: Cnf) -> int:
    """Max degree of the variable-clause incidence graph."""
    var_deg = [0] * (cnf.n_vars + 1)
    best = 0
    for cl in cnf.clauses:
        best = max(best, len(cl))
        for lit in cl:
            var_deg[abs(lit)] += 1
    return max(best, max(var_deg, default=0))


def sat_to_dm(cnf: Cnf) -> tuple:
    """Build the matching instance; returns (instance, vertex label map).

    Vertices: u_c per clause (capacity 1) and t_x, f_x, v_x per variable
    (capacity D, the incidence degree).  Heavy edges v_x t_x and v_x f_x
    carry demand and profit D; unit edges u_c t_x for negative occurrences
    and u_c f_x for positive ones.  The graph is bipartite with the t/f
    vertices on one side.
    """
    D = Fraction(incidence_degree(cnf))
    labels: dict[int, str] = {}
    vid = 0

    def fresh(name: str) -> int:
        nonlocal vid
        labels[vid] = name
        vid += 1
        return vid - 1

    u = {c: fresh(f"u_c{c}") for c in range(len(cnf.clauses))}
    t = {x: fresh(f"t_x{x}") for x in range(1, cnf.n_vars + 1)}
    f = {x: fresh(f"f_x{x}") for x in range(1, cnf.n_vars + 1)}
    v = {x: fresh(f"v_x{x}") for x in range(1, cnf.n_vars + 1)}

    caps = {u[c]: Fraction(1) for c in u}
    for x in range(1, cnf.n_vars + 1):
        caps[t[x]] = D
        caps[f[x]] = D
        caps[v[x]] = D

    edges: list[Edge] = []

    def add(a, b, w):
        edges.append(Edge(len(edges), ((a, w), (b, w)), w))

    for x in range(1, cnf.n_vars + 1):
        add(v[x], t[x], D)
        add(v[x], f[x], D)
    for c, cl in enumerate(cnf.clauses):
        for lit in cl:
            x = abs(lit)
            add(u[c], t[x] if lit < 0 else f[x], Fraction(1))

    inst = Instance(sorted(labels), edges, caps, k=2)
    cleaned, dropped = validate(inst)
    assert not dropped, "reduction edges always fit alone"
    return cleaned, labels


def reduction_target(cnf: Cnf) -> Fraction:
    return Fraction(incidence_degree(cnf)) * cnf.n_vars + len(cnf.clauses)


def verify_reduction(cnf: Cnf, cap: int = 24) -> bool:
    """Does (optimum == D|X| + |C|) match satisfiability?  A test oracle."""
    if cnf.n_vars > 12:
        raise ValueError("truth-table verification capped at 12 variables")
    inst, _ = sat_to_dm(cnf)
    opt = exact_dm(inst, cap=cap)["opt_value"]
    target = reduction_target(cnf)
    assert opt <= target, "matching value above the reduction target"
    return (opt == target) == cnf.satisfiable()
