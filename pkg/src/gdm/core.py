"""Problem instances: vertex-capacitated multigraphs with per-endpoint demands.

All quantities are exact rationals (`fractions.Fraction`).  Nothing in this
package ever rounds through floats: downstream code branches on exact 0/1
values of LP variables, so tolerance-based arithmetic is off the table.
"""
from __future__ import annotations

import json
import math
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Iterable, Optional, Sequence


def rat(value) -> Fraction:
    """Coerce ints, strings like "3/4", and Fractions to Fraction."""
    if isinstance(value, Fraction):
        return value
    if isinstance(value, int):
        return Fraction(value)
    if isinstance(value, str):
        return Fraction(value)
    raise TypeError(f"not an exact rational: {value!r}")


@dataclass(frozen=True)
class Edge:
    """An edge (or hyperedge) with one demand per endpoint and a profit."""

    id: int
    endpoints: tuple[tuple[int, Fraction], ...]  # (vertex, demand), declaration order
    profit: Fraction

    def __post_init__(self):
        verts = [v for v, _ in self.endpoints]
        if len(set(verts)) != len(verts):
            raise ValueError(f"edge {self.id}: endpoint vertices must be distinct")
        if not self.endpoints:
            raise ValueError(f"edge {self.id}: needs at least one endpoint")
        for _, d in self.endpoints:
            if d < 0:
                raise ValueError(f"edge {self.id}: negative demand")
        if self.profit < 0:
            raise ValueError(f"edge {self.id}: negative profit")

    @property
    def vertices(self) -> tuple[int, ...]:
        return tuple(v for v, _ in self.endpoints)

    def demand_at(self, v: int) -> Fraction:
        for u, d in self.endpoints:
            if u == v:
                return d
        raise KeyError(f"vertex {v} is not an endpoint of edge {self.id}")


@dataclass(frozen=True)
class Solution:
    """A subset of edge ids."""

    edge_ids: frozenset[int]

    def __init__(self, edge_ids: Iterable[int]):
        object.__setattr__(self, "edge_ids", frozenset(edge_ids))

    def __contains__(self, eid: int) -> bool:
        return eid in self.edge_ids

    def __iter__(self):
        return iter(sorted(self.edge_ids))

    def __len__(self):
        return len(self.edge_ids)


class Instance:
    """A multigraph/hypergraph with capacities, demands and profits.

    Immutable after construction; all operations on it are pure functions.
    Edge ids must be dense integers 0..len(edges)-1.
    """

    def __init__(self, vertices: Sequence[int], edges: Sequence[Edge],
                 capacities: dict[int, Fraction], k: int = 2):
        self.vertices = tuple(vertices)
        self.edges = tuple(edges)
        self.capacities = {v: rat(b) for v, b in capacities.items()}
        self.k = k
        self._validate_shape()
        self._incidence: dict[int, tuple[int, ...]] = {v: () for v in self.vertices}
        inc: dict[int, list[int]] = {v: [] for v in self.vertices}
        for e in self.edges:
            for v in e.vertices:
                inc[v].append(e.id)
        self._incidence = {v: tuple(ids) for v, ids in inc.items()}

    def _validate_shape(self):
        vset = set(self.vertices)
        if len(vset) != len(self.vertices):
            raise ValueError("duplicate vertex ids")
        for i, e in enumerate(self.edges):
            if e.id != i:
                raise ValueError(f"edge ids must be dense 0..m-1, got {e.id} at {i}")
            if len(e.endpoints) > self.k:
                raise ValueError(f"edge {e.id} has more than k={self.k} endpoints")
            for v, _ in e.endpoints:
                if v not in vset:
                    raise ValueError(f"edge {e.id} references unknown vertex {v}")
        for v in self.vertices:
            if v not in self.capacities:
                raise ValueError(f"vertex {v} has no capacity")
            if self.capacities[v] < 0:
                raise ValueError(f"vertex {v}: negative capacity")

    # -- accessors ---------------------------------------------------------

    @property
    def edge_ids(self) -> tuple[int, ...]:
        return tuple(e.id for e in self.edges)

    def edge(self, eid: int) -> Edge:
        try:
            return self.edges[eid]
        except IndexError:
            raise KeyError(f"unknown edge id {eid}") from None

    def incident(self, v: int) -> tuple[int, ...]:
        """delta(v): ids of edges having v as an endpoint."""
        try:
            return self._incidence[v]
        except KeyError:
            raise KeyError(f"unknown vertex {v}") from None

    def demand(self, v: int, eid: int) -> Fraction:
        return self.edge(eid).demand_at(v)

    def profit(self, edge_ids: Iterable[int]) -> Fraction:
        return sum((self.edge(e).profit for e in edge_ids), Fraction(0))

    def replace_edges(self, edges: Sequence[Edge], capacities=None) -> "Instance":
        return Instance(self.vertices, edges,
                        capacities if capacities is not None else self.capacities,
                        self.k)


# -- operations ------------------------------------------------------------


def load(instance: Instance, v: int, S) -> Fraction:
    """Total demand placed on v by the edges of S incident to it."""
    ids = S.edge_ids if isinstance(S, Solution) else frozenset(S)
    for e in ids:
        instance.edge(e)  # raises on unknown edge ids
    total = Fraction(0)
    for e in instance.incident(v):
        if e in ids:
            total += instance.demand(v, e)
    return total


def is_feasible(instance: Instance, S, matroid=None) -> bool:
    """Capacity feasibility at every vertex, plus matroid independence."""
    ids = S.edge_ids if isinstance(S, Solution) else frozenset(S)
    for v in instance.vertices:
        if load(instance, v, ids) > instance.capacities[v]:
            return False
    if matroid is not None:
        if not ids <= matroid.ground:
            return False
        if not matroid.is_independent(ids):
            return False
    return True


def validate(instance: Instance) -> tuple[Instance, list[int]]:
    """Drop edges that are infeasible by themselves; re-id densely.

    Idempotent.  Returns the cleaned instance and the dropped (original) ids.
    """
    kept: list[Edge] = []
    dropped: list[int] = []
    for e in instance.edges:
        if all(d <= instance.capacities[v] for v, d in e.endpoints):
            kept.append(e)
        else:
            dropped.append(e.id)
    if not dropped:
        return instance, []
    reidd = [Edge(i, e.endpoints, e.profit) for i, e in enumerate(kept)]
    return instance.replace_edges(reidd), dropped


def scale_integral(instance: Instance) -> Instance:
    """Scale all demands and capacities by the lcm of their denominators."""
    dens = [b.denominator for b in instance.capacities.values()]
    for e in instance.edges:
        dens.extend(d.denominator for _, d in e.endpoints)
    lcm = 1
    for q in dens:
        lcm = lcm * q // math.gcd(lcm, q)
    if lcm == 1:
        return instance
    edges = [Edge(e.id, tuple((v, d * lcm) for v, d in e.endpoints), e.profit)
             for e in instance.edges]
    caps = {v: b * lcm for v, b in instance.capacities.items()}
    return instance.replace_edges(edges, caps)


def perturb(instance: Instance) -> Instance:
    """Make all demands distinct without changing feasibility of any edge set.

    First scales demands and capacities to integers, then subtracts
    (2i + j) / (3 m^2) from the j'th endpoint of the i'th edge, where m is the
    edge count, i runs 1..m over declaration order and j runs 0..k-1.  The
    amount removed at any single vertex stays below one demand unit, so for
    integral instances the feasible subsets are exactly preserved.
    """
    inst = scale_integral(instance)
    m = len(inst.edges)
    if m == 0:
        return inst
    denom = 3 * m * m
    edges = []
    for e in inst.edges:
        eps = []
        for j, (v, d) in enumerate(e.endpoints):
            delta = Fraction(2 * (e.id + 1) + j, denom)
            nd = d - delta
            if nd < 0:
                nd = Fraction(0)  # zero demands cannot go negative
            eps.append((v, nd))
        edges.append(Edge(e.id, tuple(eps), e.profit))
    return inst.replace_edges(edges)


def classify(instance: Instance) -> dict:
    """Structural classification used to dispatch pruning strategies.

    Returns bipartiteness, conflict-freeness, a consistent edge ordering if
    one exists (demand-nondecreasing at every vertex), and the smallest eps
    with every demand <= eps * capacity.
    """
    return {
        "bipartite": _is_bipartite(instance),
        "conflict_free": _conflict_free(instance),
        "consistent_order": _consistent_order(instance),
        "epsilon_small": _epsilon_small(instance),
    }


def _is_bipartite(instance: Instance) -> bool:
    if instance.k != 2 or any(len(e.endpoints) != 2 for e in instance.edges):
        return False
    colour: dict[int, int] = {}
    for start in instance.vertices:
        if start in colour:
            continue
        colour[start] = 0
        queue = [start]
        while queue:
            v = queue.pop()
            for eid in instance.incident(v):
                for u in instance.edge(eid).vertices:
                    if u == v:
                        continue
                    if u not in colour:
                        colour[u] = 1 - colour[v]
                        queue.append(u)
                    elif colour[u] == colour[v]:
                        return False
    return True


def bipartition(instance: Instance) -> Optional[tuple[set[int], set[int]]]:
    """Two-colouring of the vertices, or None if the graph is not bipartite."""
    if not _is_bipartite(instance):
        return None
    colour: dict[int, int] = {}
    for start in instance.vertices:
        if start in colour:
            continue
        colour[start] = 0
        queue = [start]
        while queue:
            v = queue.pop()
            for eid in instance.incident(v):
                for u in instance.edge(eid).vertices:
                    if u != v and u not in colour:
                        colour[u] = 1 - colour[v]
                        queue.append(u)
    left = {v for v, c in colour.items() if c == 0}
    return left, set(instance.vertices) - left


def _conflict_free(instance: Instance) -> bool:
    ids = instance.edge_ids
    for i, e in enumerate(ids):
        for f in ids[i + 1:]:
            if not is_feasible(instance, {e, f}):
                return False
    return True


def _consistent_order(instance: Instance) -> Optional[list[int]]:
    # Precedence arcs between consecutive demand-groups at each vertex; ties
    # produce no arc.  Kahn's algorithm with lowest-id tie-breaking.
    succ: dict[int, set[int]] = {e: set() for e in instance.edge_ids}
    indeg = {e: 0 for e in instance.edge_ids}
    for v in instance.vertices:
        inc = sorted(instance.incident(v), key=lambda e: (instance.demand(v, e), e))
        groups: list[list[int]] = []
        for eid in inc:
            if groups and instance.demand(v, groups[-1][0]) == instance.demand(v, eid):
                groups[-1].append(eid)
            else:
                groups.append([eid])
        for g1, g2 in zip(groups, groups[1:]):
            for a in g1:
                for b in g2:
                    if b not in succ[a]:
                        succ[a].add(b)
                        indeg[b] += 1
    import heapq
    ready = [e for e in instance.edge_ids if indeg[e] == 0]
    heapq.heapify(ready)
    order: list[int] = []
    while ready:
        e = heapq.heappop(ready)
        order.append(e)
        for f in sorted(succ[e]):
            indeg[f] -= 1
            if indeg[f] == 0:
                heapq.heappush(ready, f)
    if len(order) != len(instance.edge_ids):
        return None
    return order


def _epsilon_small(instance: Instance) -> Fraction:
    worst = Fraction(0)
    for e in instance.edges:
        for v, d in e.endpoints:
            b = instance.capacities[v]
            if d == 0:
                continue
            if b == 0:
                # validated instances never hit this; treat as maximally large
                return Fraction(1)
            worst = max(worst, d / b)
    return worst


# -- JSON interchange ------------------------------------------------------


def instance_to_json(instance: Instance) -> dict:
    return {
        "vertices": [{"id": v, "capacity": str(instance.capacities[v])}
                     for v in instance.vertices],
        "edges": [{"id": e.id,
                   "endpoints": [{"v": v, "demand": str(d)} for v, d in e.endpoints],
                   "profit": str(e.profit)}
                  for e in instance.edges],
        "k": instance.k,
    }


def instance_from_json(data: dict) -> Instance:
    vertices = [v["id"] for v in data["vertices"]]
    caps = {v["id"]: rat(v["capacity"]) for v in data["vertices"]}
    edges = [Edge(e["id"],
                  tuple((ep["v"], rat(ep["demand"])) for ep in e["endpoints"]),
                  rat(e["profit"]))
             for e in data["edges"]]
    return Instance(vertices, edges, caps, data.get("k", 2))


def read_instance(path: str) -> Instance:
    with open(path) as fh:
        return instance_from_json(json.load(fh))


def write_instance(instance: Instance, path: str):
    with open(path, "w") as fh:
        json.dump(instance_to_json(instance), fh, indent=2, sort_keys=True)
        fh.write("\n")
