"""Matroid oracles: independence, rank, delete/contract, polytope separation.

Every oracle is an immutable value; `delete` and `contract` return new
oracles.  Independence of A in a contracted oracle always equals independence
of A united with the contracted elements in the original matroid.

Separation over the rank constraints x(A) <= r(A) is per-kind: closed form
for free/uniform/partition, a min-cut formulation for graphic, and exhaustive
search over the support (hard-capped) for transversal.
"""
from __future__ import annotations

import itertools
from dataclasses import dataclass
from fractions import Fraction
from typing import Iterable, Optional


class ContractLoopError(Exception):
    """Contracting a loop; the iterated relaxation never legitimately does this."""


class SeparationCapExceeded(Exception):
    """Exhaustive separation refused: support larger than the honest cap."""


EXHAUSTIVE_SEPARATION_CAP = 22


@dataclass(frozen=True)
class SeparationResult:
    inside: bool
    violated: Optional[frozenset[int]] = None
    gap: Optional[Fraction] = None  # x(A) - rank(A) > 0 when violated


class MatroidOracle:
    """Base class.  Subclasses define `is_independent` over the current ground."""

    kind = "abstract"

    def __init__(self, ground: Iterable[int], contracted: Iterable[int] = ()):
        self.ground = frozenset(ground)
        self.contracted = frozenset(contracted)

    # -- interface ----------------------------------------------------------

    def is_independent(self, A: Iterable[int]) -> bool:
        raise NotImplementedError

    def delete(self, e: int) -> "MatroidOracle":
        raise NotImplementedError

    def contract(self, e: int) -> "MatroidOracle":
        raise NotImplementedError

    def _check_element(self, e: int):
        if e not in self.ground:
            raise KeyError(f"element {e} not in ground set")

    def _require_nonloop(self, e: int):
        self._check_element(e)
        if not self.is_independent({e}):
            raise ContractLoopError(
                f"element {e} is a loop in the current minor; contracting it "
                f"is invalid (contracted so far: {sorted(self.contracted)})")

    def rank(self, A: Iterable[int]) -> int:
        """Greedy insertion; exact for matroids by the exchange property."""
        picked: set[int] = set()
        for e in sorted(A):
            self._check_element(e)
            if self.is_independent(picked | {e}):
                picked.add(e)
        return len(picked)

    def full_rank(self) -> int:
        return self.rank(self.ground)

    # -- separation ---------------------------------------------------------

    def separate(self, x: dict[int, Fraction]) -> SeparationResult:
        """Find A minimising rank(A) - x(A); violation iff the minimum is < 0.

        The minimiser can always be taken inside the support of x, because
        adding a zero-value element never decreases rank(A) - x(A).
        """
        support = [e for e, xe in x.items() if xe > 0]
        for e in support:
            self._check_element(e)
        return self._separate_support(support, x)

    def _separate_support(self, support, x) -> SeparationResult:
        if len(support) > EXHAUSTIVE_SEPARATION_CAP:
            raise SeparationCapExceeded(
                f"{self.kind} separation is exhaustive over the support; "
                f"|support|={len(support)} exceeds the cap "
                f"{EXHAUSTIVE_SEPARATION_CAP}")
        best_gap = Fraction(0)
        best_set: Optional[frozenset[int]] = None
        for r in range(1, len(support) + 1):
            for combo in itertools.combinations(support, r):
                A = frozenset(combo)
                gap = sum((x[e] for e in A), Fraction(0)) - self.rank(A)
                if gap > best_gap:
                    best_gap, best_set = gap, A
        if best_set is None:
            return SeparationResult(True)
        return SeparationResult(False, best_set, best_gap)


class FreeMatroid(MatroidOracle):
    kind = "free"

    def is_independent(self, A) -> bool:
        return True

    def delete(self, e):
        self._check_element(e)
        return FreeMatroid(self.ground - {e}, self.contracted)

    def contract(self, e):
        self._require_nonloop(e)
        return FreeMatroid(self.ground - {e}, self.contracted | {e})

    def _separate_support(self, support, x) -> SeparationResult:
        over = frozenset(e for e in support if x[e] > 1)
        if not over:
            return SeparationResult(True)
        gap = sum((x[e] - 1 for e in over), Fraction(0))
        return SeparationResult(False, over, gap)


class UniformMatroid(MatroidOracle):
    """Independent iff |A| <= residual rank bound."""

    kind = "uniform"

    def __init__(self, rank_bound: int, ground, contracted=()):
        if rank_bound < 0:
            raise ValueError("rank bound must be >= 0")
        self.rank_bound = rank_bound
        ground = frozenset(ground)
        if rank_bound == 0 and not contracted:
            ground = frozenset()  # construction-time loops are dropped
        super().__init__(ground, contracted)

    @classmethod
    def _make(cls, rank_bound, ground, contracted):
        out = cls.__new__(cls)
        out.rank_bound = rank_bound
        MatroidOracle.__init__(out, ground, contracted)
        return out

    @property
    def _residual(self) -> int:
        return self.rank_bound - len(self.contracted)

    def is_independent(self, A) -> bool:
        return len(frozenset(A)) <= self._residual

    def delete(self, e):
        self._check_element(e)
        return UniformMatroid._make(self.rank_bound, self.ground - {e},
                                    self.contracted)

    def contract(self, e):
        self._require_nonloop(e)
        return UniformMatroid._make(self.rank_bound, self.ground - {e},
                                    self.contracted | {e})

    def _separate_support(self, support, x) -> SeparationResult:
        return _prefix_separation(support, x, self._residual)


class PartitionMatroid(MatroidOracle):
    """At most bounds[i] elements from class i."""

    kind = "partition"

    def __init__(self, classes: list[list[int]], bounds: list[int],
                 ground=None, contracted=()):
        if len(classes) != len(bounds):
            raise ValueError("one bound per class required")
        if any(b < 0 for b in bounds):
            raise ValueError("bounds must be >= 0")
        self.classes = [frozenset(c) for c in classes]
        self.bounds = list(bounds)
        self._class_of: dict[int, int] = {}
        for i, c in enumerate(self.classes):
            for e in c:
                if e in self._class_of:
                    raise ValueError(f"element {e} in two classes")
                self._class_of[e] = i
        declared = frozenset(self._class_of)
        contracted = frozenset(contracted)
        if ground is None:
            ground = declared
        ground = frozenset(ground)
        if not ground <= declared:
            raise ValueError("ground contains elements outside every class")
        if not contracted:
            # construction-time loops (bound-0 classes) are dropped
            ground = frozenset(e for e in ground
                               if self.bounds[self._class_of[e]] > 0)
        super().__init__(ground, contracted)

    @classmethod
    def _make(cls, classes, bounds, class_of, ground, contracted):
        out = cls.__new__(cls)
        out.classes, out.bounds, out._class_of = classes, bounds, class_of
        MatroidOracle.__init__(out, ground, contracted)
        return out

    def _residual_bound(self, i: int) -> int:
        return self.bounds[i] - len(self.classes[i] & self.contracted)

    def is_independent(self, A) -> bool:
        counts: dict[int, int] = {}
        for e in frozenset(A):
            i = self._class_of[e]
            counts[i] = counts.get(i, 0) + 1
        return all(n <= self._residual_bound(i) for i, n in counts.items())

    def delete(self, e):
        self._check_element(e)
        return PartitionMatroid._make(self.classes, self.bounds, self._class_of,
                                      self.ground - {e}, self.contracted)

    def contract(self, e):
        self._require_nonloop(e)
        return PartitionMatroid._make(self.classes, self.bounds, self._class_of,
                                      self.ground - {e}, self.contracted | {e})

    def _separate_support(self, support, x) -> SeparationResult:
        # rank decomposes per class, so minimise independently and combine.
        total_gap = Fraction(0)
        witness: set[int] = set()
        for i, cls in enumerate(self.classes):
            sub = [e for e in support if e in cls]
            res = _prefix_separation(sub, x, self._residual_bound(i))
            if not res.inside:
                total_gap += res.gap
                witness |= res.violated
        if not witness:
            return SeparationResult(True)
        return SeparationResult(False, frozenset(witness), total_gap)


def _prefix_separation(support, x, bound: int) -> SeparationResult:
    """Most violated x(A) <= min(|A|, bound) set: a prefix by decreasing x."""
    order = sorted(support, key=lambda e: (-x[e], e))
    best_gap = Fraction(0)
    best_j = 0
    acc = Fraction(0)
    for j, e in enumerate(order, start=1):
        acc += x[e]
        gap = acc - min(j, bound)
        if gap > best_gap:
            best_gap, best_j = gap, j
    if best_j == 0:
        return SeparationResult(True)
    return SeparationResult(False, frozenset(order[:best_j]), best_gap)


class GraphicMatroid(MatroidOracle):
    """Forests of a multigraph; contraction merges endpoints."""

    kind = "graphic"

    def __init__(self, incidence: dict[int, tuple[int, int]], contracted=()):
        # self-loops are rank-0 singletons and are dropped up front
        self.incidence = {e: (u, v) for e, (u, v) in incidence.items() if u != v}
        super().__init__(self.incidence.keys(), contracted)

    def is_independent(self, A) -> bool:
        parent: dict[int, int] = {}

        def find(a):
            while parent.setdefault(a, a) != a:
                parent[a] = parent[parent[a]]
                a = parent[a]
            return a

        for e in frozenset(A):
            u, v = self.incidence[e]
            ru, rv = find(u), find(v)
            if ru == rv:
                return False
            parent[ru] = rv
        return True

    @classmethod
    def _make(cls, incidence, contracted):
        # keep post-contraction self-loops in the ground: they are loops of
        # the minor and the LP's x({f}) <= 0 box drives them out
        out = cls.__new__(cls)
        out.incidence = incidence
        MatroidOracle.__init__(out, incidence.keys(), contracted)
        return out

    def delete(self, e):
        self._check_element(e)
        inc = dict(self.incidence)
        del inc[e]
        return GraphicMatroid._make(inc, self.contracted)

    def contract(self, e):
        self._require_nonloop(e)
        u, v = self.incidence[e]
        inc = {}
        for f, (a, b) in self.incidence.items():
            if f == e:
                continue
            inc[f] = (u if a == v else a, u if b == v else b)
        return GraphicMatroid._make(inc, self.contracted | {e})

    def is_loop(self, e: int) -> bool:
        u, v = self.incidence[e]
        return u == v

    def rank(self, A) -> int:
        # one union-find pass; equals greedy insertion for graphic matroids
        parent: dict[int, int] = {}

        def find(a):
            while parent.setdefault(a, a) != a:
                parent[a] = parent[parent[a]]
                a = parent[a]
            return a

        r = 0
        for e in sorted(A):
            self._check_element(e)
            u, v = self.incidence[e]
            ru, rv = find(u), find(v)
            if ru != rv:
                parent[ru] = rv
                r += 1
        return r

    def _separate_support(self, support, x) -> SeparationResult:
        # Membership first: a violation exists iff some connected S has
        # x(E[S]) > |S| - 1, decided by a min-cut per forced vertex w
        # (selection-problem formulation).  The *global* minimiser of
        # rank(A) - x(A) may be a union of disjoint violated pieces, so when
        # violated, the reported set comes from the capped exhaustive search.
        loops = [e for e in support if self.is_loop(e)]
        if loops:
            # loops have rank 0; any positive mass on them is a violation
            gap = sum((x[e] for e in loops), Fraction(0))
            rest = self._separate_support(
                [e for e in support if not self.is_loop(e)], x)
            if rest.inside:
                return SeparationResult(False, frozenset(loops), gap)
            return SeparationResult(False, rest.violated | frozenset(loops),
                                    rest.gap + gap)
        if not support:
            return SeparationResult(True)
        verts = sorted({w for e in support for w in self.incidence[e]})
        violated = False
        for w in verts:
            value, S = _max_induced_excess(self.incidence, support, x, verts, w)
            if value + 1 > 0:  # max over S containing w of x(E[S]) - |S|
                violated = True
                break
        if not violated:
            return SeparationResult(True)
        res = MatroidOracle._separate_support(self, support, x)
        assert not res.inside, "flow detector and exhaustive search disagree"
        return res


def _components(incidence, edges):
    edges = sorted(edges)
    adj: dict[int, list[int]] = {}
    for e in edges:
        u, v = incidence[e]
        adj.setdefault(u, []).append(e)
        adj.setdefault(v, []).append(e)
    seen_v: set[int] = set()
    out = []
    for start in sorted(adj):
        if start in seen_v:
            continue
        comp_v, comp_e, stack = {start}, set(), [start]
        seen_v.add(start)
        while stack:
            v = stack.pop()
            for e in adj[v]:
                comp_e.add(e)
                for u in incidence[e]:
                    if u not in seen_v:
                        seen_v.add(u)
                        comp_v.add(u)
                        stack.append(u)
        out.append((comp_e, comp_v))
    return out


def _max_induced_excess(incidence, support, x, verts, forced):
    """max over S containing `forced` of x(E[S]) - |S|, via max-flow.

    Selection problem: source->edge arcs with capacity x_e, edge->endpoint
    arcs with effectively infinite capacity, vertex->sink arcs with capacity
    1 (omitted for the forced vertex, whose unit cost is charged manually).
    """
    total = sum((x[e] for e in support), Fraction(0))
    inf = total + 1
    src, snk = ("s",), ("t",)
    cap: dict[tuple, dict[tuple, Fraction]] = {}

    def add(a, b, c):
        cap.setdefault(a, {})[b] = cap.setdefault(a, {}).get(b, Fraction(0)) + c
        cap.setdefault(b, {}).setdefault(a, Fraction(0))

    for e in support:
        u, v = incidence[e]
        add(src, ("e", e), x[e])
        add(("e", e), ("v", u), inf)
        add(("e", e), ("v", v), inf)
    for w in verts:
        if w != forced:
            add(("v", w), snk, Fraction(1))
        else:
            cap.setdefault(("v", w), {})
    flow = _max_flow(cap, src, snk)
    # residual-reachable side of the cut
    reach = {src}
    stack = [src]
    while stack:
        a = stack.pop()
        for b, c in cap[a].items():
            if c > 0 and b not in reach:
                reach.add(b)
                stack.append(b)
    S = {w for w in verts if ("v", w) in reach}
    S.add(forced)
    return total - flow - 1, S


def _max_flow(cap, src, snk):
    """Edmonds-Karp on exact rationals; `cap` is mutated to the residual."""
    from collections import deque
    total = Fraction(0)
    while True:
        prev = {src: None}
        dq = deque([src])
        while dq and snk not in prev:
            a = dq.popleft()
            for b, c in cap[a].items():
                if c > 0 and b not in prev:
                    prev[b] = a
                    dq.append(b)
        if snk not in prev:
            return total
        # bottleneck along the path
        aug = None
        b = snk
        while prev[b] is not None:
            a = prev[b]
            aug = cap[a][b] if aug is None else min(aug, cap[a][b])
            b = a
        b = snk
        while prev[b] is not None:
            a = prev[b]
            cap[a][b] -= aug
            cap[b][a] += aug
            b = a
        total += aug


class TransversalMatroid(MatroidOracle):
    """Independence decided by bipartite matching against availability lists.

    Contraction does not preserve transversality, so the minor keeps the
    original availability and tests A united with the contracted set.
    """

    kind = "transversal"

    def __init__(self, available: dict[int, frozenset], ground=None, contracted=()):
        self.available = {e: frozenset(s) for e, s in available.items()}
        contracted = frozenset(contracted)
        if ground is None:
            ground = frozenset(self.available) - contracted
        ground = frozenset(e for e in ground if self.available.get(e))
        super().__init__(ground, contracted)

    def is_independent(self, A) -> bool:
        want = sorted(frozenset(A) | self.contracted)
        match: dict = {}  # outlet -> element

        def try_assign(e, seen):
            for o in sorted(self.available.get(e, ())):
                if o in seen:
                    continue
                seen.add(o)
                if o not in match or try_assign(match[o], seen):
                    match[o] = e
                    return True
            return False

        for e in want:
            if not try_assign(e, set()):
                return False
        return True

    def delete(self, e):
        self._check_element(e)
        return TransversalMatroid(self.available, self.ground - {e},
                                  self.contracted)

    def contract(self, e):
        self._require_nonloop(e)
        return TransversalMatroid(self.available, self.ground - {e},
                                  self.contracted | {e})


def make_matroid(spec: dict, instance=None) -> MatroidOracle:
    """Build an oracle from its JSON description.

    Ground defaults to the instance's edge ids where the kind permits.
    Graphic matroids take their incidence from the instance unless an
    explicit {"edges": {id: [u, v]}} map is given.
    """
    if not isinstance(spec, dict) or "kind" not in spec:
        raise ValueError("matroid spec must be a dict with a 'kind'")
    kind = spec["kind"]
    ground = spec.get("ground")
    if ground is None and instance is not None:
        ground = list(instance.edge_ids)
    if kind == "free":
        if ground is None:
            raise ValueError("free matroid needs a ground set or an instance")
        return FreeMatroid(ground)
    if kind == "uniform":
        if ground is None:
            raise ValueError("uniform matroid needs a ground set or an instance")
        return UniformMatroid(int(spec["rank"]), ground)
    if kind == "partition":
        return PartitionMatroid(spec["classes"], spec["bounds"], ground)
    if kind == "graphic":
        if "edges" in spec:
            inc = {int(e): (u, v) for e, (u, v) in spec["edges"].items()}
        elif instance is not None:
            inc = {}
            for e in instance.edges:
                if len(e.endpoints) != 2:
                    raise ValueError(
                        f"graphic matroid needs 2-endpoint edges, edge {e.id} "
                        f"has {len(e.endpoints)}")
                inc[e.id] = (e.endpoints[0][0], e.endpoints[1][0])
        else:
            raise ValueError("graphic matroid needs incidence or an instance")
        if ground is not None:
            inc = {e: uv for e, uv in inc.items() if e in set(ground)}
        return GraphicMatroid(inc)
    if kind == "transversal":
        avail = {int(e): frozenset(s) for e, s in spec["available"].items()}
        return TransversalMatroid(avail, ground)
    raise ValueError(f"unknown matroid kind: {kind!r}")


def matroid_from_json_file(path: str, instance=None) -> MatroidOracle:
    import json
    with open(path) as fh:
        return make_matroid(json.load(fh), instance)
