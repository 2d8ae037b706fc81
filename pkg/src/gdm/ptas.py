"""Planar pipeline: layer partition, tree-decomposition DP, relaxed pruning.

The approximation scheme runs per layer class: decompose the remaining
graph, compute a best eps-relaxed solution by dynamic programming over the
decomposition, then prune the relaxed solution to feasibility.  The DP
enumerates, per bag, the large-edge guesses M_v and per-direction reserved
amounts of discretised small demand; reservations are enumerated lazily as
realizable subset sums, which loses nothing because discretised demands are
exact grid multiples.
"""
from __future__ import annotations

import math
import random
from dataclasses import dataclass
from fractions import Fraction
from typing import Iterable, Optional

from .core import Instance, Solution, is_feasible, load, perturb
from .pairwise import prime_power_base
from .pruning import _family_greedy, _greedy_admit, small_bound, small_delta, _family_delta


class StateCapExceeded(Exception):
    """DP or knapsack table grew past the configured cap."""


DP_STATE_CAP = 400_000
MDK_STATE_CAP = 2_000_000


# -- decompositions ----------------------------------------------------------


@dataclass(frozen=True)
class TreeDecomposition:
    bags: tuple  # tuple of frozensets of vertices
    edges: tuple  # tree edges as (i, j) bag-index pairs
    root: int = 0

    @property
    def width(self) -> int:
        return max((len(b) for b in self.bags), default=1) - 1


def _simple_adjacency(instance: Instance) -> dict:
    adj: dict[int, set] = {v: set() for v in instance.vertices}
    for e in instance.edges:
        vs = e.vertices
        for i, u in enumerate(vs):
            for w in vs[i + 1:]:
                adj[u].add(w)
                adj[w].add(u)
    return adj


def validate_decomposition(instance: Instance, td: TreeDecomposition):
    """Assert the two decomposition properties plus tree shape."""
    n = len(td.bags)
    adj: dict[int, set] = {i: set() for i in range(n)}
    for i, j in td.edges:
        adj[i].add(j)
        adj[j].add(i)
    assert len(td.edges) == n - 1, "decomposition tree must be a tree"
    seen = {0}
    stack = [0]
    while stack:
        i = stack.pop()
        for j in adj[i]:
            if j not in seen:
                seen.add(j)
                stack.append(j)
    assert len(seen) == n, "decomposition tree must be connected"
    for v in instance.vertices:
        holder = [i for i, b in enumerate(td.bags) if v in b]
        assert holder, f"vertex {v} is in no bag"
        comp = {holder[0]}
        stack = [holder[0]]
        hs = set(holder)
        while stack:
            i = stack.pop()
            for j in adj[i]:
                if j in hs and j not in comp:
                    comp.add(j)
                    stack.append(j)
        assert comp == hs, f"bags of vertex {v} are not connected"
    for e in instance.edges:
        vs = set(e.vertices)
        assert any(vs <= b for b in td.bags), f"edge {e.id} covered by no bag"


def tree_decompose(instance: Instance) -> TreeDecomposition:
    """Min-fill elimination heuristic; width is heuristic, not optimal."""
    if not instance.vertices:
        return TreeDecomposition((frozenset(),), (), 0)
    adj = {v: set(nb) for v, nb in _simple_adjacency(instance).items()}
    order: list[int] = []
    bags: list[frozenset] = []
    alive = set(instance.vertices)

    def fill_cost(v) -> int:
        nb = [u for u in adj[v] if u in alive]
        missing = 0
        for i, a in enumerate(nb):
            for b in nb[i + 1:]:
                if b not in adj[a]:
                    missing += 1
        return missing

    while alive:
        v = min(sorted(alive), key=fill_cost)
        nb = sorted(u for u in adj[v] if u in alive)
        bags.append(frozenset([v] + nb))
        for i, a in enumerate(nb):
            for b in nb[i + 1:]:
                adj[a].add(b)
                adj[b].add(a)
        alive.remove(v)
        order.append(v)

    pos = {v: i for i, v in enumerate(order)}
    edges = []
    roots = []
    for i, v in enumerate(order):
        later = [u for u in bags[i] if u != v]
        if later:
            j = min(pos[u] for u in later)
            edges.append((i, j))
        else:
            roots.append(i)
    for a, b in zip(roots, roots[1:]):
        edges.append((a, b))  # stitch components into one tree
    td = TreeDecomposition(tuple(bags), tuple(edges), 0)
    validate_decomposition(instance, td)
    return td


def restrict_decomposition(td: TreeDecomposition, keep) -> TreeDecomposition:
    """Drop vertices from every bag; stays valid for the induced subgraph."""
    keep = frozenset(keep)
    return TreeDecomposition(tuple(b & keep for b in td.bags), td.edges, td.root)


def decomposition_from_json(data: dict) -> TreeDecomposition:
    bags = tuple(frozenset(b) for b in data["bags"])
    edges = tuple((int(i), int(j)) for i, j in data["edges"])
    return TreeDecomposition(bags, edges, int(data.get("root", 0)))


class NormalizedDecomposition:
    """Rooted binary form: every internal bag has exactly two children.

    Extra bags are copies of existing ones, inserted below their original,
    so vertex traces stay connected and no vertex gets a new topmost bag.
    Carries the per-vertex topmost bag and, per (bag, vertex), the four
    direction sets used by the DP.
    """

    def __init__(self, td: TreeDecomposition, instance: Instance):
        # root at the lowest bag index, then binarise
        bags = list(td.bags)
        children: dict[int, list] = {i: [] for i in range(len(bags))}
        adj: dict[int, set] = {i: set() for i in range(len(bags))}
        for i, j in td.edges:
            adj[i].add(j)
            adj[j].add(i)
        if not 0 <= td.root < len(bags):
            raise ValueError("decomposition root out of range")
        root = td.root
        seen = {root}
        stack = [root]
        orderq = [root]
        parent = {root: None}
        while stack:
            i = stack.pop()
            for j in sorted(adj[i]):
                if j not in seen:
                    seen.add(j)
                    parent[j] = i
                    children[i].append(j)
                    stack.append(j)
                    orderq.append(j)

        def new_bag(vs) -> int:
            bags.append(frozenset(vs))
            children[len(bags) - 1] = []
            return len(bags) - 1

        work = list(orderq)
        while work:
            i = work.pop()
            ch = children[i]
            if len(ch) == 1:
                ch.append(new_bag(bags[i]))
            elif len(ch) > 2:
                rest = ch[1:]
                children[i] = [ch[0]]
                cur = i
                while len(rest) > 2:
                    dup = new_bag(bags[i])
                    children[cur].append(dup)
                    children[dup] = [rest.pop(0)]
                    cur = dup
                    work.append(cur)
                dup = new_bag(bags[i])
                children[cur].append(dup)
                children[dup] = rest

        self.bags = [frozenset(b) for b in bags]
        self.children = {i: tuple(ch) for i, ch in children.items()}
        self.root = root
        self.instance = instance
        self.parent: dict[int, Optional[int]] = {root: None}
        for i, ch in self.children.items():
            assert len(ch) in (0, 2), "normalisation must leave 0 or 2 children"
            for j in ch:
                self.parent[j] = i

        # Euler intervals for ancestor tests
        self.tin: dict[int, int] = {}
        self.tout: dict[int, int] = {}
        t = 0
        stack = [(self.root, False)]
        order: list[int] = []
        while stack:
            i, done = stack.pop()
            if done:
                self.tout[i] = t
                t += 1
                continue
            self.tin[i] = t
            t += 1
            order.append(i)
            stack.append((i, True))
            for j in reversed(self.children[i]):
                stack.append((j, False))
        self.preorder = order
        self.postorder = [i for i in reversed(order)]

        # topmost bag per vertex: minimal tin among its bags
        self.top_bag: dict[int, int] = {}
        for v in instance.vertices:
            holding = [i for i, b in enumerate(self.bags) if v in b]
            assert holding, f"vertex {v} lost during normalisation"
            self.top_bag[v] = min(holding, key=lambda i: self.tin[i])

        # pack bag per edge: the deeper of the endpoints' topmost bags
        self.pack_bag: dict[int, int] = {}
        for e in instance.edges:
            tops = [self.top_bag[v] for v in e.vertices]
            deepest = max(tops, key=lambda i: self.tin[i])
            for tbag in tops:
                assert self._is_weak_ancestor(tbag, deepest), \
                    "endpoint topmost bags must be nested"
            self.pack_bag[e.id] = deepest

        # direction sets per (bag, vertex)
        self.dirsets: dict[tuple, dict] = {}
        for i, bag in enumerate(self.bags):
            ch = self.children[i]
            for v in sorted(bag):
                ds = {"here": [], "left": [], "right": [], "up": []}
                for e in instance.incident(v):
                    others = [u for u in instance.edge(e).vertices if u != v]
                    tref = self.top_bag[others[0]] if others else self.top_bag[v]
                    if tref == i:
                        ds["here"].append(e)
                    elif self._is_strict_ancestor(tref, i):
                        ds["up"].append(e)
                    elif ch and self._is_weak_ancestor(ch[0], tref):
                        ds["left"].append(e)
                    elif ch and self._is_weak_ancestor(ch[1], tref):
                        ds["right"].append(e)
                self.dirsets[(i, v)] = ds

    def _is_weak_ancestor(self, a: int, b: int) -> bool:
        return self.tin[a] <= self.tin[b] and self.tout[b] <= self.tout[a]

    def _is_strict_ancestor(self, a: int, b: int) -> bool:
        return a != b and self._is_weak_ancestor(a, b)

    @property
    def width(self) -> int:
        return max((len(b) for b in self.bags), default=1) - 1


def normalize(td: TreeDecomposition, instance: Instance) -> NormalizedDecomposition:
    validate_decomposition(instance, td)
    norm = NormalizedDecomposition(td, instance)
    # the duplicated bags must not break the decomposition properties
    pairs = []
    for i, ch in norm.children.items():
        for j in ch:
            pairs.append((i, j))
    validate_decomposition(instance, TreeDecomposition(
        tuple(norm.bags), tuple(pairs), norm.root))
    return norm


# -- layer partition ----------------------------------------------------------


def baker_partition(instance: Instance, k: int) -> list:
    """BFS-layer classes mod k+1; valid for planar graphs (caller-declared).

    Removing any one class from a planar graph leaves bounded treewidth;
    this realises the partition step for planar inputs only and makes no
    claim for general minor-free families.
    """
    if k < 1:
        raise ValueError("k must be >= 1")
    layer: dict[int, int] = {}
    adj = _simple_adjacency(instance)
    for start in sorted(instance.vertices):
        if start in layer:
            continue
        layer[start] = 0
        frontier = [start]
        while frontier:
            nxt = []
            for v in frontier:
                for u in sorted(adj[v]):
                    if u not in layer:
                        layer[u] = layer[v] + 1
                        nxt.append(u)
            frontier = nxt
    classes = [[] for _ in range(k + 1)]
    for v in sorted(instance.vertices):
        classes[layer[v] % (k + 1)].append(v)
    return classes


# -- multi-dimensional knapsack ------------------------------------------------


def mdk_pack(items: list, budgets: list) -> tuple:
    """Exact multi-budget 0/1 packing.

    items: (profit, demand vector of nonnegative ints); budgets: ints.
    Returns (profit, chosen index tuple).  Sparse DP over reachable
    consumption vectors, capped.
    """
    budgets = [int(b) for b in budgets]
    if any(b < 0 for b in budgets):
        raise ValueError("budgets must be nonnegative")
    usable = []
    for idx, (profit, dem) in enumerate(items):
        if len(dem) != len(budgets):
            raise ValueError("demand vector length mismatch")
        if any(d > b for d, b in zip(dem, budgets)):
            continue  # can never be packed
        usable.append((idx, Fraction(profit), tuple(int(d) for d in dem)))
    space = 1
    for b in budgets:
        space *= b + 1
        if space > MDK_STATE_CAP:
            break
    if min(space, 2 ** len(usable)) > MDK_STATE_CAP:
        raise StateCapExceeded(
            "knapsack budget space too large; use a larger eps or a smaller "
            "instance")
    states: dict[tuple, tuple] = {tuple([0] * len(budgets)): (Fraction(0), ())}
    for idx, profit, dem in usable:
        new = dict(states)
        for cons, (val, chosen) in states.items():
            nxt = tuple(c + d for c, d in zip(cons, dem))
            if any(c > b for c, b in zip(nxt, budgets)):
                continue
            cand = (val + profit, chosen + (idx,))
            cur = new.get(nxt)
            if cur is None or cand[0] > cur[0]:
                new[nxt] = cand
        if len(new) > MDK_STATE_CAP:
            raise StateCapExceeded("knapsack state table overflow")
        states = new
    best_val, best_chosen = Fraction(0), ()
    for val, chosen in states.values():
        if val > best_val:
            best_val, best_chosen = val, chosen
    return best_val, tuple(sorted(best_chosen))


# -- eps-relaxed solutions -----------------------------------------------------


@dataclass(frozen=True)
class RelaxedSolution:
    """Edge set plus per-vertex large sets meeting the relaxed feasibility."""

    edges: frozenset
    large: dict  # v -> frozenset of edge ids, the "large" edges at v
    eps: Fraction


def _residual_cap(instance: Instance, v: int, large_at_v) -> Fraction:
    return instance.capacities[v] - load(instance, v, large_at_v)


def _grid_round_down(d: Fraction, unit: Fraction) -> Fraction:
    if unit == 0:
        return Fraction(0)
    return (d // unit) * unit


def check_relaxed(instance: Instance, rs: RelaxedSolution):
    """Assert the three relaxed-feasibility conditions, exactly."""
    m = len(instance.edges)
    cap_large = math.ceil(1 / rs.eps / rs.eps)
    for v in instance.vertices:
        mv = frozenset(rs.large.get(v, ()))
        assert mv <= rs.edges, f"large set at {v} leaves the solution"
        assert all(v in instance.edge(e).vertices for e in mv)
        assert len(mv) <= cap_large, f"large set at {v} exceeds 1/eps^2"
        bbar = _residual_cap(instance, v, mv)
        assert bbar >= 0, f"large edges alone overload {v}"
        unit = rs.eps * bbar / m if m else Fraction(0)
        small = [e for e in instance.incident(v) if e in rs.edges and e not in mv]
        total = Fraction(0)
        for e in small:
            d = instance.demand(v, e)
            assert d <= rs.eps * bbar, f"edge {e} is not small at {v}"
            total += _grid_round_down(d, unit)
        assert total <= bbar, f"discretised small demand overloads {v}"


def relaxed_brute_force(instance: Instance, eps: Fraction) -> tuple:
    """Exhaustive best relaxed solution; the DP's equality oracle."""
    import itertools as it
    eps = Fraction(eps)
    cap_large = math.ceil(1 / eps / eps)
    ids = sorted(instance.edge_ids)
    best = (Fraction(0), RelaxedSolution(frozenset(), {}, eps))
    for r in range(len(ids) + 1):
        for combo in it.combinations(ids, r):
            M = frozenset(combo)
            per_vertex = []
            vs = sorted(instance.vertices)
            ok = True
            for v in vs:
                inc = [e for e in instance.incident(v) if e in M]
                opts = []
                for rr in range(0, min(len(inc), cap_large) + 1):
                    for mv in it.combinations(inc, rr):
                        if _vertex_relaxed_ok(instance, v, M, frozenset(mv), eps):
                            opts.append(frozenset(mv))
                if not opts:
                    ok = False
                    break
                per_vertex.append(opts)
            if not ok:
                continue
            value = instance.profit(M)
            if value > best[0]:
                choice = {v: opts[0] for v, opts in zip(vs, per_vertex)}
                best = (value, RelaxedSolution(M, choice, eps))
    check_relaxed(instance, best[1])
    return best


def _vertex_relaxed_ok(instance, v, M, mv, eps) -> bool:
    m = len(instance.edges)
    bbar = _residual_cap(instance, v, mv)
    if bbar < 0:
        return False
    unit = eps * bbar / m if m else Fraction(0)
    total = Fraction(0)
    for e in instance.incident(v):
        if e in M and e not in mv:
            d = instance.demand(v, e)
            if d > eps * bbar:
                return False
            total += _grid_round_down(d, unit)
    return total <= bbar


# -- the dynamic program -------------------------------------------------------


class _VertexOptions:
    """Per (bag, vertex): admissible (M_v, budget 4-tuple) pairs with units."""

    def __init__(self, instance: Instance, norm: NormalizedDecomposition,
                 bag: int, v: int, eps: Fraction, s_max: int, cap_large: int):
        self.v = v
        ds = norm.dirsets[(bag, v)]
        inc = sorted(instance.incident(v))
        self.entries = []  # (M_v, avec, units map, bbar)
        m = len(instance.edges)
        for mv in _subsets_upto(inc, cap_large):
            bbar = _residual_cap(instance, v, mv)
            if bbar < 0:
                continue
            unit = eps * bbar / m if m else Fraction(0)
            units: dict[int, int] = {}
            elig: dict[str, list] = {}
            okmv = True
            for kappa in ("here", "left", "right", "up"):
                lst = []
                for e in ds[kappa]:
                    if e in mv:
                        continue
                    d = instance.demand(v, e)
                    if d > eps * bbar:
                        continue  # not small at v; cannot sit beside M_v
                    u = int(d // unit) if unit > 0 else 0
                    units[e] = u
                    lst.append(u)
                elig[kappa] = lst
            sums = {k: _subset_sums(lst, s_max) for k, lst in elig.items()}
            for ah in sums["here"]:
                for al in sums["left"]:
                    if ah + al > s_max:
                        break
                    for ar in sums["right"]:
                        if ah + al + ar > s_max:
                            break
                        for au in sums["up"]:
                            if ah + al + ar + au > s_max:
                                break
                            self.entries.append(
                                (frozenset(mv), (ah, al, ar, au), units, bbar))


def _subsets_upto(items, cap):
    import itertools as it
    for r in range(min(len(items), cap) + 1):
        yield from it.combinations(items, r)


def _subset_sums(values, cap) -> list:
    sums = {0}
    for u in values:
        sums |= {s + u for s in sums if s + u <= cap}
    return sorted(sums)


def dp_relaxed_opt(instance: Instance, norm: NormalizedDecomposition,
                   eps, state_cap: int = DP_STATE_CAP) -> tuple:
    """Best eps-relaxed solution over a normalized decomposition.

    Returns (value, RelaxedSolution); the witness is re-audited against the
    relaxed-feasibility conditions and its recomputed profit must equal the
    DP value (the double-counting safety net).
    """
    eps = Fraction(eps)
    if eps <= 0 or eps > 1:
        raise ValueError("eps must lie in (0, 1]")
    m = len(instance.edges)
    if m == 0:
        return Fraction(0), RelaxedSolution(
            frozenset(), {v: frozenset() for v in instance.vertices}, eps)
    cap_large = math.ceil(1 / eps / eps)
    s_max = int(Fraction(m) / eps)  # floor: the discretised load bound

    tables: dict[int, list] = {}
    grouped: dict[int, dict] = {}
    n_states = 0

    for bag in norm.postorder:
        verts = sorted(norm.bags[bag])
        options = [_VertexOptions(instance, norm, bag, v, eps, s_max,
                                  cap_large) for v in verts]
        ch = norm.children[bag]
        pack_ids = [e for e in sorted(instance.edge_ids)
                    if norm.pack_bag[e] == bag]
        entries = []
        for combo in _product(options):
            entry = _eval_config(instance, norm, bag, verts, combo, ch,
                                 pack_ids, grouped, eps, s_max)
            if entry is not None:
                entries.append(entry)
        n_states += len(entries)
        if n_states > state_cap:
            raise StateCapExceeded(
                f"DP grew past {state_cap} configurations at bag {bag}; "
                "use a larger eps or a smaller instance")
        tables[bag] = entries
        # group for the parent: project the vertices shared with the parent
        # onto (M_v, here+left+right, up); the parent equates these with its
        # own (M_v, a toward this child, a_here + a_up)
        par = norm.parent.get(bag)
        if par is not None:
            shared = sorted(norm.bags[bag] & norm.bags[par])
            g: dict[tuple, tuple] = {}
            for pos, entry in enumerate(entries):
                key = tuple(
                    (v, entry["assign"][v][0],
                     sum(entry["assign"][v][1][:3]), entry["assign"][v][1][3])
                    for v in shared)
                cur = g.get(key)
                if cur is None or entry["f"] > cur[0]:
                    g[key] = (entry["f"], pos)
            grouped[bag] = g

    root_entries = tables[norm.root]
    best = None
    for pos, entry in enumerate(root_entries):
        if best is None or entry["f"] > root_entries[best]["f"]:
            best = pos
    assert best is not None, "the all-empty configuration must always exist"

    edges, large = _reconstruct(norm, tables, norm.root, best, instance)
    value = root_entries[best]["f"]
    full_large = {v: frozenset(large.get(v, ())) for v in instance.vertices}
    rs = RelaxedSolution(frozenset(edges), full_large, eps)
    check_relaxed(instance, rs)
    assert instance.profit(rs.edges) == value, \
        "DP value disagrees with the recomputed witness profit"
    return value, rs


def _product(options):
    """Cartesian product over per-vertex option lists."""
    import itertools as it
    pools = [opt.entries for opt in options]
    if not pools:
        yield ()
        return
    yield from it.product(*pools)


def _eval_config(instance, norm, bag, verts, combo, children, pack_ids,
                 grouped, eps, s_max):
    assign = {v: (mv, avec) for v, (mv, avec, _, _) in zip(verts, combo)}
    units = {v: u for v, (_, _, u, _) in zip(verts, combo)}
    bbars = {v: b for v, (_, _, _, b) in zip(verts, combo)}
    m_big = frozenset(e for mv, _, _, _ in combo for e in mv)

    kappa_index = {"here": 0, "left": 1, "right": 2, "up": 3}
    # pre-committed small demand from guessed large edges; must be small and
    # must fit the here/up reservations
    dprime: dict[tuple, int] = {}
    for v in verts:
        ds = norm.dirsets[(bag, v)]
        mv = assign[v][0]
        for kappa in ("here", "up"):
            total = 0
            for e in ds[kappa]:
                if e in m_big and e not in mv:
                    if e not in units[v]:
                        return None  # a guessed edge is not small at v
                    total += units[v][e]
            if total > assign[v][1][kappa_index[kappa]]:
                return None
            dprime[(v, kappa)] = total

    # the inner knapsack over edges packed at this bag
    ef = []
    for e in pack_ids:
        if e in m_big:
            continue
        evs = instance.edge(e).vertices
        assert all(v in assign for v in evs), \
            "both endpoints of a packed edge lie in its pack bag"
        if any(e not in units[v] for v in evs):
            continue  # not small at some endpoint under this guess
        ef.append(e)
    dims = [(v, kappa) for v in verts for kappa in ("here", "up")]
    dim_at = {d: i for i, d in enumerate(dims)}
    budget = [assign[v][1][kappa_index[kappa]] - dprime[(v, kappa)]
              for v, kappa in dims]
    items = []
    for e in ef:
        vec = [0] * len(dims)
        for v in instance.edge(e).vertices:
            ds = norm.dirsets[(bag, v)]
            kappa = "here" if e in ds["here"] else "up"
            assert e in ds[kappa], "pack edge must be here/up at its endpoints"
            vec[dim_at[(v, kappa)]] = units[v][e]
        items.append((instance.edge(e).profit, tuple(vec)))
    g_value, chosen_idx = mdk_pack(items, budget)
    g_edges = frozenset(ef[i] for i in chosen_idx)

    entry = {"assign": assign, "bbar": bbars, "g_edges": g_edges,
             "children": (), "f": None}

    visible = frozenset(e for v in verts for e in assign[v][0])
    if not children:
        entry["f"] = g_value + instance.profit(visible)
        return entry

    # Each large edge is charged once over its (connected) visibility region:
    # weight 1 - #children where it is still visible.  Visibility shared with
    # a child equals the union of M_v over the shared vertices, so the charge
    # is parent-computable.  This inclusion-exclusion form agrees with the
    # sum over newly-appearing vertices minus doubly-counted ones whenever
    # the large sets are disjoint, and stays exact when they overlap.
    left, right = children
    child_keys = []
    charge = instance.profit(visible)
    for cidx, dirname in ((left, 1), (right, 2)):
        shared = [v for v in verts if v in norm.bags[cidx]]
        key = tuple((v, assign[v][0],
                     assign[v][1][dirname],
                     assign[v][1][0] + assign[v][1][3]) for v in sorted(shared))
        hit = grouped[cidx].get(key)
        if hit is None:
            return None
        child_keys.append((cidx, hit[1], hit[0]))
        charge -= instance.profit(
            frozenset(e for v in shared for e in assign[v][0]))
    entry["children"] = ((left, child_keys[0][1]), (right, child_keys[1][1]))
    entry["f"] = g_value + child_keys[0][2] + child_keys[1][2] + charge
    return entry


def _reconstruct(norm, tables, bag, pos, instance):
    entry = tables[bag][pos]
    edges = set(entry["g_edges"])
    large: dict[int, set] = {}
    for v, (mv, _avec) in entry["assign"].items():
        large.setdefault(v, set()).update(mv)
        edges.update(mv)
    for cbag, cpos in entry["children"]:
        cedges, clarge = _reconstruct(norm, tables, cbag, cpos, instance)
        edges |= cedges
        for v, mv in clarge.items():
            if v in large:
                assert large[v] == set(mv), \
                    f"inconsistent large sets for {v} across bags"
            large[v] = set(mv)
    return edges, large


# -- pruning a relaxed solution back to feasibility -----------------------------


def prune_relaxed(instance: Instance, rs: RelaxedSolution) -> Solution:
    """Feasible subset of a relaxed solution, losing little value.

    Works on the modified instance whose demands vanish on each vertex's
    large edges and whose capacities are the residuals after packing them;
    that instance is eps-small, so the small-edge family pruning applies.
    An admitted set there is feasible under the original demands because the
    residual capacities pre-reserve every large-edge commitment.
    """
    check_relaxed(instance, rs)
    eps = rs.eps
    bbar = {v: _residual_cap(instance, v, rs.large.get(v, ()))
            for v in instance.vertices}

    def dhat(v, e):
        if e in rs.large.get(v, ()):
            return Fraction(0)
        return instance.demand(v, e)

    for v in instance.vertices:
        mload = sum((dhat(v, e) for e in instance.incident(v)
                     if e in rs.edges), Fraction(0))
        assert mload <= (1 + eps) * bbar[v], \
            "modified load exceeded (1+eps) residual capacity"

    bound = small_bound(eps)
    if bound > 0:
        delta = small_delta(eps)
        dfam = _family_delta(delta)
        ok_window = (1 - dfam) * (1 + eps) + dfam / 3 <= 1 - eps
        if ok_window:
            best_set, best_value, avg, freqs = _family_greedy(
                instance, rs.edges, 1 - dfam, demand=dhat, caps=bbar)
            fam_bound = 1 - dfam - 36 * eps / dfam / dfam
            for e, fr in freqs.items():
                assert fr >= fam_bound, \
                    f"survival of {e} fell below the certified bound"
            assert best_value >= bound * instance.profit(rs.edges)
            chosen = best_set
        else:
            chosen = _greedy_admit(instance, rs.edges, demand=dhat, caps=bbar)
    else:
        # vacuous regime: greedy over everything still yields feasibility
        chosen = _greedy_admit(instance, rs.edges, demand=dhat, caps=bbar)

    assert is_feasible(instance, chosen), \
        "pruned relaxed solution violates the original capacities"
    return Solution(chosen)


# -- sparsification spot-check ---------------------------------------------------


def sparsify_check(instance: Instance, m_star: Solution, eps,
                   trials: int = 1000, seed: int = 0) -> dict:
    """Random near-optimal sparsification, tested rather than trusted.

    Per trial: at every busy vertex keep the top 1/eps^2 demands as L_v,
    drop a random 1/eps-subset R_v of them, and check that the surviving
    solution has small edges relative to the residual after its large set.
    Reports the structural pass rate (expected 100%) and mean profit against
    the (1 - 2 eps) target.
    """
    eps = Fraction(eps)
    assert is_feasible(instance, m_star), "m_star must be feasible"
    rng = random.Random(seed)
    big = math.ceil(1 / eps / eps)
    drop = math.ceil(1 / eps)
    p_star = instance.profit(m_star.edge_ids)
    profits = []
    structural_failures = 0
    for _ in range(trials):
        removed: set[int] = set()
        lsets: dict[int, list] = {}
        for v in sorted(instance.vertices):
            inc = [e for e in instance.incident(v) if e in m_star.edge_ids]
            inc.sort(key=lambda e: (-instance.demand(v, e), e))
            if len(inc) >= big:
                lv = inc[:big]
                rv = rng.sample(lv, drop)
                removed.update(rv)
            else:
                lv = inc
            lsets[v] = lv
        M = frozenset(m_star.edge_ids) - removed
        ok = True
        for v in instance.vertices:
            mv = [e for e in lsets[v] if e in M]
            if len(mv) > big:
                ok = False
                break
            resid = _residual_cap(instance, v, mv)
            for e in instance.incident(v):
                if e in M and e not in mv:
                    if instance.demand(v, e) > eps * resid:
                        ok = False
                        break
            if not ok:
                break
        if not ok:
            structural_failures += 1
        profits.append(instance.profit(M))
    mean = sum(profits, Fraction(0)) / trials
    var = sum(((p - mean) ** 2 for p in profits), Fraction(0)) / trials
    stderr = (float(var) / trials) ** 0.5
    return {
        "trials": trials,
        "structural_ok_fraction": Fraction(trials - structural_failures, trials),
        "mean_profit": mean,
        "stderr": stderr,
        "target": (1 - 2 * eps) * p_star,
        "p_star": p_star,
    }


# -- the full scheme --------------------------------------------------------------


def induced_subinstance(instance: Instance, keep) -> tuple:
    """Instance on a vertex subset; returns (sub, new id -> original id)."""
    from .core import Edge
    keep = frozenset(keep)
    vertices = [v for v in instance.vertices if v in keep]
    edges = []
    back = {}
    for e in instance.edges:
        if all(v in keep for v in e.vertices):
            back[len(edges)] = e.id
            edges.append(Edge(len(edges), e.endpoints, e.profit))
    caps = {v: instance.capacities[v] for v in vertices}
    return Instance(vertices, edges, caps, instance.k), back


def ptas(instance: Instance, eps, decomposition: Optional[TreeDecomposition] = None,
         state_cap: int = DP_STATE_CAP) -> dict:
    """Layered scheme for planar instances (planarity is caller-declared).

    For each of the k+1 layer classes: restrict to the complement, perturb,
    solve the relaxed DP at the internal accuracy eps/6, prune back to
    feasibility, and keep the best class.  Inner accuracy eps/6 makes the
    relaxed optimum itself lose at most eps/3; the extra pruning loss is
    reported in the certificate rather than certified, since its asymptotic
    constant is vacuous at practical eps.
    """
    eps = Fraction(eps)
    if eps <= 0 or eps > 1:
        raise ValueError("eps must lie in (0, 1]")
    if instance.k != 2:
        raise ValueError("the scheme handles graphs only (k = 2)")
    k = math.ceil(3 / eps)
    classes = baker_partition(instance, k)
    eps_dp = eps / 6
    per_class = []
    best = None
    for i, cls in enumerate(classes):
        keep = set(instance.vertices) - set(cls)
        sub, back = induced_subinstance(instance, keep)
        pert = perturb(sub)
        if decomposition is not None:
            td = restrict_decomposition(decomposition, keep)
        else:
            td = tree_decompose(pert)
        norm = normalize(td, pert)
        value, rs = dp_relaxed_opt(pert, norm, eps_dp, state_cap)
        pruned = prune_relaxed(pert, rs)
        orig_ids = frozenset(back[e] for e in pruned.edge_ids)
        assert is_feasible(instance, orig_ids), \
            "class solution must stay feasible in the full instance"
        profit = instance.profit(orig_ids)
        per_class.append({"class": i, "removed": len(cls),
                          "relaxed_value": str(value), "p": str(profit)})
        if best is None or profit > best[0]:
            best = (profit, orig_ids, i)
    certificate = {
        "epsilon": str(eps),
        "k": k,
        "classes": [len(c) for c in classes],
        "per_class": per_class,
        "chosen_class": best[2],
        "p": str(best[0]),
        "feasible": True,
    }
    return {"solution": Solution(best[1]), "certificate": certificate}
