"""Prune a capacity-violating relaxation output down to a feasible solution.

Five strategies, dispatched on instance structure.  Each certifies its
profit retention factor at runtime in exact rationals: the labeling
strategies iterate an explicit pairwise-independent family, lower-bound the
family average, and return the best event, so the probabilistic analysis is
checked rather than trusted.
"""
from __future__ import annotations

import warnings
from dataclasses import dataclass
from fractions import Fraction

from .core import (Instance, Solution, bipartition, classify, is_feasible,
                   validate)
from .iterated import RelaxedOutput, iterated_relax
from .pairwise import PairwiseFamily, prime_power_base

GENERAL_FACTOR = Fraction(3, 25)
CONFLICT_FREE_FACTOR = Fraction(1, 4)
BIPARTITE_FACTOR = Fraction(1, 7)
CONSISTENT_FACTOR = Fraction(1, 5)
GENERAL_ALPHA = Fraction(2, 5)


# -- labeling, shattering, matchings ----------------------------------------


@dataclass(frozen=True)
class LabeledSplit:
    """One labeling event: agree set and shattered-graph components.

    Each component is (ordered edge ids, is_cycle, matchings); s-labelled
    vertices are split into degree-1 copies, so components are paths and
    cycles and every ss edge is isolated.
    """

    labels: dict  # vertex -> 's' | 'l'
    agree: tuple
    components: tuple


def _large_small(rel: RelaxedOutput, v: int):
    return set(rel.large.get(v, ()))


def _edge_nodes(instance: Instance, e: int, labels):
    """Shattered-graph nodes of edge e; sortable homogeneous triples."""
    nodes = []
    for v, _ in instance.edge(e).endpoints:
        if labels[v] == "s":
            nodes.append(("s", v, e))
        else:
            nodes.append(("l", v, -1))
    while len(nodes) < 2:
        nodes.append(("x", -1, e))  # virtual second end for 1-endpoint edges
    return nodes


def labeled_split(instance: Instance, rel: RelaxedOutput, labels) -> LabeledSplit:
    agree = []
    for e in sorted(rel.m_prime):
        ok = True
        for v, _ in instance.edge(e).endpoints:
            in_large = e in _large_small(rel, v)
            if labels[v] == "s" and in_large:
                ok = False
            if labels[v] == "l" and not in_large:
                ok = False
        if ok:
            agree.append(e)
    comps = _shatter_components(instance, agree, labels)
    for edges, is_cycle, matchings in comps:
        if is_cycle:
            for e in edges:
                assert all(labels[v] == "l"
                           for v, _ in instance.edge(e).endpoints), \
                    "an edge with an s endpoint ended up on a cycle"
    return LabeledSplit(dict(labels), tuple(agree), comps)


def _shatter_components(instance: Instance, agree, labels) -> tuple:
    adj: dict = {}
    for e in agree:
        a, b = _edge_nodes(instance, e, labels)
        adj.setdefault(a, []).append((e, b))
        adj.setdefault(b, []).append((e, a))
    for node, inc in adj.items():
        assert len(inc) <= 2, f"shattered node {node} has degree {len(inc)}"

    comps = []
    visited_edges: set[int] = set()
    visited_nodes: set = set()
    for start in sorted(adj):
        if start in visited_nodes:
            continue
        nodes = {start}
        stack = [start]
        while stack:
            n = stack.pop()
            for _, other in adj[n]:
                if other not in nodes:
                    nodes.add(other)
                    stack.append(other)
        visited_nodes |= nodes
        comp_edges = {e for n in nodes for e, _ in adj[n]}
        deg1 = sorted(n for n in nodes if len(adj[n]) == 1)
        is_cycle = not deg1
        walk_from = deg1[0] if deg1 else min(nodes)
        seq = []
        cur = walk_from
        while True:
            nxt = [(e, other) for e, other in adj[cur]
                   if e not in visited_edges and e not in seq]
            if not nxt:
                break
            e, other = min(nxt)
            seq.append(e)
            cur = other
        assert set(seq) == comp_edges, "component walk missed edges"
        visited_edges |= comp_edges
        matchings = _decompose_matchings(seq, is_cycle)
        _check_matchings(instance, labels, seq, matchings)
        comps.append((tuple(seq), is_cycle, tuple(map(tuple, matchings))))
    return tuple(comps)


def _decompose_matchings(seq, is_cycle):
    k = len(seq)
    if k == 1:
        return [list(seq)]
    if not is_cycle or k % 2 == 0:
        return [list(seq[0::2]), list(seq[1::2])]
    return [list(seq[0:k - 1:2]), list(seq[1:k - 1:2]), [seq[k - 1]]]


def _check_matchings(instance, labels, seq, matchings):
    assert sorted(e for m in matchings for e in m) == sorted(seq)
    for m in matchings:
        used = set()
        for e in m:
            for node in _edge_nodes(instance, e, labels):
                assert node not in used, "matching shares a shattered node"
                used.add(node)


def _relevant_vertices(instance: Instance, edge_set) -> list:
    return sorted({v for e in edge_set for v, _ in instance.edge(e).endpoints})


# -- strategies --------------------------------------------------------------


def prune_general(instance: Instance, rel: RelaxedOutput) -> Solution:
    """Arbitrary graphs: best event of the alpha=2/5 labeling family.

    Certifies p(M) >= (3/25) p(M') through the exact family average.
    """
    if not rel.m_prime:
        return Solution(())
    verts = _relevant_vertices(instance, rel.m_prime)
    vidx = {v: i for i, v in enumerate(verts)}
    fam = PairwiseFamily(len(verts), GENERAL_ALPHA)
    n_events = len(fam)
    best: tuple[Fraction, frozenset] | None = None
    total_value = Fraction(0)
    total_lb = Fraction(0)
    for ev in fam.events():
        labels = {v: ("s" if ev[vidx[v]] else "l") for v in verts}
        split = labeled_split(instance, rel, labels)
        chosen: set[int] = set()
        event_lb = Fraction(0)
        for edges, _is_cycle, matchings in split.components:
            profits = [instance.profit(m) for m in matchings]
            pick = max(range(len(matchings)), key=lambda i: (profits[i], -i))
            chosen.update(matchings[pick])
            event_lb += instance.profit(edges) / len(matchings)
        value = instance.profit(chosen)
        assert value >= event_lb
        assert is_feasible(instance, chosen), "pruned set is infeasible"
        total_value += value
        total_lb += event_lb
        if best is None or value > best[0]:
            best = (value, frozenset(chosen))
    target = GENERAL_FACTOR * instance.profit(rel.m_prime)
    assert total_lb >= n_events * target, "family average fell below 3/25"
    assert best[0] * n_events >= total_value >= total_lb
    assert best[0] >= target
    return Solution(best[1])


def prune_conflict_free(instance: Instance, rel: RelaxedOutput) -> Solution:
    """Conflict-free instances: the agree set itself is feasible; alpha=1/2.

    Every edge class agrees with probability exactly 1/4, so the family
    average equals p(M')/4 and the best event is certified >= p(M')/4.
    """
    ids = list(instance.edge_ids)
    for i, e in enumerate(ids):
        for f in ids[i + 1:]:
            if not is_feasible(instance, {e, f}):
                raise ValueError("instance is not conflict-free")
    if not rel.m_prime:
        return Solution(())
    verts = _relevant_vertices(instance, rel.m_prime)
    vidx = {v: i for i, v in enumerate(verts)}
    fam = PairwiseFamily(len(verts), Fraction(1, 2))
    n_events = len(fam)
    best = None
    total_value = Fraction(0)
    for ev in fam.events():
        labels = {v: ("s" if ev[vidx[v]] else "l") for v in verts}
        split = labeled_split(instance, rel, labels)
        value = instance.profit(split.agree)
        assert is_feasible(instance, split.agree), \
            "agree set infeasible on a conflict-free instance"
        total_value += value
        if best is None or value > best[0]:
            best = (value, frozenset(split.agree))
    expected = instance.profit(rel.m_prime) / 4
    assert total_value == n_events * expected, \
        "family average deviates from the exact 1/4 survival rate"
    assert best[0] >= expected
    return Solution(best[1])


def prune_bipartite(instance: Instance, rel: RelaxedOutput) -> Solution:
    """Bipartite graphs: a deterministic partition into 7 feasible sets."""
    sides = bipartition(instance)
    if sides is None:
        raise ValueError("instance is not bipartite")
    left, _right = sides
    if not rel.m_prime:
        return Solution(())

    def side_class(e: int) -> tuple[str, str]:
        cls = {}
        for v, _ in instance.edge(e).endpoints:
            cls["L" if v in left else "R"] = \
                "l" if e in _large_small(rel, v) else "s"
        return cls.get("L", "s"), cls.get("R", "s")

    groups: dict[tuple, list] = {("s", "s"): [], ("l", "l"): [],
                                 ("s", "l"): [], ("l", "s")  : []}
    for e in sorted(rel.m_prime):
        groups[side_class(e)].append(e)

    sets: list[frozenset] = [frozenset(groups[("s", "s")])]
    for key in (("l", "l"), ("s", "l"), ("l", "s")):
        members = groups[key]
        labels = {}
        for v in _relevant_vertices(instance, members):
            labels[v] = key[0] if v in left else key[1]
        comps = _shatter_components(instance, members, labels)
        half_a: set[int] = set()
        half_b: set[int] = set()
        for edges, is_cycle, matchings in comps:
            if is_cycle:
                assert len(edges) % 2 == 0, "odd cycle in a bipartite graph"
            assert len(matchings) <= 2
            half_a.update(matchings[0])
            if len(matchings) == 2:
                half_b.update(matchings[1])
        sets.extend([frozenset(half_a), frozenset(half_b)])

    assert sorted(e for s in sets for e in s) == sorted(rel.m_prime), \
        "the seven sets must partition M'"
    best = sets[0]
    for s in sets:
        assert is_feasible(instance, s), "a group of the 7-partition overloads"
        if instance.profit(s) > instance.profit(best):
            best = s
    assert instance.profit(best) >= BIPARTITE_FACTOR * instance.profit(rel.m_prime)
    return Solution(best)


def prune_consistent(instance: Instance, rel: RelaxedOutput, order) -> Solution:
    """Consistent-ordering instances: greedy 5-group partition.

    Edges are scanned in decreasing order; each avoids groups already holding
    one of the at most four large edges at its endpoints, so at each vertex a
    group lies inside S(v) or is a single large edge.
    """
    pos = {e: i for i, e in enumerate(order)}
    if set(pos) != set(instance.edge_ids):
        raise ValueError("order must cover exactly the instance edges")
    for v in instance.vertices:
        inc = [e for e in sorted(instance.incident(v), key=pos.get)]
        for a, b in zip(inc, inc[1:]):
            if instance.demand(v, a) > instance.demand(v, b):
                raise ValueError(f"ordering is not demand-consistent at {v}")
    if not rel.m_prime:
        return Solution(())

    # large sets taken as the order's top-2 at each vertex (max demands)
    big: dict[int, set] = {}
    for v in instance.vertices:
        inc = sorted((e for e in instance.incident(v) if e in rel.m_prime),
                     key=pos.get)
        big[v] = set(inc[-2:])

    groups: list[set] = [set() for _ in range(5)]
    where: dict[int, int] = {}
    for e in sorted(rel.m_prime, key=pos.get, reverse=True):
        forbidden = set()
        for v, _ in instance.edge(e).endpoints:
            for f in big[v]:
                if f != e and f in where:
                    forbidden.add(where[f])
        target = next(i for i in range(5) if i not in forbidden)
        groups[target].add(e)
        where[e] = target

    assert sorted(e for g in groups for e in g) == sorted(rel.m_prime)
    best = groups[0]
    for g in groups:
        assert is_feasible(instance, g), "a 5-partition group overloads"
        if instance.profit(g) > instance.profit(best):
            best = g
    assert instance.profit(best) >= CONSISTENT_FACTOR * instance.profit(rel.m_prime)
    return Solution(best)


# -- the eps-small machinery --------------------------------------------------


def small_delta(eps: Fraction) -> Fraction:
    """Rational upper bound 1/k >= eps^(1/3); exact when eps is 1/k^3."""
    if eps <= 0:
        raise ValueError("eps must be positive")
    inv = Fraction(1, 1) / eps
    k = 1
    while (k + 1) ** 3 <= inv:
        k += 1
    return Fraction(1, k)


def small_bound(eps: Fraction) -> Fraction:
    """The pre-asymptotic retention factor 1 - delta - 36 eps / delta^2."""
    d = small_delta(eps)
    return 1 - d - 36 * eps / d / d


def _family_delta(delta: Fraction) -> Fraction:
    """Round delta up to 1/q with q the largest prime power <= 1/delta.

    The loss function delta + 36 eps/delta^2 is decreasing on this range, so
    rounding up is conservative for the certified bound.
    """
    n0 = int(Fraction(1, 1) / delta)
    q = n0
    while q >= 2 and prime_power_base(q) is None:
        q -= 1
    if q < 2:
        raise ValueError(f"delta {delta} too large to derandomise")
    out = Fraction(1, q)
    assert delta <= out <= 2 * delta
    return out


def _greedy_admit(instance: Instance, candidates, demand=None, caps=None):
    """Admit edges in id order while feasibility is preserved."""
    demand = demand or instance.demand
    caps = caps or instance.capacities
    used = {v: Fraction(0) for v in instance.vertices}
    out = []
    for e in sorted(candidates):
        fits = all(used[v] + demand(v, e) <= caps[v]
                   for v, _ in instance.edge(e).endpoints)
        if fits:
            out.append(e)
            for v, _ in instance.edge(e).endpoints:
                used[v] += demand(v, e)
    return frozenset(out)


def _family_greedy(instance: Instance, edges, keep: Fraction,
                   demand=None, caps=None):
    """Best-of-family inclusion pruning plus the keep-everything candidate.

    Returns (best set, best value, family average value, per-edge survival
    frequencies); profits are always the instance profits.
    """
    edges = sorted(edges)
    eidx = {e: i for i, e in enumerate(edges)}
    fam = PairwiseFamily(len(edges), keep)
    n_events = len(fam)
    survive = {e: 0 for e in edges}
    total_value = Fraction(0)
    best = None
    for ev in fam.events():
        kept = [e for e in edges if ev[eidx[e]]]
        chosen = _greedy_admit(instance, kept, demand, caps)
        value = instance.profit(chosen)
        total_value += value
        for e in chosen:
            survive[e] += 1
        if best is None or value > best[0]:
            best = (value, chosen)
    all_in = _greedy_admit(instance, edges, demand, caps)
    ai_value = instance.profit(all_in)
    if best is None or ai_value > best[0]:
        best = (ai_value, all_in)
    avg = total_value / n_events
    freqs = {e: Fraction(c, n_events) for e, c in survive.items()}
    # exact identity: the family average equals the survival-weighted profit
    assert avg == sum((instance.edge(e).profit * freqs[e] for e in edges),
                      Fraction(0))
    assert best[0] >= avg
    return best[1], best[0], avg, freqs


def prune_small(instance: Instance, rel: RelaxedOutput, eps: Fraction) -> Solution:
    """eps-small instances: pairwise-independent inclusion family + greedy.

    Certifies p(M) >= (1 - delta' - 36 eps/delta'^2) p(M') against the family
    actually used (delta' is delta rounded up to a prime-power reciprocal),
    which implies the nominal delta = eps^(1/3) bound.  When that bound is
    vacuous (it needs eps < 37^-3) the general pruner is used instead.
    """
    eps = Fraction(eps)
    worst = classify(instance)["epsilon_small"]
    if worst > eps:
        raise ValueError(f"instance is only {worst}-small, not {eps}-small")
    bound = small_bound(eps)
    if bound <= 0:
        warnings.warn("eps too large for a positive small-edge bound "
                      f"(1 - 37 eps^(1/3) <= 0 at eps={eps}); "
                      "falling back to the general pruner")
        return prune_general(instance, rel)
    if not rel.m_prime:
        return Solution(())
    delta = small_delta(eps)
    dfam = _family_delta(delta)
    fam_bound = 1 - dfam - 36 * eps / dfam / dfam
    assert fam_bound >= bound > 0, "rounded delta must not weaken the bound"
    # validity window of the concentration argument
    assert (1 - dfam) * (1 + 2 * eps) + dfam / 3 <= 1 - eps, \
        "eps outside the window where the tail bound applies"
    best_set, best_value, avg, freqs = _family_greedy(
        instance, rel.m_prime, 1 - dfam)
    for e, fr in freqs.items():
        assert fr >= fam_bound, \
            f"edge {e} survival {fr} fell below the certified {fam_bound}"
    target = bound * instance.profit(rel.m_prime)
    assert best_value >= fam_bound * instance.profit(rel.m_prime) >= target
    assert is_feasible(instance, best_set)
    return Solution(best_set)


# -- dispatch -----------------------------------------------------------------


STRATEGY_BOUNDS = {
    "general": Fraction(25, 3),
    "bipartite": Fraction(7),
    "consistent": Fraction(5),
    "conflict-free": Fraction(4),
}


def applicable_strategies(instance: Instance, eps=None) -> dict:
    """Map of strategy name -> certified lp/p bound for this instance."""
    cls = classify(instance)
    out = {"general": STRATEGY_BOUNDS["general"]}
    if cls["bipartite"]:
        out["bipartite"] = STRATEGY_BOUNDS["bipartite"]
    if cls["consistent_order"] is not None:
        out["consistent"] = STRATEGY_BOUNDS["consistent"]
    if cls["conflict_free"]:
        out["conflict-free"] = STRATEGY_BOUNDS["conflict-free"]
    eps = cls["epsilon_small"] if eps is None else Fraction(eps)
    if eps > 0 and cls["epsilon_small"] <= eps:
        factor = small_bound(eps)
        if factor > 0:
            out["small"] = 1 / factor
    return out


def solve(instance: Instance, matroid, strategy: str = "auto",
          eps=None) -> dict:
    """Full pipeline: relax, prune, certify.

    Returns {"solution": Solution, "certificate": {...}, "relaxed": rel}.
    The certificate carries exact rational strings and the inequality
    lp/p <= bound is asserted before returning.
    """
    _, dropped = validate(instance)
    if dropped:
        raise ValueError(f"instance not validated; edges {dropped} do not fit "
                         "alone (run validate first)")
    if instance.k != 2:
        raise ValueError("pruning strategies need k = 2")
    cls = classify(instance)
    cands = applicable_strategies(instance, eps)
    use_eps = Fraction(eps) if eps is not None else cls["epsilon_small"]
    if strategy == "auto":
        strategy = min(sorted(cands), key=lambda s: cands[s])
    if strategy == "small" and "small" not in cands:
        if cls["epsilon_small"] > use_eps:
            raise ValueError(f"instance is not {use_eps}-small")
        warnings.warn("small-edge bound vacuous here; using the general pruner")
        strategy = "general"
    if strategy not in cands:
        raise ValueError(f"strategy {strategy!r} inapplicable; "
                         f"choices: {sorted(cands)}")

    rel = iterated_relax(instance, matroid)
    lp = Fraction(rel.trace[0]["lp"]) if rel.trace else Fraction(0)
    if strategy == "general":
        sol = prune_general(instance, rel)
    elif strategy == "bipartite":
        sol = prune_bipartite(instance, rel)
    elif strategy == "consistent":
        sol = prune_consistent(instance, rel, cls["consistent_order"])
    elif strategy == "conflict-free":
        sol = prune_conflict_free(instance, rel)
    elif strategy == "small":
        sol = prune_small(instance, rel, use_eps)
    else:
        raise ValueError(f"unknown strategy {strategy!r}")

    assert is_feasible(instance, sol, matroid), "final solution infeasible"
    p = instance.profit(sol.edge_ids)
    bound = cands[strategy]
    ratio = lp / p if p else Fraction(1)
    assert ratio <= bound, f"certified ratio {ratio} exceeds bound {bound}"
    certificate = {
        "strategy": strategy,
        "p": str(p),
        "lp": str(lp),
        "ratio": str(ratio),
        "bound": str(bound),
        "feasible": True,
    }
    return {"solution": sol, "certificate": certificate, "relaxed": rel}
