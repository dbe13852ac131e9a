"""Independent checkers and brute-force oracles.

Nothing here imports a solver module; every predicate works from the
instance and the produced artifact alone, through graph-core.
"""

from __future__ import annotations

import math
from collections import deque
from fractions import Fraction
from typing import Iterable, Sequence

from .graph_core import (Digraph, MovingCut, Number, PathFlow, ScaledReal,
                         h_length_distance, lightest_within_budget)

REL_TOL = 1e-9


class EnumerationLimit(RuntimeError):
    pass


def enumerate_h_paths(g: Digraph, h: int, S: Iterable[int] | None = None,
                      T: Iterable[int] | None = None, limit: int = 100_000
                      ) -> list[tuple[int, ...]]:
    """All simple S-T paths of total length at most h, as arc tuples."""
    S = set(g.S if S is None else S)
    T = set(g.T if T is None else T)
    found: list[tuple[int, ...]] = []
    for s in sorted(S):
        stack = [(s, (), 0, frozenset([s]))]
        while stack:
            v, path, length, seen = stack.pop()
            if path and v in T:
                found.append(path)
                if len(found) > limit:
                    raise EnumerationLimit(f"more than {limit} paths")
            for a in g.out_arcs[v]:
                u = g.heads[a]
                nl = length + g.lengths[a]
                if nl <= h and u not in seen:
                    stack.append((u, path + (a,), nl, seen | {u}))
    found.sort()
    return found


def verify_moving_cut(g: Digraph, w: MovingCut, h: int, S=None, T=None) -> bool:
    """Every h-length S-T path has weight at least 1 (ties count as feasible)."""
    if len(w) != g.m or any(x < 0 for x in w.weights):
        return False
    d = h_length_distance(g, w, h, S, T)
    return d == math.inf or d.compare(1, REL_TOL) >= 0


def flow_problems(g: Digraph, f: PathFlow, h: int, S=None, T=None,
                  caps: Sequence[Number] | None = None) -> list[str]:
    """Reasons f is not a feasible h-length S-T path flow (empty when it is)."""
    sub = g if S is None and T is None else g.with_terminals(
        g.S if S is None else S, g.T if T is None else T)
    caps = g.caps if caps is None else caps
    problems = []
    eta = Fraction(f.eta)
    if eta < 0:
        problems.append("negative scale")
    load = [Fraction(0)] * g.m
    for path, mult in f.paths():
        if Fraction(mult) <= 0:
            problems.append(f"nonpositive multiplicity on {path}")
        if not sub.is_st_path(path):
            problems.append(f"{path} is not a simple S-T path")
        elif sub.path_length(path) > h:
            problems.append(f"{path} is longer than {h}")
        for a in path:
            load[a] += eta * Fraction(mult)
    for a, (x, u) in enumerate(zip(load, caps)):
        if x > u:
            problems.append(f"arc {a} carries {x} > {u}")
    return problems


def verify_flow(g: Digraph, f: PathFlow, h: int, S=None, T=None) -> bool:
    return not flow_problems(g, f, h, S, T)


def _path_weight(w: MovingCut, path: Sequence[int]) -> ScaledReal:
    total = ScaledReal.zero()
    for a in path:
        total = total + w.weights[a]
    return total


def verify_blocker(g: Digraph, f: PathFlow, w: MovingCut, h: int,
                   lam: ScaledReal | Number, eps: float) -> bool:
    """Integral feasible h-length flow on near-lightest paths that leaves no
    unsaturated h-length path of weight at most (1 + eps) lam."""
    lam = ScaledReal.from_value(lam)
    if flow_problems(g, f, h) or Fraction(f.eta) != 1:
        return False
    heavy = lam * (1 + 2 * eps)
    for path, mult in f.paths():
        if mult != int(mult) or _path_weight(w, path).compare(heavy, REL_TOL) > 0:
            return False
    load = f.counts()
    open_arcs = [load[a] < g.caps[a] for a in range(g.m)]
    best = lightest_within_budget(g, w.weights, h, g.S, g.T,
                                  allowed=lambda a: open_arcs[a], zero=ScaledReal.zero())
    return best is None or best > lam * (1 + eps)


def verify_cutmatch(g: Digraph, flow: PathFlow, cut: MovingCut, gamma: Number,
                    h: int, phi: Number) -> bool:
    return not cutmatch_problems(g, flow, cut, gamma, h, phi)


def boundary_arcs(g: Digraph) -> set[int]:
    """Arcs leaving S or entering T."""
    return {a for a in range(g.m) if g.tails[a] in g.S or g.heads[a] in g.T}


def cutmatch_problems(g: Digraph, flow: PathFlow, cut: MovingCut, gamma: Number,
                      h: int, phi: Number) -> list[str]:
    """Check the three cutmatch conditions.

    1. flow is an integral h-length S-T flow within U on boundary arcs and
       gamma * U elsewhere;
    2. sum_a w_a U_a <= phi * (U+(S) - val(flow));
    3. with lengths set to h + 1 on saturated boundary arcs and to
       l_a + h * w_a elsewhere, no S-T path has length at most h.
    """
    problems = []
    boundary = boundary_arcs(g)
    caps = [u if a in boundary else Fraction(gamma) * u for a, u in enumerate(g.caps)]
    if Fraction(flow.eta) != 1 or any(m != int(m) for _, m in flow.paths()):
        problems.append("flow is not integral")
    problems.extend(flow_problems(g, flow, h, caps=caps))
    out_cap = sum(g.caps[a] for a in range(g.m) if g.tails[a] in g.S)
    value = Fraction(flow.total_multiplicity())
    cost = cut.cost(g.caps)
    budget = Fraction(phi) * (out_cap - value)
    if cost.compare(ScaledReal.from_value(max(budget, 0)), REL_TOL) > 0:
        problems.append(f"cut cost {cost.to_float()} exceeds {float(budget)}")
    if _short_path_survives(g, flow, cut, h, boundary):
        problems.append("an h-length path survives the modified lengths")
    return problems


def modified_lengths_exceed(g: Digraph, flow: PathFlow, cut: MovingCut, h: int) -> bool:
    return not _short_path_survives(g, flow, cut, h, boundary_arcs(g))


def _short_path_survives(g: Digraph, flow: PathFlow, cut: MovingCut, h: int,
                         boundary: set[int]) -> bool:
    """Is there an S-T path with l(P) + h * w(P) <= h that avoids saturated
    boundary arcs?  Checked per length budget L: the lightest path within L
    survives iff L + h * weight <= h."""
    load = flow.counts()
    allowed = [not (a in boundary and load[a] >= g.caps[a]) for a in range(g.m)]
    for budget in range(1, h + 1):
        best = lightest_within_budget(g, cut.weights, budget, g.S, g.T,
                                      allowed=lambda a: allowed[a], zero=ScaledReal.zero())
        if best is not None and best <= ScaledReal.from_value(Fraction(h - budget, h)):
            return True
    return False


def max_flow_value(g: Digraph, caps: Sequence[int] | None = None) -> int:
    """Maximum S-T flow value by shortest augmenting paths (unbounded length)."""
    caps = list(g.caps if caps is None else caps)
    n = g.n + 2
    src, snk = g.n, g.n + 1
    cap: dict[tuple[int, int], int] = {}
    adj: list[set[int]] = [set() for _ in range(n)]

    def add(u: int, v: int, c: int) -> None:
        cap[(u, v)] = cap.get((u, v), 0) + c
        cap.setdefault((v, u), 0)
        adj[u].add(v)
        adj[v].add(u)

    big = sum(caps) + 1
    for a in range(g.m):
        add(g.tails[a], g.heads[a], caps[a])
    for s in g.S:
        add(src, s, big)
    for t in g.T:
        add(t, snk, big)
    total = 0
    while True:
        parent = {src: src}
        queue = deque([src])
        while queue and snk not in parent:
            u = queue.popleft()
            for v in adj[u]:
                if v not in parent and cap[(u, v)] > 0:
                    parent[v] = u
                    queue.append(v)
        if snk not in parent:
            return total
        push, v = big, snk
        while v != src:
            push = min(push, cap[(parent[v], v)])
            v = parent[v]
        v = snk
        while v != src:
            cap[(parent[v], v)] -= push
            cap[(v, parent[v])] += push
            v = parent[v]
        total += push


def enumerated_path_counts(g: Digraph, caps: Sequence[int] | None = None
                           ) -> tuple[list[int], list[int]]:
    """(per-source weighted path counts, per-arc weighted path counts) by
    listing every S-T path in a DAG and multiplying capacities along it."""
    caps = g.caps if caps is None else caps
    per_source = [0] * g.n
    per_arc = [0] * g.m
    for path in enumerate_h_paths(g, sum(g.lengths), limit=10 ** 6):
        # in an S-T DAG only paths ending at a sink without passing one count
        if any(g.heads[a] in g.T for a in path[:-1]) or any(
                g.tails[a] in g.S for a in path[1:]):
            continue
        weight = math.prod(caps[a] for a in path)
        per_source[g.tails[path[0]]] += weight
        for a in path:
            per_arc[a] += weight
    return per_source, per_arc


# ---------------------------------------------------------------- disjoint paths

def _undirected_paths(g: Digraph, h: int, limit: int) -> list[tuple[tuple[int, bool], ...]]:
    """Simple S-T paths in the undirected reading of g, as (edge, forward) steps."""
    found = []
    adj: list[list[tuple[int, int, bool]]] = [[] for _ in range(g.n)]
    for e in range(g.m):
        u, v = g.tails[e], g.heads[e]
        adj[u].append((e, v, True))
        adj[v].append((e, u, False))
    for s in sorted(g.S):
        stack = [(s, (), 0, frozenset([s]))]
        while stack:
            v, path, length, seen = stack.pop()
            if path and v in g.T:
                found.append(path)
                if len(found) > limit:
                    raise EnumerationLimit(f"more than {limit} paths")
            for e, u, fwd in adj[v]:
                nl = length + g.lengths[e]
                if nl <= h and u not in seen:
                    stack.append((u, path + ((e, fwd),), nl, seen | {u}))
    return found


def candidate_paths(g: Digraph, variant: str, h: int, limit: int = 20_000):
    """(path, resources) pairs: two paths conflict iff their resources meet."""
    if variant in ("darc", "dvertex"):
        paths = enumerate_h_paths(g, h, limit=limit)
        if variant == "darc":
            return [(p, frozenset(p)) for p in paths]
        return [(p, frozenset(g.path_vertices(p))) for p in paths]
    if variant in ("edge", "vertex"):
        paths = _undirected_paths(g, h, limit)
        out = []
        for p in paths:
            if variant == "edge":
                out.append((p, frozenset(e for e, _ in p)))
            else:
                verts = set()
                for e, _ in p:
                    verts.add(g.tails[e])
                    verts.add(g.heads[e])
                out.append((p, frozenset(verts)))
        return out
    raise ValueError(f"unknown variant {variant!r}")


def brute_force_disjoint_paths(g: Digraph, variant: str, h: int, cap: int = 2000) -> int:
    """Maximum number of pairwise disjoint h-length S-T paths (exact).

    For the arc variant, capacities are honoured by allowing an arc to be
    shared by up to U_a paths; the other variants use unit resources.
    """
    cands = candidate_paths(g, variant, h, limit=cap)
    if variant == "darc":
        return _max_packing_with_caps([p for p, _ in cands], g.caps)
    res = [r for _, r in cands]
    best = 0

    def grow(start: int, used: frozenset, count: int) -> None:
        nonlocal best
        if count + (len(res) - start) <= best:
            return
        best = max(best, count)
        for i in range(start, len(res)):
            if not (res[i] & used):
                grow(i + 1, used | res[i], count + 1)

    grow(0, frozenset(), 0)
    return best


def _max_packing_with_caps(paths: Sequence[tuple[int, ...]], caps: Sequence[int]) -> int:
    best = 0
    left = list(caps)

    def grow(start: int, count: int) -> None:
        nonlocal best
        best = max(best, count)
        for i in range(start, len(paths)):
            p = paths[i]
            if all(left[a] > 0 for a in p):
                for a in p:
                    left[a] -= 1
                # the same path may be taken again if capacity remains
                grow(i, count + 1)
                for a in p:
                    left[a] += 1

    grow(0, 0)
    return best


def paths_are_disjoint(g: Digraph, variant: str, paths: Sequence) -> bool:
    """Pairwise disjointness of output paths in the given variant's sense.

    Directed variants take arc tuples; undirected variants take edge tuples
    (edge ids along the path, in order).
    """
    if variant == "darc":
        load: dict[int, int] = {}
        for p in paths:
            for a in p:
                load[a] = load.get(a, 0) + 1
        return all(x <= g.caps[a] for a, x in load.items())
    seen: set = set()
    for p in paths:
        if variant == "edge":
            res = set(p)
        elif variant == "dvertex":
            res = set(g.path_vertices(p))
        else:
            res = set()
            for e in p:
                res.add(g.tails[e])
                res.add(g.heads[e])
        if res & seen:
            return False
        seen |= res
    return True


def is_h_path_in_variant(g: Digraph, variant: str, path: Sequence[int], h: int) -> bool:
    """Is `path` a simple S-T path of length at most h in the variant's graph?"""
    if variant in ("darc", "dvertex"):
        return g.is_st_path(path) and g.path_length(path) <= h
    if not path:
        return False
    ends = [(g.tails[e], g.heads[e]) for e in path]
    starts = [v for v in ends[0] if v in g.S]
    for start in starts:
        cur, verts, ok = start, [start], True
        for u, v in ends:
            if cur == u:
                cur = v
            elif cur == v:
                cur = u
            else:
                ok = False
                break
            verts.append(cur)
        if ok and cur in g.T and len(set(verts)) == len(verts) and \
                sum(g.lengths[e] for e in path) <= h:
            return True
    return False


def residual_has_h_path(g: Digraph, variant: str, paths: Sequence, h: int) -> bool:
    """After deleting what `paths` use, does an h-length S-T path remain?"""
    if variant == "darc":
        load = [0] * g.m
        for p in paths:
            for a in p:
                load[a] += 1
        return lightest_within_budget(g, [0] * g.m, h, g.S, g.T,
                                      allowed=lambda a: load[a] < g.caps[a]) is not None
    used_vertices: set[int] = set()
    used_arcs: set[int] = set()
    for p in paths:
        used_arcs.update(p)
        for e in p:
            used_vertices.add(g.tails[e])
            used_vertices.add(g.heads[e])
    if variant in ("vertex", "edge"):
        arcs = []
        for e in range(g.m):
            u, v = g.tails[e], g.heads[e]
            arcs.append((u, v, 1, g.lengths[e]))
            arcs.append((v, u, 1, g.lengths[e]))
        both = Digraph(g.n, arcs, g.S, g.T)
        if variant == "edge":
            ok = [a // 2 not in used_arcs for a in range(both.m)]
        else:
            ok = [both.tails[a] not in used_vertices and both.heads[a] not in used_vertices
                  for a in range(both.m)]
        return lightest_within_budget(both, [0] * both.m, h, g.S - used_vertices
                                      if variant == "vertex" else g.S, g.T,
                                      allowed=lambda a: ok[a]) is not None
    ok = [g.tails[a] not in used_vertices and g.heads[a] not in used_vertices
          for a in range(g.m)]
    return lightest_within_budget(g, [0] * g.m, h, g.S - used_vertices, g.T,
                                  allowed=lambda a: ok[a]) is not None


# ---------------------------------------------------------------- b-matching

def brute_force_b_matching(edges: Sequence[tuple[int, int]], budgets: dict[int, int] | Sequence[int],
                           edge_caps: Sequence[int], cap: int = 12) -> int:
    """Exact maximum of sum x_e with 0 <= x_e <= U_e and per-vertex budgets."""
    if len(edges) > cap:
        raise EnumerationLimit(f"{len(edges)} edges exceed the enumeration cap {cap}")
    budgets = dict(budgets) if isinstance(budgets, dict) else dict(enumerate(budgets))
    left = dict(budgets)
    best = 0
    remaining_cap = [0] * (len(edges) + 1)
    for i in range(len(edges) - 1, -1, -1):
        u, v = edges[i]
        bound = min(edge_caps[i], budgets.get(u, 0), budgets.get(v, 0))
        remaining_cap[i] = remaining_cap[i + 1] + bound

    def grow(i: int, total: int) -> None:
        nonlocal best
        best = max(best, total)
        if i == len(edges) or total + remaining_cap[i] <= best:
            return
        u, v = edges[i]
        top = min(edge_caps[i], left.get(u, 0), left.get(v, 0))
        for x in range(top, -1, -1):
            left[u] -= x
            left[v] -= x
            grow(i + 1, total + x)
            left[u] += x
            left[v] += x

    grow(0, 0)
    return best


def b_matching_feasible(edges: Sequence[tuple[int, int]], budgets, edge_caps: Sequence[int],
                        x: Sequence[int]) -> bool:
    budgets = dict(budgets) if isinstance(budgets, dict) else dict(enumerate(budgets))
    used: dict[int, int] = {}
    for (u, v), xe, ue in zip(edges, x, edge_caps):
        if xe != int(xe) or xe < 0 or xe > ue:
            return False
        used[u] = used.get(u, 0) + xe
        used[v] = used.get(v, 0) + xe
    return all(used[v] <= budgets.get(v, 0) for v in used)


def certify_bracket(primal: Number, dual: ScaledReal) -> bool:
    """Weak duality: a feasible flow never exceeds a feasible cut's cost."""
    return ScaledReal.from_value(primal).compare(dual, REL_TOL) <= 0
