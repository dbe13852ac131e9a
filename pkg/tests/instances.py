"""Small graph builders and seeded random families shared by the tests."""

from __future__ import annotations

import random
from fractions import Fraction

from artifact.graph_core import Digraph


def single_arc(cap: int = 1, length: int = 1) -> Digraph:
    return Digraph(2, [(0, 1, cap, length)], {0}, {1})


def diamond(caps: tuple[int, int, int, int] = (1, 1, 1, 1)) -> Digraph:
    """s=0 -> {1, 2} -> t=3; arcs 0:(0,1) 1:(0,2) 2:(1,3) 3:(2,3)."""
    arcs = [(0, 1), (0, 2), (1, 3), (2, 3)]
    return Digraph(4, [(u, v, c, 1) for (u, v), c in zip(arcs, caps)], {0}, {3})


def unit_path(k: int) -> Digraph:
    return Digraph(k + 1, [(i, i + 1, 1, 1) for i in range(k)], {0}, {k})


def random_layered(rng: random.Random, layers: int, width: int, max_cap: int = 4,
                   extra: float = 0.4, skip: float = 0.0) -> Digraph:
    """S-T DAG with `layers` arcs per path: every vertex has an in-arc from the
    previous layer and an out-arc to the next, plus random extra arcs."""
    sizes = [rng.randint(1, width) for _ in range(layers + 1)]
    ids, start = [], 0
    for s in sizes:
        ids.append(list(range(start, start + s)))
        start += s
    pairs = set()
    for i in range(1, layers + 1):
        for v in ids[i]:
            pairs.add((rng.choice(ids[i - 1]), v))
    for i in range(layers):
        for u in ids[i]:
            if not any(p[0] == u for p in pairs):
                pairs.add((u, rng.choice(ids[i + 1])))
            for v in ids[i + 1]:
                if rng.random() < extra:
                    pairs.add((u, v))
            if i + 2 <= layers and rng.random() < skip:
                pairs.add((u, rng.choice(ids[i + 2])))
    arcs = [(u, v, rng.randint(1, max_cap), 1) for u, v in sorted(pairs)]
    return Digraph(start, arcs, set(ids[0]), set(ids[-1]))


def random_digraph(rng: random.Random, n: int, m: int, max_cap: int = 4, max_len: int = 2,
                   planted: int = 1, h: int | None = None) -> Digraph:
    """Random simple digraph with source 0 and sink n-1 and `planted` short
    S-T paths through random intermediate vertices."""
    pairs: set[tuple[int, int]] = set()
    for _ in range(planted):
        k = rng.randint(0, min(2, n - 2))
        mids = rng.sample(range(1, n - 1), k)
        walk = [0] + mids + [n - 1]
        pairs.update(zip(walk, walk[1:]))
    tries = 0
    while len(pairs) < m and tries < 50 * m:
        tries += 1
        u, v = rng.sample(range(n), 2)
        if v != 0 and u != n - 1:
            pairs.add((u, v))
    arcs = [(u, v, rng.randint(1, max_cap), rng.randint(1, max_len)) for u, v in sorted(pairs)]
    return Digraph(n, arcs, {0}, {n - 1})


def random_undirected(rng: random.Random, n: int, m: int, planted: int = 1) -> Digraph:
    """Undirected simple graph (edges stored once, tail < head) with unit
    lengths and capacities, terminals 0 and n-1, and planted short paths."""
    edges: set[tuple[int, int]] = set()

    def add(u: int, v: int) -> None:
        if u != v:
            edges.add((min(u, v), max(u, v)))

    for _ in range(planted):
        k = rng.randint(0, min(2, n - 2))
        walk = [0] + rng.sample(range(1, n - 1), k) + [n - 1]
        for u, v in zip(walk, walk[1:]):
            add(u, v)
    tries = 0
    while len(edges) < m and tries < 50 * m:
        tries += 1
        add(*rng.sample(range(n), 2))
    return Digraph(n, [(u, v, 1, 1) for u, v in sorted(edges)], {0}, {n - 1})


def st_paths_in_dag(g: Digraph) -> list[tuple[int, ...]]:
    out = []

    def grow(v: int, path: tuple[int, ...]) -> None:
        if v in g.T:
            out.append(path)
            return
        for a in g.out_arcs[v]:
            grow(g.heads[a], path + (a,))

    for s in sorted(g.S):
        grow(s, ())
    return out


def random_path_flow(rng: random.Random, g: Digraph, pieces: int = 6,
                     denominators: tuple[int, ...] = (2, 3, 4, 5, 7, 8)) -> list[Fraction]:
    """Feasible fractional S-T flow: a random combination of S-T paths, each
    taking a random fraction of its remaining bottleneck."""
    paths = st_paths_in_dag(g)
    flow = [Fraction(0)] * g.m
    if not paths:
        return flow
    for _ in range(pieces):
        p = rng.choice(paths)
        room = min(g.caps[a] - flow[a] for a in p)
        if room <= 0:
            continue
        q = rng.choice(denominators)
        amount = room * Fraction(rng.randint(1, q), q)
        for a in p:
            flow[a] += amount
    return flow


def random_bipartite(rng: random.Random, max_edges: int = 12, max_cap: int = 3,
                     max_budget: int = 3):
    left = rng.randint(1, 4)
    right = rng.randint(1, 4)
    n = left + right
    cands = [(u, left + v) for u in range(left) for v in range(right)]
    rng.shuffle(cands)
    edges = cands[:rng.randint(1, min(max_edges, len(cands)))]
    caps = [rng.randint(1, max_cap) for _ in edges]
    budgets = [rng.randint(1, max_budget) for _ in range(n)]
    return n, edges, budgets, caps
