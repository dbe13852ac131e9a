"""Edge-capacitated bipartite b-matching through a 3-length flow."""

from __future__ import annotations

import math
from collections import deque
from dataclasses import dataclass
from fractions import Fraction
from typing import Sequence

from .graph_core import Arc, Digraph
from .layered import LayeredDag
from .mw import solve_pair
from .rounding import round_flow


class NotBipartite(ValueError):
    pass


def two_coloring(n: int, edges: Sequence[tuple[int, int]]) -> list[int]:
    """Side (0 or 1) of every vertex; isolated vertices go to side 0."""
    adj: list[list[int]] = [[] for _ in range(n)]
    for u, v in edges:
        if u == v:
            raise NotBipartite(f"self-loop at vertex {u}")
        adj[u].append(v)
        adj[v].append(u)
    side = [-1] * n
    for root in range(n):
        if side[root] >= 0:
            continue
        side[root] = 0
        queue = deque([root])
        while queue:
            u = queue.popleft()
            for v in adj[u]:
                if side[v] < 0:
                    side[v] = 1 - side[u]
                    queue.append(v)
                elif side[v] == side[u]:
                    raise NotBipartite("graph has an odd cycle")
    return side


@dataclass(frozen=True)
class BMatchingNetwork:
    """Split-vertex network: v_in = 2v, v_out = 2v + 1, with S the inputs of
    the left side and T the outputs of the right side."""

    graph: Digraph
    dag: LayeredDag
    edge_arc: tuple[int, ...]
    oriented: tuple[tuple[int, int], ...]


def b_matching_network(n: int, edges: Sequence[tuple[int, int]], budgets: Sequence[int],
                       edge_caps: Sequence[int] | None = None,
                       side: Sequence[int] | None = None) -> BMatchingNetwork:
    if len(budgets) != n:
        raise ValueError("need one budget per vertex")
    if any(b < 1 for b in budgets):
        raise ValueError("budgets must be at least 1")
    edge_caps = [1] * len(edges) if edge_caps is None else list(edge_caps)
    if len(edge_caps) != len(edges) or any(c < 0 for c in edge_caps):
        raise ValueError("need one nonnegative capacity per edge")
    side = two_coloring(n, edges) if side is None else list(side)
    arcs = [Arc(2 * v, 2 * v + 1, budgets[v], 1) for v in range(n)]
    edge_arc, oriented = [], []
    for (u, v), cap in zip(edges, edge_caps):
        if side[u] == side[v]:
            raise NotBipartite(f"edge ({u}, {v}) joins one side to itself")
        left, right = (u, v) if side[u] == 0 else (v, u)
        edge_arc.append(len(arcs))
        oriented.append((left, right))
        arcs.append(Arc(2 * left + 1, 2 * right, cap, 1))
    S = {2 * v for v in range(n) if side[v] == 0}
    T = {2 * v + 1 for v in range(n) if side[v] == 1}
    g = Digraph(2 * n, arcs, S, T)
    layer = [0] * (2 * n)
    for v in range(n):
        base = 0 if side[v] == 0 else 2
        layer[2 * v], layer[2 * v + 1] = base, base + 1
    dag = LayeredDag.build(g.n, g.tails, g.heads, g.caps, S, T, layer)
    return BMatchingNetwork(g, dag, tuple(edge_arc), tuple(oriented))


def b_matching(n: int, edges: Sequence[tuple[int, int]], budgets: Sequence[int],
               edge_caps: Sequence[int] | None = None, eps: float = 0.1, mode: str = "det",
               seed=None, side: Sequence[int] | None = None) -> list[int]:
    """Integral edge values x with x_e <= U_e and budgets respected, of total
    at least (1 - eps) times the best b-matching.

    The fractional 3-length flow is solved and rounded at accuracy eps1,
    starting from 1/2 and halving down to eps.  The moving cut's cost bounds
    the optimum from above, so a rounded value of at least
    ceil((1 - eps) * cost) certifies the target and stops early.  At
    eps1 = eps the rounding never loses value on an exact flow, so the
    integral value reaches ceil((1 - eps) * OPT) regardless.
    """
    if not 0 < eps < 1:
        raise ValueError("eps must lie in (0, 1)")
    net = b_matching_network(n, edges, budgets, edge_caps, side)
    if not edges:
        return []
    schedule = []
    acc = 0.5
    while acc > eps:
        schedule.append(acc)
        acc /= 2
    schedule.append(eps)
    best: list[int] = [0] * len(edges)
    for acc in schedule:
        result = solve_pair(net.graph, 3, acc, mode, seed)
        eta = Fraction(result.flow.eta)
        fractional = [eta * c for c in result.flow.counts()]
        integral = round_flow(net.dag, fractional, Fraction(acc))
        values = [int(integral[a]) for a in net.edge_arc]
        if sum(values) > sum(best):
            best = values
        bound = result.cut.cost(net.graph.caps).to_fraction()
        if sum(best) >= math.ceil((1 - Fraction(eps)) * bound - Fraction(1, 10 ** 9)):
            break
    return best
