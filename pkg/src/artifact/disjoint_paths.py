"""Disjoint-path variants via reduction to arc-disjoint directed paths."""

from __future__ import annotations

from dataclasses import dataclass
from typing import Callable, Sequence

from .graph_core import Arc, Digraph, lightest_within_budget
from .mw import solve_pair

VARIANTS = ("vertex", "edge", "dvertex", "darc")


@dataclass(frozen=True)
class ReductionMap:
    """Arc-disjoint instance equivalent to a disjoint-paths instance.

    `origin[a]` is the original edge or arc that transformed arc a stands for,
    or None for gadget arcs that carry no original element.
    """

    variant: str
    source: Digraph
    graph: Digraph
    h: int
    origin: tuple[int | None, ...]

    def back(self, path: Sequence[int]) -> tuple[int, ...]:
        """Original path (edge ids for undirected variants, arc ids otherwise)."""
        return tuple(self.origin[a] for a in path if self.origin[a] is not None)


def reduce_to_arc_disjoint(g: Digraph, variant: str, h: int) -> ReductionMap:
    """Transform an instance so that arc-disjoint h'-length paths in the result
    correspond one to one with disjoint h-length paths of the variant.

    For the undirected variants each arc of g is read as an edge.

    vertex / dvertex: v splits into v_in -> v_out (length 1); an edge of
    length l becomes arcs u_out -> v_in of length 2l - 1 (both directions for
    vertex).  A path P maps to length 2 l(P) + 1, so h' = 2h + 1.
    edge: edge e = {u, v} becomes u, v -> x_in -> x_out -> u, v with every
    gadget arc of length l_e, so h' = 3h.
    darc: identity.
    """
    if variant not in VARIANTS:
        raise ValueError(f"unknown variant {variant!r}")
    if h < 1:
        raise ValueError("length bound must be at least 1")
    if variant == "darc":
        return ReductionMap(variant, g, g, h, tuple(range(g.m)))
    arcs: list[Arc] = []
    origin: list[int | None] = []
    if variant in ("vertex", "dvertex"):
        for v in range(g.n):
            arcs.append(Arc(2 * v, 2 * v + 1, 1, 1))
            origin.append(None)
        for e, a in enumerate(g.arcs):
            arcs.append(Arc(2 * a.tail + 1, 2 * a.head, 1, 2 * a.length - 1))
            origin.append(e)
            if variant == "vertex":
                arcs.append(Arc(2 * a.head + 1, 2 * a.tail, 1, 2 * a.length - 1))
                origin.append(e)
        S = {2 * s for s in g.S}
        T = {2 * t + 1 for t in g.T}
        return ReductionMap(variant, g, Digraph(2 * g.n, arcs, S, T), 2 * h + 1, tuple(origin))
    for e, a in enumerate(g.arcs):
        x_in, x_out = g.n + 2 * e, g.n + 2 * e + 1
        for v in (a.tail, a.head):
            arcs.append(Arc(v, x_in, 1, a.length))
            origin.append(None)
        arcs.append(Arc(x_in, x_out, 1, a.length))
        origin.append(e)
        for v in (a.tail, a.head):
            arcs.append(Arc(x_out, v, 1, a.length))
            origin.append(None)
    return ReductionMap(variant, g, Digraph(g.n + 2 * g.m, arcs, g.S, g.T), 3 * h,
                        tuple(origin))


def _has_h_path(g: Digraph, h: int, residual: Sequence[int]) -> bool:
    return lightest_within_budget(g, [0] * g.m, h, g.S, g.T,
                                  allowed=lambda a: residual[a] > 0) is not None


def _take_fitting(paths: Sequence[tuple[int, ...]], residual: list[int]) -> list[tuple[int, ...]]:
    taken = []
    for p in paths:
        if all(residual[a] > 0 for a in p):
            for a in p:
                residual[a] -= 1
            taken.append(p)
    return taken


def _unit_paths(component) -> list[tuple[int, ...]]:
    return [p for p, mult in component for _ in range(int(mult))]


def maximal_disjoint_paths(g: Digraph, variant: str, h: int, mode: str = "det", seed=None,
                           eps: float = 0.5,
                           on_round: Callable[[int, int], None] | None = None
                           ) -> list[tuple[int, ...]]:
    """Disjoint h-length S-T paths such that every other h-length S-T path
    meets one of them.

    Each round solves the flow problem on what is left, takes for every
    source the component routing the most flow out of it, keeps the paths
    that still fit, and deletes the used capacity.
    """
    red = reduce_to_arc_disjoint(g, variant, h)
    chosen = _extend_to_maximal(red, list(red.graph.caps), [], mode, seed, eps, on_round)
    return [red.back(p) for p in chosen]


def _extend_to_maximal(red: ReductionMap, residual: list[int], chosen: list[tuple[int, ...]],
                       mode: str, seed, eps: float,
                       on_round: Callable[[int, int], None] | None = None
                       ) -> list[tuple[int, ...]]:
    dg = red.graph
    rounds = 0
    while dg.S and dg.T and _has_h_path(dg, red.h, residual):
        rounds += 1
        result = solve_pair(dg.with_caps(residual), red.h, eps, mode, seed)
        picks: list[tuple[int, ...]] = []
        for s in sorted(dg.S):
            best, best_val = None, 0
            for comp in result.flow.components:
                val = sum(mult for p, mult in comp if dg.tails[p[0]] == s)
                if val > best_val:
                    best, best_val = comp, val
            if best is not None:
                picks.extend(_unit_paths([(p, m) for p, m in best if dg.tails[p[0]] == s]))
        taken = _take_fitting(picks, residual)
        if not taken:
            raise RuntimeError("a round of maximal disjoint paths made no progress")
        chosen.extend(taken)
        if on_round is not None:
            on_round(rounds, len(chosen))
    return chosen


def maximum_disjoint_paths(g: Digraph, variant: str, h: int, mode: str = "det", seed=None,
                           eps: float = 0.5) -> list[tuple[int, ...]]:
    """Approximately maximum disjoint h-length S-T paths.

    Starts from the single most valuable integral component of one flow
    solve, then keeps adding paths on the leftover capacity until no
    h-length path remains.  The additions never shrink the answer."""
    red = reduce_to_arc_disjoint(g, variant, h)
    dg = red.graph
    if not dg.S or not dg.T or not _has_h_path(dg, red.h, dg.caps):
        return []
    result = solve_pair(dg, red.h, eps, mode, seed)
    best, best_val = [], 0
    for comp in result.flow.components:
        val = sum(mult for _, mult in comp)
        if val > best_val:
            best, best_val = comp, val
    residual = list(dg.caps)
    chosen = _take_fitting(_unit_paths(best), residual)
    chosen = _extend_to_maximal(red, residual, chosen, mode, seed, eps)
    return [red.back(p) for p in chosen]
