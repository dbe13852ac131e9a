"""Length-constrained cutmatches: an integral flow paired with a moving cut
that together show no further short flow fits at the given congestion."""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Callable, Sequence

import numpy as np

from .graph_core import (Digraph, MovingCut, Number, PathFlow, ScaledReal,
                         lightest_within_budget, scaled_sum)
from .mw import solve_pair

Paths = list[tuple[tuple[int, ...], int]]


def saturated_arcs(g: Digraph, f: PathFlow, c: Number) -> set[int]:
    """Arcs a with f(a) >= c * U_a."""
    if not 0 <= c <= 1:
        raise ValueError("saturation fraction must lie in [0, 1]")
    load = f.arc_values()
    c = Fraction(c)
    return {a for a in range(g.m) if Fraction(load[a]) >= c * g.caps[a]}


def boundary_arcs(g: Digraph) -> set[int]:
    """Arcs leaving S or entering T."""
    return {a for a in range(g.m) if g.tails[a] in g.S or g.heads[a] in g.T}


def congestion_bound(g: Digraph, phi: Number) -> float:
    """8 * ceil(log2(m * U_max + 2)) ** 2 / phi, the interior capacity scale."""
    return 8 * math.ceil(math.log2(g.m * g.max_cap + 2)) ** 2 / float(phi)


def _prefer(groups: dict[int, list[tuple[int, object, int]]], caps: Sequence[int]
            ) -> set[tuple[int, int]]:
    """For each arc, the components it prefers: sorted by key (largest first),
    the longest prefix whose loads fit in the arc's capacity."""
    chosen = set()
    for a, entries in groups.items():
        total = 0
        for j, _, load in sorted(entries, key=lambda e: e[1], reverse=True):
            if total + load > caps[a]:
                break
            total += load
            chosen.add((a, j))
    return chosen


def _one_side(comps: list[Paths], w: MovingCut, caps: Sequence[int], first: bool) -> Paths:
    """Preference pass on one end of the paths, then on the other.

    `first=True` starts from source arcs (ordering components by their load
    there) and finishes on sink arcs, ordering by the w-mass the surviving
    paths picked up at their source arcs.  `first=False` mirrors it.
    """
    head_end = (lambda p: p[0]) if first else (lambda p: p[-1])
    tail_end = (lambda p: p[-1]) if first else (lambda p: p[0])
    groups: dict[int, dict[int, int]] = {}
    for j, comp in enumerate(comps):
        for p, mult in comp:
            groups.setdefault(head_end(p), {}).setdefault(j, 0)
            groups[head_end(p)][j] += mult
    keyed = {a: [(j, (load, -j), load) for j, load in per.items()] for a, per in groups.items()}
    ok = _prefer(keyed, caps)
    kept = [[(p, mult) for p, mult in comp if (head_end(p), j) in ok]
            for j, comp in enumerate(comps)]

    loads: dict[int, dict[int, int]] = {}
    mass: dict[int, dict[int, ScaledReal]] = {}
    for j, comp in enumerate(kept):
        for p, mult in comp:
            a = tail_end(p)
            loads.setdefault(a, {}).setdefault(j, 0)
            loads[a][j] += mult
            cell = mass.setdefault(a, {})
            cell[j] = cell.get(j, ScaledReal.zero()) + w.weights[head_end(p)] * mult
    keyed = {a: [(j, (mass[a][j], -j), load) for j, load in per.items()]
             for a, per in loads.items()}
    ok = _prefer(keyed, caps)
    return [(p, mult) for j, comp in enumerate(kept) for p, mult in comp
            if (tail_end(p), j) in ok]


def _mass(paths: Paths, arcs: set[int], w: MovingCut) -> ScaledReal:
    return scaled_sum(w.weights[a] * mult for p, mult in paths for a in p if a in arcs)


def _fit(paths: Paths, room: dict[int, int]) -> Paths:
    """Keep each path with the largest multiplicity the remaining room allows."""
    out = []
    for p, mult in sorted(paths, key=lambda e: -e[1]):
        take = min([mult] + [room[a] for a in p if a in room])
        if take > 0:
            for a in p:
                if a in room:
                    room[a] -= take
            out.append((p, take))
    return out


def decongest_cutmatch(g: Digraph, f: PathFlow, saturated: set[int], w: MovingCut,
                       caps: Sequence[int] | None = None) -> PathFlow:
    """Integral sub-flow of the components of f that fits the capacities on
    boundary arcs and keeps a large share of the w-mass on `saturated`.

    Components are filtered by source-arc preference then sink-arc
    preference (and, separately, the mirror order); the variant with more
    w-mass on `saturated` is returned.
    """
    caps = g.caps if caps is None else caps
    comps = [[(tuple(p), int(mult)) for p, mult in comp] for comp in f.components]
    by_source = _one_side(comps, w, caps, True)
    by_sink = _one_side(comps, w, caps, False)
    best = by_source
    if _mass(by_sink, saturated, w) > _mass(by_source, saturated, w):
        best = by_sink
    room = {a: caps[a] for a in boundary_arcs(g)}
    out = PathFlow(g.m, 1)
    out.add_component(_fit(best, room))
    return out


@dataclass
class CutMatch:
    flow: PathFlow
    cut: MovingCut
    gamma: Fraction          # measured interior congestion max f(a) / U_a
    phi: float
    gamma_cap: float         # interior capacity scale used while routing
    phases: int = 0
    iterations: int = 0
    case_two: int = 0
    log: list[str] = field(default_factory=list)


def _surviving_path(g: Digraph, lengths: Sequence[int], caps: Sequence[int], h: int) -> bool:
    work = g.with_lengths(lengths)
    return lightest_within_budget(work, [0] * g.m, h, g.S, g.T,
                                  allowed=lambda a: caps[a] > 0) is not None


def cutmatch(g: Digraph, h: int, phi: Number, eps: float = 0.01, solve_eps: float = 0.5,
             mode: str = "det", seed=None, max_iterations: int = 10_000,
             on_iteration: Callable[[str], None] | None = None) -> CutMatch:
    """h-length phi-sparse cutmatch between g.S and g.T.

    Boundary arcs keep their capacities while interior capacities are
    scaled by `congestion_bound`.  Each phase fixes a moving cut w from one
    solve; each iteration solves again on what is left and, when the
    half-saturated boundary arcs carry enough of the cut's mass, routes a
    decongested integral part of that flow.  Otherwise w / (2 eps) is added
    to the interior cut weights, which lengthens the paths w blocks, and a
    new phase starts.  Stops once no h-length path survives.
    """
    if not 0 < float(phi) <= 1:
        raise ValueError("phi must lie in (0, 1]")
    gamma_cap = congestion_bound(g, phi)
    boundary = boundary_arcs(g)
    useless = {a for a in range(g.m) if g.heads[a] in g.S or g.tails[a] in g.T}
    work_caps = [0 if a in useless else
                 (g.caps[a] if a in boundary else math.floor(gamma_cap * g.caps[a]))
                 for a in range(g.m)]
    cut = [ScaledReal.one() if (a not in boundary and g.caps[a] == 0) else ScaledReal.zero()
           for a in range(g.m)]
    load = [0] * g.m
    routed: Paths = []
    result = CutMatch(PathFlow(g.m, 1), MovingCut(tuple(cut)), Fraction(0), float(phi), gamma_cap)
    if not g.S or not g.T:
        return result
    seeds = np.random.default_rng(seed)

    def lengths() -> list[int]:
        return [g.lengths[a] + min(h + 1, math.floor(h * cut[a].to_float()))
                for a in range(g.m)]

    def solve(cur_lengths):
        s = int(seeds.integers(2 ** 62)) if mode == "rand" else None
        return solve_pair(g.with_caps(work_caps).with_lengths(cur_lengths), h, solve_eps,
                          mode, s)

    cur_lengths = lengths()
    while _surviving_path(g, cur_lengths, work_caps, h):
        result.phases += 1
        first = solve(cur_lengths)
        w = first.cut
        f = first.flow
        while True:
            result.iterations += 1
            if result.iterations > max_iterations:
                raise RuntimeError("cutmatch exceeded its iteration cap")
            dual = w.cost(work_caps)
            value = ScaledReal.from_value(f.value)
            if value < dual * (1 - 2 * solve_eps):
                break
            half = [a for a in boundary if work_caps[a] > 0
                    and 2 * f.arc_values()[a] >= work_caps[a]]
            sat_mass = scaled_sum(w.weights[a] * work_caps[a] for a in half)
            routed_now: Paths = []
            if sat_mass >= dual * (0.5 - 3 * eps):
                part = decongest_cutmatch(g, f, set(half), w, work_caps)
                room = {a: work_caps[a] - load[a] for a in range(g.m) if a not in boundary}
                routed_now = _fit(part.paths(), room)
            if not routed_now:
                result.case_two += 1
                step = ScaledReal.from_value(1 / (2 * eps))
                for a in range(g.m):
                    if a not in boundary and a not in useless and work_caps[a] > 0:
                        cut[a] = cut[a] + w.weights[a] * step
                if on_iteration is not None:
                    on_iteration(f"phase {result.phases}: cut raised")
                break
            for p, mult in routed_now:
                for a in p:
                    load[a] += mult
                    if a in boundary:
                        work_caps[a] -= mult
            routed.extend(routed_now)
            if on_iteration is not None:
                on_iteration(f"phase {result.phases}: routed {sum(m for _, m in routed_now)}")
            if not _surviving_path(g, cur_lengths, work_caps, h):
                break
            f = solve(cur_lengths).flow
        cur_lengths = lengths()

    flow = PathFlow(g.m, 1)
    merged: dict[tuple[int, ...], int] = {}
    for p, mult in routed:
        merged[p] = merged.get(p, 0) + mult
    flow.add_component(sorted(merged.items()))
    gamma = max((Fraction(load[a], g.caps[a]) for a in range(g.m)
                 if a not in boundary and g.caps[a] > 0), default=Fraction(0))
    result.flow = flow
    result.cut = MovingCut(tuple(cut))
    result.gamma = gamma
    return result
