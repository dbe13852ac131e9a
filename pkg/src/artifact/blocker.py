"""Length-weight expanded DAGs, decongestion and lightest path blockers."""

from __future__ import annotations

import math
from dataclasses import dataclass
from fractions import Fraction
from typing import Sequence

from .graph_core import Digraph, MovingCut, Number, PathFlow, ScaledReal, h_length_distance
from .layered import LayeredDag, blocking_integral_flow, has_open_path
from .sparse import sparse_decompose

# Slack used when snapping float weight ratios to the integer grid, so that a
# ratio that is an exact grid multiple up to float noise is not pushed one
# step up.
GRID_SLACK = 1e-9


def copies_per_vertex(h: int, eps: Number) -> float:
    """kappa = h * (h/eps + 2h), the copy budget of one vertex."""
    return h * (h / eps + 2 * h)


def round_weights(w: MovingCut | Sequence, eps: Number, lam: Number | ScaledReal, h: int
                  ) -> list[ScaledReal]:
    """Round each weight up to the nearest multiple of eps * lam / h."""
    if not lam > 0:
        raise ValueError("lambda must be positive")
    lam = ScaledReal.from_value(lam)
    grain = lam * ScaledReal.from_value(Fraction(eps) / h if not isinstance(eps, float)
                                        else eps / h)
    weights = w.weights if isinstance(w, MovingCut) else [ScaledReal.from_value(x) for x in w]
    out = []
    for x in weights:
        steps = math.ceil((x / grain).to_float() - GRID_SLACK)
        out.append(grain * max(steps, 0))
    return out


def weight_steps(ratios: Sequence[float], h: int, eps: float) -> list[int | None]:
    """Grid index ceil(w_a / g) of every arc, where ratios hold w_a / lambda
    and g = eps * lambda / h.  None marks an arc too heavy to index."""
    scale = h / eps
    out: list[int | None] = []
    for r in ratios:
        if math.isinf(r):
            out.append(None)
        else:
            out.append(max(0, math.ceil(r * scale - GRID_SLACK)))
    return out


def grid_top(h: int, eps: float) -> int:
    """Largest usable weight index, floor((1 + 2 eps) * h / eps)."""
    return math.floor((1 + 2 * eps) * h / eps + GRID_SLACK)


@dataclass(frozen=True)
class ExpandedDag:
    """Copies v(x, l) of graph vertices indexed by rounded weight x (in grid
    steps) and length l, pruned to states on a source-to-sink copy path."""

    dag: LayeredDag
    arc_of: tuple[int, ...]
    states: tuple[tuple[int, int, int], ...]
    kappa: float

    def copies_of(self, a: int) -> list[int]:
        return [c for c, orig in enumerate(self.arc_of) if orig == a]

    def copy_caps(self, residual: Sequence[int]) -> list[int]:
        caps = []
        for orig in self.arc_of:
            r = residual[orig]
            caps.append(r if r <= self.kappa else int(r // self.kappa))
        return caps

    def project(self, copy_path: Sequence[int]) -> list[int]:
        return [self.arc_of[c] for c in copy_path]


def expand_from_ratios(g: Digraph, ratios: Sequence[float], h: int, eps: float,
                       residual: Sequence[int] | None = None) -> ExpandedDag:
    """Expanded DAG from normalized weights ratios[a] = w_a / lambda."""
    residual = g.caps if residual is None else residual
    steps = weight_steps(ratios, h, eps)
    top = grid_top(h, eps)
    usable = [a for a in range(g.m) if residual[a] > 0 and steps[a] is not None
              and steps[a] <= top and g.lengths[a] <= h]
    out_usable: list[list[int]] = [[] for _ in range(g.n)]
    for a in usable:
        out_usable[g.tails[a]].append(a)
    for lst in out_usable:
        lst.sort(key=lambda a: (steps[a], a))

    index: dict[tuple[int, int, int], int] = {}
    states: list[tuple[int, int, int]] = []
    buckets: list[list[int]] = [[] for _ in range(h + 1)]
    arcs: list[tuple[int, int, int]] = []

    def state(key: tuple[int, int, int]) -> int:
        sid = index.get(key)
        if sid is None:
            sid = index[key] = len(states)
            states.append(key)
            buckets[key[2]].append(sid)
        return sid

    for s in sorted(g.S):
        state((s, 0, 0))
    for length in range(h + 1):
        for sid in buckets[length]:
            v, x, _ = states[sid]
            if v in g.T:
                continue
            room = top - x
            for a in out_usable[v]:
                step = steps[a]
                if step > room:
                    break
                nl = length + g.lengths[a]
                if nl > h:
                    continue
                arcs.append((sid, state((g.heads[a], x + step, nl)), a))

    alive = [states[sid][0] in g.T for sid in range(len(states))]
    by_tail: dict[int, list[int]] = {}
    for i, (u, _, _) in enumerate(arcs):
        by_tail.setdefault(u, []).append(i)
    for length in range(h, -1, -1):
        for sid in buckets[length]:
            if not alive[sid]:
                alive[sid] = any(alive[arcs[i][1]] for i in by_tail.get(sid, ()))

    keep = [sid for sid in range(len(states)) if alive[sid]]
    renum = {sid: i for i, sid in enumerate(keep)}
    kept_arcs = [(renum[u], renum[v], a) for u, v, a in arcs if alive[u] and alive[v]]
    kept_states = tuple(states[sid] for sid in keep)
    sources = {i for i, (v, x, l) in enumerate(kept_states) if l == 0 and v in g.S}
    sinks = {i for i, (v, _, _) in enumerate(kept_states) if v in g.T}
    kappa = copies_per_vertex(h, eps)
    arc_of = tuple(a for _, _, a in kept_arcs)
    copy_caps = [residual[a] if residual[a] <= kappa else int(residual[a] // kappa)
                 for a in arc_of]
    dag = LayeredDag.build(len(keep), [u for u, _, _ in kept_arcs], [v for _, v, _ in kept_arcs],
                           copy_caps, sources, sinks, [l for _, _, l in kept_states])
    return ExpandedDag(dag, arc_of, kept_states, kappa)


def _ratios(w: MovingCut, lam: ScaledReal | Number) -> list[float]:
    lam = ScaledReal.from_value(lam)
    return [(x / lam).to_float() for x in w.weights]


def build_expanded_dag(g: Digraph, w: MovingCut, h: int, lam: ScaledReal | Number,
                       eps: float) -> ExpandedDag:
    if not lam > 0:
        raise ValueError("lambda must be positive")
    return expand_from_ratios(g, _ratios(w, lam), h, float(eps))


def shortcut(g: Digraph, walk: Sequence[int]) -> tuple[int, ...]:
    """Erase loops from an arc walk, leaving a simple path between its ends."""
    path: list[int] = []
    pos = {g.tails[walk[0]]: 0}
    for a in walk:
        v = g.heads[a]
        if v in pos:
            i = pos[v]
            for b in path[i:]:
                del pos[g.heads[b]]
            del path[i:]
            pos[v] = i
        else:
            path.append(a)
            pos[v] = len(path)
    return tuple(path)


def decongest_paths(entries: Sequence[tuple[tuple[int, ...], int]], caps: Sequence[int]
                    ) -> list[tuple[tuple[int, ...], int]]:
    """Greedy weighted independent set on the conflict graph of `entries`.

    Two entries conflict when they share an arc whose total load exceeds its
    capacity.  Entries are scanned by value (largest first, ties by position)
    and kept when they conflict with nothing kept so far, with the
    multiplicity clipped to the smallest capacity along an over-full arc.
    """
    load: dict[int, int] = {}
    for path, mult in entries:
        for a in path:
            load[a] = load.get(a, 0) + mult
    over = {a for a, x in load.items() if x > caps[a]}
    order = sorted(range(len(entries)), key=lambda i: (-entries[i][1], i))
    taken: set[int] = set()
    chosen: dict[int, int] = {}
    for i in order:
        path, mult = entries[i]
        hot = [a for a in path if a in over]
        if any(a in taken for a in hot):
            continue
        take = min([mult] + [caps[a] for a in hot])
        if take > 0:
            taken.update(hot)
            chosen[i] = take
    return [(entries[i][0], chosen[i]) for i in sorted(chosen)]


def decongest(g: Digraph, flow: PathFlow, alpha: Number,
              caps: Sequence[int] | None = None) -> PathFlow:
    """Capacity-feasible sub-flow of an alpha-congested integral path flow."""
    caps = g.caps if caps is None else caps
    for a, x in enumerate(flow.counts()):
        if x > caps[a] and x > alpha:
            raise ValueError(f"arc {a} carries {x}, beyond the congestion bound {alpha}")
    entries = [(p, mult) for p, mult in flow.paths()]
    for p, mult in entries:
        if mult != int(mult):
            raise ValueError("decongestion needs an integral path flow")
    out = PathFlow(g.m, 1)
    out.add_component(decongest_paths(entries, caps))
    return out


@dataclass
class BlockerFlow:
    flow: PathFlow
    lam: ScaledReal
    eps: float
    h: int
    rounds: int = 0


def blocker_from_ratios(g: Digraph, ratios: Sequence[float], h: int, eps: float,
                        mode: str = "det", rng=None, residual: Sequence[int] | None = None
                        ) -> tuple[list[tuple[tuple[int, ...], int]], list[int], int]:
    """Blocker core on normalized weights ratios[a] = w_a / lambda.

    Returns (paths with multiplicities, per-arc flow, rounds).  Each round
    takes a blocking flow on the expanded DAG under copy capacities derived
    from the current residual, decomposes it, projects and shortcuts the
    paths, and keeps a conflict-free subset.  Rounds stop once no copy path
    has positive residual along it.
    """
    residual = list(g.caps if residual is None else residual)
    ex = expand_from_ratios(g, ratios, h, eps, residual)
    flow = [0] * g.m
    chosen: list[tuple[tuple[int, ...], int]] = []
    if ex.dag.m == 0:
        return chosen, flow, 0
    limit = sum(residual[a] for a in set(ex.arc_of)) + 1
    for rounds in range(limit + 1):
        caps = ex.copy_caps(residual)
        if not has_open_path(ex.dag, caps):
            return chosen, flow, rounds
        dag = ex.dag.with_caps(caps)
        blocking = blocking_integral_flow(dag, mode, rng)
        decomposed = sparse_decompose(dag, blocking)
        entries = [(shortcut(g, ex.project(p)), int(mult)) for p, mult in decomposed.paths()]
        kept = decongest_paths(entries, residual)
        if not kept:
            raise RuntimeError("decongestion dropped every path")
        for path, mult in kept:
            for a in path:
                flow[a] += mult
                residual[a] -= mult
        chosen.extend(kept)
    raise RuntimeError("blocker exceeded its round cap")


def lightest_path_blocker(g: Digraph, w: MovingCut, h: int, lam: ScaledReal | Number,
                          eps: float, mode: str = "det", rng=None,
                          check: bool = True) -> BlockerFlow:
    """Integral h-length flow on paths of weight at most (1 + 2 eps) lam that
    saturates an arc of every h-length path of weight at most (1 + eps) lam."""
    if not 0 < eps < 1:
        raise ValueError("eps must lie in (0, 1)")
    lam = ScaledReal.from_value(lam)
    if check:
        dist = h_length_distance(g, w, h)
        if dist != math.inf and dist.compare(lam) < 0:
            raise ValueError("lambda exceeds the h-length distance between S and T")
    paths, _, rounds = blocker_from_ratios(g, _ratios(w, lam), h, float(eps), mode, rng)
    flow = PathFlow(g.m, 1)
    flow.add_component(paths)
    return BlockerFlow(flow, lam, float(eps), h, rounds)
