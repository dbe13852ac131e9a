"""Eulerian partitions and bit-by-bit deterministic flow rounding."""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Sequence

from .graph_core import Number
from .layered import LayeredDag, extract_st_subflow

# A trail step is (edge id, forward); forward means it is walked from the
# edge's first endpoint to its second.
Step = tuple[int, bool]


@dataclass
class EulerianPartition:
    """Edge-disjoint oriented cycles and paths covering an undirected multigraph.

    A path's designated source is the vertex it is walked from.
    """

    edges: list[tuple[int, int]]
    cycles: list[list[Step]] = field(default_factory=list)
    paths: list[list[Step]] = field(default_factory=list)

    def start(self, trail: Sequence[Step]) -> int:
        e, fwd = trail[0]
        return self.edges[e][0] if fwd else self.edges[e][1]

    def end(self, trail: Sequence[Step]) -> int:
        e, fwd = trail[-1]
        return self.edges[e][1] if fwd else self.edges[e][0]

    def covered(self) -> list[int]:
        return sorted(e for t in self.cycles + self.paths for e, _ in t)


def eulerian_partition(n: int, edges: Sequence[tuple[int, int]]) -> EulerianPartition:
    """Exact Eulerian partition of an undirected multigraph.

    Trails are walked greedily, first from every vertex of odd remaining
    degree (such a walk can only get stuck at another odd vertex, so each
    gives one path and evens out both ends), then from the remaining
    vertices, which closes every trail.  Repeated vertices are peeled off
    each trail as cycles so every reported cycle and path is simple.
    """
    edges = [tuple(e) for e in edges]
    part = EulerianPartition(edges)
    adj: dict[int, list[int]] = {}
    for e, (u, v) in enumerate(edges):
        if not 0 <= u < n or not 0 <= v < n:
            raise ValueError(f"edge {e} has an endpoint outside 0..{n - 1}")
        adj.setdefault(u, []).append(e)
        adj.setdefault(v, []).append(e)
    used = [False] * len(edges)
    ptr = dict.fromkeys(adj, 0)
    degree = {v: len(lst) for v, lst in adj.items()}

    def walk(v: int) -> list[Step]:
        steps: list[Step] = []
        while True:
            lst = adj[v]
            i = ptr[v]
            while i < len(lst) and used[lst[i]]:
                i += 1
            ptr[v] = i
            if i == len(lst):
                return steps
            e = lst[i]
            used[e] = True
            x, y = edges[e]
            degree[x] -= 1
            degree[y] -= 1
            if x == v:
                steps.append((e, True))
                v = y
            else:
                steps.append((e, False))
                v = x

    starts = sorted(adj)
    for v in starts:
        if degree[v] % 2:
            cycles, rest = _peel_cycles(walk(v), edges)
            part.cycles.extend(cycles)
            part.paths.append(rest)
    for v in starts:
        while degree[v]:
            cycles, rest = _peel_cycles(walk(v), edges)
            part.cycles.extend(cycles)
            if rest:
                part.cycles.append(rest)
    return part


def _peel_cycles(trail: list[Step], ends) -> tuple[list[list[Step]], list[Step]]:
    """Split a trail into simple cycles plus one simple remainder."""
    def tail_of(step: Step) -> int:
        e, fwd = step
        return ends[e][0] if fwd else ends[e][1]

    def head_of(step: Step) -> int:
        e, fwd = step
        return ends[e][1] if fwd else ends[e][0]

    cycles: list[list[Step]] = []
    verts = [tail_of(trail[0])]
    steps: list[Step] = []
    pos = {verts[0]: 0}
    for step in trail:
        v = head_of(step)
        steps.append(step)
        if v in pos:
            i = pos[v]
            cycles.append(steps[i:])
            for u in verts[i + 1:]:
                del pos[u]
            del verts[i + 1:]
            del steps[i:]
        else:
            pos[v] = len(verts)
            verts.append(v)
    return cycles, steps


def flow_turn_update(g, bit_flow: Sequence[Number], part: EulerianPartition,
                     base_net: dict | None = None, arc_ids: Sequence[int] | None = None) -> list:
    """Double the bit flow on the gaining arcs of each element and zero the rest.

    `g` is a Digraph or LayeredDag.  `part` partitions the support of
    `bit_flow`, with edge e standing for arc arc_ids[e] (identity when
    omitted) oriented tail to head.  Cycles follow their walk direction.
    For a path both turnings keep every interior vertex balanced, so the
    turning is chosen by the effect on its endpoints: first the deficit at
    non-terminal endpoints (measured against base_net when given), then the
    net outflow of the sources.
    """
    tails, heads = g.tails, g.heads
    m = len(bit_flow)
    arc_ids = list(range(m)) if arc_ids is None else arc_ids
    support = sorted(a for a in range(m) if bit_flow[a])
    if sorted(arc_ids[e] for e in part.covered()) != support:
        raise ValueError("partition does not cover the bit flow support exactly")
    c = bit_flow[support[0]] if support else 0
    if any(bit_flow[a] != c for a in support):
        raise ValueError("bit flow must take a single nonzero value")
    for e, (u, v) in enumerate(part.edges):
        a = arc_ids[e]
        if (tails[a], heads[a]) != (u, v):
            raise ValueError("partition edges must match arc endpoints")
    net = [0] * g.n
    if base_net is None:
        for a in support:
            net[tails[a]] += c
            net[heads[a]] -= c
    else:
        for v, x in base_net.items():
            net[v] = x
    out = [0] * m
    for a in support:
        out[a] = c
    _turn(out, part, arc_ids, c, _flags(g), net)
    if base_net is not None:
        for v, x in enumerate(net):
            if x or v in base_net:
                base_net[v] = x
    return out


def _flags(g) -> tuple[list[bool], list[bool]]:
    terminal = [False] * g.n
    source = [False] * g.n
    for v in g.S:
        terminal[v] = source[v] = True
    for v in g.T:
        terminal[v] = True
    return terminal, source


def _turn(values: list, part: EulerianPartition, arc_ids, c, flags, net: list) -> None:
    """Apply the turning of every element of `part` to `values` in place."""
    for cyc in part.cycles:
        for e, fwd in cyc:
            a = arc_ids[e]
            values[a] += c if fwd else -c
    terminal, source = flags
    for path in part.paths:
        first_e, first_fwd = path[0]
        last_e, last_fwd = path[-1]
        s = part.edges[first_e][0] if first_fwd else part.edges[first_e][1]
        t = part.edges[last_e][1] if last_fwd else part.edges[last_e][0]
        best = None
        for option, ref in enumerate((first_fwd, not first_fwd)):
            # net outflow change at each end: the first step leaves s when
            # walked forward, the last step enters t when walked forward
            ds = c if (first_fwd == ref) == first_fwd else -c
            dt = -c if (last_fwd == ref) == last_fwd else c
            if s == t:
                shifts = ((s, ds + dt),)
            else:
                shifts = ((s, ds), (t, dt))
            deficit_change = sum(abs(net[v] + d) - abs(net[v]) for v, d in shifts
                                 if not terminal[v])
            value_change = sum(d for v, d in shifts if source[v])
            key = (deficit_change, -value_change, option)
            if best is None or key < best[0]:
                best = (key, ref, shifts)
        _, ref, shifts = best
        for v, d in shifts:
            net[v] += d
        for e, fwd in path:
            a = arc_ids[e]
            values[a] += c if fwd == ref else -c


def truncation_bits(m: int, umax: int) -> int:
    return math.ceil(math.log2(max(m * umax, 1))) + 20


def round_flow(d: LayeredDag, f: Sequence[Number], eps: Number = Fraction(1, 2),
               caps: Sequence[int] | None = None, bits: int | None = None) -> list[int]:
    """Round a fractional S-T flow to an integral one, bit by bit.

    Values are truncated to `bits` fractional bits (by default
    ceil(log2(m * U_max)) + 20), then each bit level from the least
    significant upward is cleared by turning an exact Eulerian partition of
    its support.  A final sweep removes what deficit truncation introduced.
    """
    caps = d.caps if caps is None else caps
    if not 0 < eps < 1:
        raise ValueError("eps must lie in (0, 1)")
    vals = [Fraction(x) for x in f]
    for a, (x, cap) in enumerate(zip(vals, caps)):
        if x < 0 or x > cap:
            raise ValueError(f"flow on arc {a} violates its capacity")
    if all(x.denominator == 1 for x in vals):
        return extract_st_subflow(d, [int(x) for x in vals])
    k = truncation_bits(d.m, max(caps, default=0)) if bits is None else bits
    scale = 1 << k
    return round_fixed(d, [(x.numerator * scale) // x.denominator for x in vals], k, caps)


def round_fixed(d: LayeredDag, fixed: Sequence[int], bits: int, caps: Sequence[int]) -> list[int]:
    """Round a flow given in units of 2**-bits to an integral S-T flow."""
    fixed = list(fixed)
    tails, heads = d.tails, d.heads
    net = [0] * d.n
    for a, x in enumerate(fixed):
        net[tails[a]] += x
        net[heads[a]] -= x
    flags = _flags(d)
    for i in range(bits):
        bit = 1 << i
        arcs = [a for a, x in enumerate(fixed) if x & bit]
        if not arcs:
            continue
        part = eulerian_partition(d.n, [(tails[a], heads[a]) for a in arcs])
        _turn(fixed, part, arcs, bit, flags, net)
    for a, x in enumerate(fixed):
        if x < 0 or x > caps[a] << bits:
            raise RuntimeError("rounding pushed an arc outside its capacity")
    return extract_st_subflow(d, [x >> bits for x in fixed])
