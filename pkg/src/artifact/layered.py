"""Path counts and blocking integral flows in layered source-to-sink DAGs."""

from __future__ import annotations

import math
from dataclasses import dataclass
from fractions import Fraction
from typing import Sequence

import numpy as np

from .graph_core import Digraph, Number


@dataclass(frozen=True)
class LayeredDag:
    """An S-T DAG with a layer index per vertex.

    Stored as flat arrays rather than a Digraph because blockers build many of
    these per call.  Layers are 0-based: sources sit in layer 0 and every arc
    goes from a lower layer to a strictly higher one.
    """

    n: int
    tails: tuple[int, ...]
    heads: tuple[int, ...]
    caps: tuple[int, ...]
    S: frozenset[int]
    T: frozenset[int]
    layer: tuple[int, ...]
    order: tuple[int, ...]
    out_arcs: tuple[tuple[int, ...], ...]
    in_arcs: tuple[tuple[int, ...], ...]

    @property
    def m(self) -> int:
        return len(self.tails)

    @property
    def depth(self) -> int:
        """Index of the deepest layer (the h of an h-layer DAG)."""
        return max(self.layer, default=0)

    @classmethod
    def build(cls, n: int, tails: Sequence[int], heads: Sequence[int],
              caps: Sequence[int], S, T, layer: Sequence[int]) -> LayeredDag:
        out_arcs: list[list[int]] = [[] for _ in range(n)]
        in_arcs: list[list[int]] = [[] for _ in range(n)]
        for a, (u, v) in enumerate(zip(tails, heads)):
            out_arcs[u].append(a)
            in_arcs[v].append(a)
        order = sorted(range(n), key=lambda v: (layer[v], v))
        return cls(n, tuple(tails), tuple(heads), tuple(caps), frozenset(S),
                   frozenset(T), tuple(layer), tuple(order),
                   tuple(map(tuple, out_arcs)), tuple(map(tuple, in_arcs)))

    def to_digraph(self) -> Digraph:
        arcs = [(u, v, c, 1) for u, v, c in zip(self.tails, self.heads, self.caps)]
        return Digraph(self.n, arcs, self.S, self.T)

    def with_caps(self, caps: Sequence[int]) -> LayeredDag:
        return LayeredDag(self.n, self.tails, self.heads, tuple(caps), self.S, self.T,
                          self.layer, self.order, self.out_arcs, self.in_arcs)


@dataclass(frozen=True)
class PathCounts:
    n_plus: list[int]
    n_minus: list[int]
    n_arc: list[int]


def validate_layered_dag(g: Digraph) -> LayeredDag:
    """Check the S-T DAG conditions and label layers by longest path from S."""
    indeg = [len(g.in_arcs[v]) for v in range(g.n)]
    for v in range(g.n):
        has_in = bool(g.in_arcs[v])
        has_out = bool(g.out_arcs[v])
        if has_in == (v in g.S):
            what = "has in-arcs" if has_in else "has no in-arcs"
            where = "source" if v in g.S else "non-source"
            raise ValueError(f"{where} vertex {v} {what}")
        if has_out == (v in g.T):
            what = "has out-arcs" if has_out else "has no out-arcs"
            where = "sink" if v in g.T else "non-sink"
            raise ValueError(f"{where} vertex {v} {what}")
    layer = [0] * g.n
    ready = [v for v in range(g.n) if indeg[v] == 0]
    seen = 0
    while ready:
        v = ready.pop()
        seen += 1
        for a in g.out_arcs[v]:
            u = g.heads[a]
            layer[u] = max(layer[u], layer[v] + 1)
            indeg[u] -= 1
            if indeg[u] == 0:
                ready.append(u)
    if seen != g.n:
        raise ValueError("graph contains a directed cycle")
    return LayeredDag.build(g.n, g.tails, g.heads, g.caps, g.S, g.T, layer)


def path_counts(d: LayeredDag, caps: Sequence[Number] | None = None) -> PathCounts:
    """Capacity-weighted counts of source-to-sink paths through each vertex and arc."""
    caps = d.caps if caps is None else caps
    n_plus = [0] * d.n
    n_minus = [0] * d.n
    for v in reversed(d.order):
        if v in d.T:
            n_plus[v] = 1
        else:
            n_plus[v] = sum(caps[a] * n_plus[d.heads[a]] for a in d.out_arcs[v] if caps[a])
    for v in d.order:
        if v in d.S:
            n_minus[v] = 1
        else:
            n_minus[v] = sum(caps[a] * n_minus[d.tails[a]] for a in d.in_arcs[v] if caps[a])
    n_arc = [n_minus[d.tails[a]] * caps[a] * n_plus[d.heads[a]] for a in range(d.m)]
    return PathCounts(n_plus, n_minus, n_arc)


def has_open_path(d: LayeredDag, residual: Sequence[Number]) -> bool:
    """True when some source-to-sink path uses only arcs with positive residual."""
    reach = [False] * d.n
    for s in d.S:
        reach[s] = True
    for v in d.order:
        if not reach[v]:
            continue
        if v in d.T:
            return True
        for a in d.out_arcs[v]:
            if residual[a] > 0:
                reach[d.heads[a]] = True
    return False


def is_blocking(d: LayeredDag, f: Sequence[Number], caps: Sequence[Number] | None = None) -> bool:
    caps = d.caps if caps is None else caps
    return not has_open_path(d, [c - x for c, x in zip(caps, f)])


def iterated_path_count_flow(d: LayeredDag, caps: Sequence[Number] | None = None
                             ) -> list[Fraction]:
    """Blocking fractional flow built from repeated path-count flows.

    Each step routes n_a / max_b(n_b / r_b) on every arc, where r is the
    current residual; the maximizing arc saturates, so at most m steps run.
    """
    caps = d.caps if caps is None else caps
    residual = [Fraction(c) for c in caps]
    flow = [Fraction(0)] * d.m
    for _ in range(d.m + 1):
        counts = path_counts(d, residual).n_arc
        best = -1
        for a, na in enumerate(counts):
            # compare n_a / r_a against the current best by cross-multiplying
            if na and (best < 0 or na * residual[best] > counts[best] * residual[a]):
                best = a
        if best < 0:
            return flow
        scale = residual[best] / counts[best]
        for a, na in enumerate(counts):
            if na:
                step = na * scale
                flow[a] += step
                residual[a] -= step
        residual[best] = Fraction(0)
    raise RuntimeError("path-count iteration failed to saturate an arc per step")


def extract_st_subflow(d: LayeredDag, f: Sequence[Number]) -> list:
    """Remove deficit: a forward sweep trims excess outflow, then a backward
    sweep trims excess inflow.  The result is a conserving subflow of f.

    Within a vertex, arcs toward neighbours that are themselves stuck with
    flow they cannot pass on are trimmed first, and arcs into T (or out of
    S) last, so dead-end flow goes before S-T flow.
    """
    out = list(f)
    tails, heads = d.tails, d.heads
    balance = [0] * d.n          # inflow minus outflow
    for a, x in enumerate(out):
        if x:
            balance[heads[a]] += x
            balance[tails[a]] -= x
    terminals = d.S | d.T
    for v in d.order:
        if v in terminals or balance[v] >= 0:
            continue
        excess = -balance[v]
        for a in sorted(d.out_arcs[v], key=lambda a: (heads[a] in d.T, -balance[heads[a]], a)):
            if excess <= 0:
                break
            cut = min(excess, out[a])
            if cut:
                out[a] -= cut
                excess -= cut
                balance[v] += cut
                balance[heads[a]] -= cut
    for v in reversed(d.order):
        if v in terminals or balance[v] <= 0:
            continue
        excess = balance[v]
        for a in sorted(d.in_arcs[v], key=lambda a: (tails[a] in d.S, balance[tails[a]], a)):
            if excess <= 0:
                break
            cut = min(excess, out[a])
            if cut:
                out[a] -= cut
                excess -= cut
                balance[v] -= cut
                balance[tails[a]] += cut
    return out


def _as_generator(rng) -> np.random.Generator:
    if isinstance(rng, np.random.Generator):
        return rng
    return np.random.default_rng(rng)


def _uniform_below(rng: np.random.Generator, bound: int) -> int:
    """Uniform integer in [0, bound) for arbitrarily large bound."""
    if bound < 2 ** 62:
        return int(rng.integers(0, bound))
    nbytes = (bound.bit_length() + 7) // 8
    extra = nbytes * 8 - bound.bit_length()
    while True:
        x = int.from_bytes(rng.bytes(nbytes), "little") >> extra
        if x < bound:
            return x


def _binomial(rng: np.random.Generator, trials: int, p: float) -> int:
    if trials <= 0 or p <= 0:
        return 0
    if trials < 2 ** 62:
        return int(rng.binomial(trials, p))
    mean = trials * p
    if mean < 1e6:
        return int(rng.poisson(mean))
    return max(0, int(round(rng.normal(mean, math.sqrt(mean * (1 - p))))))


def sampled_integral_flow(d: LayeredDag, delta: int, rng, caps: Sequence[int] | None = None,
                          counts: PathCounts | None = None) -> list[int]:
    """One round of ball passing.

    Each source releases Binomial(n+_s, 1/(64 delta)) balls; a ball walks to a
    sink choosing an (arc, parallel copy) pair with probability proportional
    to the number of paths it continues into.  Balls whose walks share no
    (arc, copy) pair with any other ball are kept.
    """
    if delta < 1:
        raise ValueError("delta must be at least 1")
    rng = _as_generator(rng)
    caps = d.caps if caps is None else caps
    counts = path_counts(d, caps) if counts is None else counts
    n_plus = counts.n_plus
    p = 1.0 / (64 * delta)
    walks: list[list[tuple[int, int]]] = []
    for s in sorted(d.S):
        for _ in range(_binomial(rng, n_plus[s], p)):
            v, walk = s, []
            while v not in d.T:
                r = _uniform_below(rng, n_plus[v])
                for a in d.out_arcs[v]:
                    block = caps[a] * n_plus[d.heads[a]]
                    if r < block:
                        walk.append((a, r // n_plus[d.heads[a]]))
                        v = d.heads[a]
                        break
                    r -= block
            walks.append(walk)
    usage: dict[tuple[int, int], int] = {}
    for walk in walks:
        for slot in walk:
            usage[slot] = usage.get(slot, 0) + 1
    flow = [0] * d.m
    for walk in walks:
        if all(usage[slot] == 1 for slot in walk):
            for a, _ in walk:
                flow[a] += 1
    return flow


def deterministic_round_cap(d: LayeredDag, caps: Sequence[int]) -> int:
    umax = max(caps, default=0)
    return 64 * max(d.depth, 1) * math.ceil(math.log2(d.m * umax + 2))


def blocking_integral_flow(d: LayeredDag, mode: str = "det", rng=None,
                           caps: Sequence[int] | None = None) -> list[int]:
    """Integral flow saturating an arc on every source-to-sink path.

    mode "det" alternates iterated path-count flows with deterministic
    rounding; mode "rand" runs ball passing with a shrinking delta.
    """
    caps = list(d.caps if caps is None else caps)
    if mode == "det":
        return _blocking_det(d, caps)
    if mode == "rand":
        return _blocking_rand(d, caps, _as_generator(rng))
    raise ValueError(f"unknown blocking-flow mode {mode!r}")


def blocking_fixed_bits(m: int) -> int:
    """Fractional bits used by the deterministic blocking pipeline.

    Each path-count step floors at most one unit per arc and a step always
    moves at least one whole unit of flow, so 2 log2(m) + 3 bits keep the
    flooring loss below a quarter of the value being rounded.
    """
    return 2 * max(1, (m + 1).bit_length()) + 3


def iterated_fixed_flow(d: LayeredDag, residual: Sequence[int], bits: int) -> list[int]:
    """Iterated path-count flow in fixed point (units of 2**-bits).

    Counts are weighted by the fixed-point residuals, so n_a / r_a is the
    product n-(tail) * n+(head) and the arc maximizing it saturates exactly.
    Flows are floored to whole units, leaving a small deficit for rounding
    to absorb.
    """
    R = [r << bits for r in residual]
    flow = [0] * d.m
    tails, heads, order = d.tails, d.heads, d.order
    is_t = [False] * d.n
    is_s = [False] * d.n
    for v in d.T:
        is_t[v] = True
    for v in d.S:
        is_s[v] = True
    out_arcs, in_arcs = d.out_arcs, d.in_arcs
    for _ in range(d.m + 1):
        n_plus = [0] * d.n
        for v in reversed(order):
            if is_t[v]:
                n_plus[v] = 1
                continue
            total = 0
            for a in out_arcs[v]:
                r = R[a]
                if r:
                    total += r * n_plus[heads[a]]
            n_plus[v] = total
        n_minus = [0] * d.n
        for v in order:
            if is_s[v]:
                n_minus[v] = 1
                continue
            total = 0
            for a in in_arcs[v]:
                r = R[a]
                if r:
                    total += r * n_minus[tails[a]]
            n_minus[v] = total
        prods = [n_minus[tails[a]] * n_plus[heads[a]] if R[a] else 0 for a in range(d.m)]
        top = max(prods, default=0)
        if not top:
            return flow
        for a, p in enumerate(prods):
            if p:
                x = R[a] if p == top else R[a] * p // top
                flow[a] += x
                R[a] -= x
    raise RuntimeError("path-count iteration failed to saturate an arc per step")


def _blocking_det(d: LayeredDag, caps: list[int]) -> list[int]:
    from .rounding import round_fixed

    residual = list(caps)
    total = [0] * d.m
    bits = blocking_fixed_bits(d.m)
    mask = (1 << bits) - 1
    for _ in range(deterministic_round_cap(d, caps)):
        if not has_open_path(d, residual):
            return total
        fixed = iterated_fixed_flow(d, residual, bits)
        if any(x & mask for x in fixed):
            integral = round_fixed(d, fixed, bits, residual)
        else:
            integral = extract_st_subflow(d, [x >> bits for x in fixed])
        if not any(integral):
            raise RuntimeError("rounding a blocking flow produced no progress")
        for a, x in enumerate(integral):
            if x:
                total[a] += x
                residual[a] -= x
    raise RuntimeError("deterministic blocking flow exceeded its round cap")


def _blocking_rand(d: LayeredDag, caps: list[int], rng: np.random.Generator) -> list[int]:
    residual = list(caps)
    total = [0] * d.m
    umax = max(caps, default=0)
    reps = (max(d.depth, 1) * math.ceil(math.log2(d.n + 1))
            * max(1, math.ceil(math.log2(umax + 1))))
    level_cap = 64 * max(d.depth, 1) * math.ceil(math.log2(d.m * umax + 2)) + 64 * d.depth * 64
    counts = path_counts(d, residual)
    delta = None
    for _ in range(level_cap):
        top = max(counts.n_arc, default=0)
        if top == 0:
            return total
        cap_delta = 1 << max(0, (top - 1).bit_length())
        delta = cap_delta if delta is None else max(1, min(delta // 2, cap_delta))
        for _ in range(reps):
            sample = sampled_integral_flow(d, delta, rng, residual, counts)
            if any(sample):
                for a, x in enumerate(sample):
                    if x:
                        total[a] += x
                        residual[a] -= x
                counts = path_counts(d, residual)
                if max(counts.n_arc, default=0) == 0:
                    return total
    raise RuntimeError("randomized blocking flow exceeded its level cap")
