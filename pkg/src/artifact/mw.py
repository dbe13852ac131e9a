"""Multiplicative-weights solver for h-length flows and moving cuts.

The dual weight of arc a is w_a = lam0 * (1 + eps0) ** (c_a / U_a) with an
integer counter c_a, and the current threshold is lam = lam0 * (1 + eps0) ** j.
The hot loop only ever needs w_a / lam, which stays in a float-friendly range
near 1, so it works on exp(L * (c_a / U_a - j)) with L = ln(1 + eps0).
Exact wide-range weights are produced once at the end as ScaledReal values.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Callable, Iterable, Sequence

from .blocker import blocker_from_ratios
from .graph_core import (Digraph, MovingCut, PathFlow, ScaledReal, h_length_distance,
                         lightest_within_budget)
from .layered import _as_generator

LN2 = math.log(2.0)


@dataclass(frozen=True)
class MwParams:
    eps: float
    m: int
    eps0: float
    zeta: float
    eta: float
    log_step: float      # ln(1 + eps0)
    log_span: float      # zeta * ln m, the distance from lam0 to 1 in log space

    @classmethod
    def from_eps(cls, eps: float, m: int) -> MwParams:
        if not 0 < eps < 1:
            raise ValueError("eps must lie in (0, 1)")
        eps0 = eps / 6
        zeta = (1 + 2 * eps0) / eps0 + 1
        log_m = math.log(max(m, 2))
        eta = eps0 / ((1 + eps0) * zeta * log_m)
        return cls(eps, m, eps0, zeta, eta, math.log1p(eps0), zeta * log_m)

    @property
    def levels(self) -> int:
        """Number of (1 + eps0) steps from lam0 until lam >= 1."""
        return math.ceil(self.log_span / self.log_step - 1e-12)

    def initial_weight(self) -> ScaledReal:
        return ScaledReal.from_log2(-self.log_span / LN2)

    def init_slack(self, umax: int) -> ScaledReal:
        """delta0 = m * U_max * (1/m) ** zeta."""
        if umax <= 0 or self.m == 0:
            return ScaledReal.zero()
        return ScaledReal.from_log2(math.log2(self.m * umax) - self.log_span / LN2)


@dataclass
class SolveInfo:
    iterations: int = 0          # blocker calls
    jumps: int = 0               # early threshold advances
    level: int = 0               # final threshold exponent j
    scale: float = 1.0           # capacity slop correction applied to eta
    max_counter_ratio: float = 0.0   # max_a c_a / ceil(U_a / eta)


@dataclass
class SolveResult:
    flows: list[PathFlow]
    cut: MovingCut
    params: MwParams
    info: SolveInfo

    @property
    def flow(self) -> PathFlow:
        return self.flows[0]


def _ratios(g: Digraph, counters: Sequence[int], level: int, p: MwParams) -> list[float]:
    """w_a / lam for every arc.  Zero-capacity arcs carry weight 1."""
    out = []
    for c, u in zip(counters, g.caps):
        if u:
            out.append(math.exp(p.log_step * (c / u - level)))
        else:
            out.append(math.exp(p.log_span - p.log_step * level))
    return out


def _distance(g: Digraph, ratios: Sequence[float], h: int) -> float:
    best = lightest_within_budget(g, ratios, h, g.S, g.T, zero=0.0)
    return math.inf if best is None else best


def _steps_below(d: float, p: MwParams) -> int:
    """Largest k with (1 + eps0) ** k <= d."""
    if d == math.inf:
        return p.levels + 1
    k = math.floor(math.log(d) / p.log_step)
    while k > 0 and math.exp(k * p.log_step) > d:
        k -= 1
    return max(k, 0)


def undirected_distances(g: Digraph, sources: Iterable[int]) -> list[float]:
    """Length distances from `sources` ignoring arc directions."""
    import heapq

    dist = [math.inf] * g.n
    heap = []
    for s in sources:
        dist[s] = 0
        heap.append((0, s))
    heapq.heapify(heap)
    while heap:
        d, v = heapq.heappop(heap)
        if d > dist[v]:
            continue
        for a in g.out_arcs[v] + g.in_arcs[v]:
            u = g.heads[a] if g.tails[a] == v else g.tails[a]
            nd = d + g.lengths[a]
            if nd < dist[u]:
                dist[u] = nd
                heapq.heappush(heap, (nd, u))
    return dist


def check_separation(g: Digraph, pairs: Sequence[tuple[frozenset, frozenset]],
                     batches: Sequence[Sequence[int]], h: int) -> None:
    """Raise unless distinct pairs sharing a batch are more than 2h apart."""
    for batch in batches:
        for x, i in enumerate(batch):
            ends_i = pairs[i][0] | pairs[i][1]
            dist = undirected_distances(g, ends_i)
            for k in batch[x + 1:]:
                ends_k = pairs[k][0] | pairs[k][1]
                if ends_i & ends_k:
                    raise ValueError(f"commodities {i} and {k} share a terminal in one batch")
                if min(dist[v] for v in ends_k) <= 2 * h:
                    raise ValueError(
                        f"commodities {i} and {k} are within distance {2 * h} in one batch")


def _mw_loop(g: Digraph, pairs: list[tuple[frozenset, frozenset]], batches: list[list[int]],
             h: int, eps: float, mode: str, rng,
             on_iteration: Callable[[int, int], None] | None = None) -> SolveResult:
    p = MwParams.from_eps(eps, g.m)
    rng = _as_generator(rng) if mode == "rand" else None
    subs = [g.with_terminals(S, T) for S, T in pairs]
    counters = [0] * g.m
    comps: list[list] = [[] for _ in pairs]
    info = SolveInfo()
    level = 0
    end = p.levels
    while level < end:
        ratios = _ratios(g, counters, level, p)
        dists = [_distance(sub, ratios, h) for sub in subs]
        jump = _steps_below(min(dists), p)
        if jump >= 1:
            level += jump
            info.jumps += 1
            continue
        progressed = False
        for bi, batch in enumerate(batches):
            if bi:
                ratios = _ratios(g, counters, level, p)
                dists = [_distance(sub, ratios, h) if i in batch else dists[i]
                         for i, sub in enumerate(subs)]
            updates = []
            for i in batch:
                if _steps_below(dists[i], p) >= 1:
                    continue
                paths, arc_flow, _ = blocker_from_ratios(subs[i], ratios, h, p.eps0, mode, rng)
                info.iterations += 1
                updates.append((i, paths, arc_flow))
            for i, paths, arc_flow in updates:
                if not paths:
                    continue
                progressed = True
                comps[i].append(paths)
                for a, x in enumerate(arc_flow):
                    if x:
                        counters[a] += x
            if on_iteration is not None:
                on_iteration(level, info.iterations)
        if not progressed:
            # every light path runs through a zero-capacity arc
            level += 1
    info.level = level

    eta = Fraction(p.eta)
    worst = Fraction(0)
    for c, u in zip(counters, g.caps):
        if c:
            worst = max(worst, eta * c / u)
            info.max_counter_ratio = max(info.max_counter_ratio,
                                         c / math.ceil(u / p.eta))
    eta_out = p.eta
    if worst > 1:
        eta_out = float(eta / worst)
        while any(Fraction(eta_out) * c > u for c, u in zip(counters, g.caps) if c):
            eta_out = math.nextafter(eta_out, 0.0)
        info.scale = float(worst)

    weights = []
    for c, u in zip(counters, g.caps):
        if u:
            weights.append(ScaledReal.from_log2((p.log_step * c / u - p.log_span) / LN2))
        else:
            weights.append(ScaledReal.one())
    flows = []
    for comp in comps:
        pf = PathFlow(g.m, eta_out)
        for paths in comp:
            pf.add_component(paths)
        flows.append(pf)
    return SolveResult(flows, MovingCut(tuple(weights)), p, info)


def solve_pair(g: Digraph, h: int, eps: float, mode: str = "det", seed=None,
               on_iteration: Callable[[int, int], None] | None = None) -> SolveResult:
    """(1 - eps)-approximate h-length S-T flow together with a moving cut."""
    if not g.S or not g.T:
        raise ValueError("source and sink sets must be nonempty")
    if g.S & g.T:
        raise ValueError("source and sink sets overlap")
    return _mw_loop(g, [(g.S, g.T)], [[0]], h, eps, mode, seed, on_iteration)


@dataclass
class CommodityBatch:
    pairs: list[tuple[frozenset, frozenset]]
    batches: list[list[int]]

    @classmethod
    def single_batch(cls, pairs: Sequence[tuple[Iterable[int], Iterable[int]]]) -> CommodityBatch:
        pairs = [(frozenset(S), frozenset(T)) for S, T in pairs]
        return cls(pairs, [list(range(len(pairs)))])

    @classmethod
    def one_per_batch(cls, pairs: Sequence[tuple[Iterable[int], Iterable[int]]]) -> CommodityBatch:
        pairs = [(frozenset(S), frozenset(T)) for S, T in pairs]
        return cls(pairs, [[i] for i in range(len(pairs))])


def solve_multi(g: Digraph, batches: CommodityBatch, h: int, eps: float, mode: str = "det",
                seed=None) -> SolveResult:
    """Shared-capacity multi-commodity version; one PathFlow per commodity."""
    seen = sorted(i for b in batches.batches for i in b)
    if seen != list(range(len(batches.pairs))):
        raise ValueError("every commodity must appear in exactly one batch")
    for S, T in batches.pairs:
        if not S or not T:
            raise ValueError("source and sink sets must be nonempty")
        if S & T:
            raise ValueError("a commodity's source and sink sets overlap")
    check_separation(g, batches.pairs, batches.batches, h)
    return _mw_loop(g, list(batches.pairs), [list(b) for b in batches.batches], h, eps,
                    mode, seed)


@dataclass
class CertReport:
    flow_feasible: bool
    cut_feasible: bool
    primal: Fraction
    dual: ScaledReal
    gap: float
    delta0: ScaledReal
    distance: ScaledReal | float = math.inf
    problems: list[str] = field(default_factory=list)

    @property
    def passed(self) -> bool:
        return self.flow_feasible and self.cut_feasible and not self.problems


def certify_multi(g: Digraph, flows: Sequence[PathFlow], w: MovingCut,
                  pairs: Sequence[tuple[Iterable[int], Iterable[int]]], h: int, eps: float
                  ) -> CertReport:
    """Check feasibility of both sides and the approximation gap, exactly."""
    problems: list[str] = []
    flow_ok = True
    total = [Fraction(0)] * g.m
    primal = Fraction(0)
    for flow, (S, T) in zip(flows, pairs):
        sub = g.with_terminals(S, T)
        eta = Fraction(flow.eta)
        if eta < 0:
            flow_ok = False
            problems.append("negative eta")
        for path, mult in flow.paths():
            if mult != int(mult) or mult <= 0:
                flow_ok = False
                problems.append(f"non-integral multiplicity on path {path}")
            if not sub.is_st_path(path) or sub.path_length(path) > h:
                flow_ok = False
                problems.append(f"path {path} is not an h-length S-T path")
            for a in path:
                total[a] += eta * mult
            primal += eta * mult
    for a, (x, u) in enumerate(zip(total, g.caps)):
        if x > u:
            flow_ok = False
            problems.append(f"arc {a} carries {float(x)} > capacity {u}")

    cut_ok = len(w) == g.m
    nearest: ScaledReal | float = math.inf
    if cut_ok:
        for S, T in pairs:
            d = h_length_distance(g, w, h, S, T)
            if d != math.inf:
                if nearest == math.inf or d < nearest:
                    nearest = d
                if d.compare(1) < 0:
                    cut_ok = False

    dual = w.cost(g.caps) if len(w) == g.m else ScaledReal.zero()
    p = MwParams.from_eps(eps, g.m)
    delta0 = p.init_slack(g.max_cap)
    lhs = dual * (1 - eps)
    rhs = ScaledReal.from_value(primal) + dual * 1e-6 + delta0 * (1 - eps)
    gap = float(primal) / dual.to_float() if not dual.is_zero and dual.to_float() else math.inf
    report = CertReport(flow_ok, cut_ok, primal, dual, gap, delta0, nearest, problems)
    if lhs.compare(rhs) > 0:
        report.problems.append("approximation gap exceeds (1 - eps)")
    if not cut_ok:
        report.problems.append("moving cut infeasible")
    return report


def certify_pair(g: Digraph, f: PathFlow, w: MovingCut, h: int, eps: float) -> CertReport:
    return certify_multi(g, [f], w, [(g.S, g.T)], h, eps)
