"""Graph data model, wide-range reals, and the length-budgeted distance DP.

Everything else in the package builds on the types defined here.  Arc and
vertex indices are 0-based throughout; the text instance format converts
from 1-based indices at the boundary.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Callable, Iterable, Sequence

Number = int | float | Fraction


@dataclass(frozen=True)
class Arc:
    tail: int
    head: int
    cap: int
    length: int


class Digraph:
    """Directed multigraph with integer capacities, positive integer lengths
    and disjoint source/sink sets."""

    __slots__ = ("n", "arcs", "S", "T", "tails", "heads", "caps", "lengths",
                 "out_arcs", "in_arcs")

    def __init__(self, n: int, arcs: Iterable[Arc | tuple[int, int, int, int]],
                 S: Iterable[int] = (), T: Iterable[int] = ()):
        arcs = tuple(a if isinstance(a, Arc) else Arc(*a) for a in arcs)
        S = frozenset(S)
        T = frozenset(T)
        if n < 0:
            raise ValueError("vertex count must be nonnegative")
        if S & T:
            raise ValueError("source and sink sets overlap")
        for v in S | T:
            if not 0 <= v < n:
                raise ValueError(f"terminal {v} out of range")
        out_arcs: list[list[int]] = [[] for _ in range(n)]
        in_arcs: list[list[int]] = [[] for _ in range(n)]
        for i, a in enumerate(arcs):
            if not (0 <= a.tail < n and 0 <= a.head < n):
                raise ValueError(f"arc {i} has an endpoint out of range")
            if not isinstance(a.length, int) or a.length < 1:
                raise ValueError(f"arc {i} must have a positive integer length")
            if not isinstance(a.cap, int) or a.cap < 0:
                raise ValueError(f"arc {i} must have a nonnegative integer capacity")
            out_arcs[a.tail].append(i)
            in_arcs[a.head].append(i)
        self.n = n
        self.arcs = arcs
        self.S = S
        self.T = T
        self.tails = tuple(a.tail for a in arcs)
        self.heads = tuple(a.head for a in arcs)
        self.caps = tuple(a.cap for a in arcs)
        self.lengths = tuple(a.length for a in arcs)
        self.out_arcs = tuple(tuple(x) for x in out_arcs)
        self.in_arcs = tuple(tuple(x) for x in in_arcs)

    @property
    def m(self) -> int:
        return len(self.arcs)

    @property
    def max_cap(self) -> int:
        return max(self.caps, default=0)

    def with_terminals(self, S: Iterable[int], T: Iterable[int]) -> Digraph:
        return Digraph(self.n, self.arcs, S, T)

    def with_caps(self, caps: Sequence[int]) -> Digraph:
        arcs = [Arc(a.tail, a.head, int(c), a.length) for a, c in zip(self.arcs, caps)]
        return Digraph(self.n, arcs, self.S, self.T)

    def with_lengths(self, lengths: Sequence[int]) -> Digraph:
        arcs = [Arc(a.tail, a.head, a.cap, int(l)) for a, l in zip(self.arcs, lengths)]
        return Digraph(self.n, arcs, self.S, self.T)

    def path_vertices(self, path: Sequence[int]) -> list[int]:
        if not path:
            return []
        verts = [self.tails[path[0]]]
        verts.extend(self.heads[a] for a in path)
        return verts

    def path_length(self, path: Sequence[int]) -> int:
        return sum(self.lengths[a] for a in path)

    def is_st_path(self, path: Sequence[int]) -> bool:
        """Simple, arc-consecutive, starts in S and ends in T."""
        if not path:
            return False
        verts = self.path_vertices(path)
        if any(self.heads[a] != self.tails[b] for a, b in zip(path, path[1:])):
            return False
        return (verts[0] in self.S and verts[-1] in self.T
                and len(set(verts)) == len(verts))

    def __repr__(self) -> str:
        return f"Digraph(n={self.n}, m={self.m}, |S|={len(self.S)}, |T|={len(self.T)})"


class ScaledReal:
    """Nonnegative real stored as significand * 2**exponent.

    The significand lies in [1, 2) (or is exactly 0) and the exponent is an
    unbounded Python int, so magnitudes like (1/m)**zeta for zeta in the
    thousands stay representable where a float would underflow.
    """

    __slots__ = ("significand", "exponent")

    def __init__(self, significand: float, exponent: int = 0):
        if significand < 0 or math.isnan(significand):
            raise ValueError("ScaledReal holds nonnegative values only")
        if significand == 0:
            self.significand, self.exponent = 0.0, 0
            return
        if math.isinf(significand):
            raise ValueError("ScaledReal cannot hold infinity")
        mant, e = math.frexp(significand)
        self.significand = mant * 2.0
        self.exponent = int(exponent) + e - 1

    @classmethod
    def zero(cls) -> ScaledReal:
        return cls(0.0)

    @classmethod
    def one(cls) -> ScaledReal:
        return cls(1.0)

    @classmethod
    def from_value(cls, x: Number) -> ScaledReal:
        if isinstance(x, ScaledReal):
            return x
        if isinstance(x, Fraction) or isinstance(x, int):
            x = Fraction(x)
            if x == 0:
                return cls.zero()
            # keep ~60 significant bits, then let the float constructor round
            e = x.numerator.bit_length() - x.denominator.bit_length()
            scaled = x / Fraction(2) ** e if e >= 0 else x * Fraction(2) ** (-e)
            return cls(float(scaled), e)
        return cls(float(x))

    @classmethod
    def from_log2(cls, log2_value: float) -> ScaledReal:
        e = math.floor(log2_value)
        return cls(2.0 ** (log2_value - e), e)

    @property
    def is_zero(self) -> bool:
        return self.significand == 0.0

    def log2(self) -> float:
        if self.is_zero:
            return -math.inf
        return self.exponent + math.log2(self.significand)

    def to_float(self) -> float:
        if self.is_zero:
            return 0.0
        if self.exponent > 1023:
            return math.inf
        if self.exponent < -1100:
            return 0.0
        return math.ldexp(self.significand, self.exponent)

    def to_fraction(self) -> Fraction:
        if self.is_zero:
            return Fraction(0)
        f = Fraction(self.significand)
        return f * 2 ** self.exponent if self.exponent >= 0 else f / 2 ** (-self.exponent)

    def __add__(self, other: ScaledReal | Number) -> ScaledReal:
        other = ScaledReal.from_value(other)
        if self.is_zero:
            return other
        if other.is_zero:
            return self
        hi, lo = (self, other) if self.exponent >= other.exponent else (other, self)
        gap = hi.exponent - lo.exponent
        if gap > 80:
            return hi
        return ScaledReal(hi.significand + math.ldexp(lo.significand, -gap), hi.exponent)

    __radd__ = __add__

    def __mul__(self, other: ScaledReal | Number) -> ScaledReal:
        other = ScaledReal.from_value(other)
        if self.is_zero or other.is_zero:
            return ScaledReal.zero()
        return ScaledReal(self.significand * other.significand, self.exponent + other.exponent)

    __rmul__ = __mul__

    def __truediv__(self, other: ScaledReal | Number) -> ScaledReal:
        other = ScaledReal.from_value(other)
        if other.is_zero:
            raise ZeroDivisionError("ScaledReal division by zero")
        if self.is_zero:
            return ScaledReal.zero()
        return ScaledReal(self.significand / other.significand, self.exponent - other.exponent)

    def _key(self) -> tuple[int, int, float]:
        return (0, 0, 0.0) if self.is_zero else (1, self.exponent, self.significand)

    def __eq__(self, other: object) -> bool:
        if isinstance(other, (int, float, Fraction)) and not isinstance(other, bool):
            if isinstance(other, float) and math.isinf(other):
                return False
            other = ScaledReal.from_value(other)
        if not isinstance(other, ScaledReal):
            return NotImplemented
        return self._key() == other._key()

    def __hash__(self) -> int:
        return hash(self._key())

    def __lt__(self, other: ScaledReal | Number) -> bool:
        if isinstance(other, float) and math.isinf(other):
            return other > 0
        return self._key() < ScaledReal.from_value(other)._key()

    def __le__(self, other: ScaledReal | Number) -> bool:
        return self == other or self < other

    def __gt__(self, other: ScaledReal | Number) -> bool:
        if isinstance(other, float) and math.isinf(other):
            return False
        return ScaledReal.from_value(other) < self

    def __ge__(self, other: ScaledReal | Number) -> bool:
        return self == other or self > other

    def compare(self, other: ScaledReal | Number, rel_tol: float = 1e-9) -> int:
        """Three-way comparison that treats values within rel_tol as equal."""
        other = ScaledReal.from_value(other)
        if self.is_zero or other.is_zero:
            return (not self.is_zero) - (not other.is_zero)
        diff = self.log2() - other.log2()
        if abs(diff) <= math.log2(1.0 + rel_tol):
            return 0
        return 1 if diff > 0 else -1

    def __repr__(self) -> str:
        return f"ScaledReal({self.significand!r}, {self.exponent})"

    def __float__(self) -> float:
        return self.to_float()


def scaled_sum(values: Iterable[ScaledReal]) -> ScaledReal:
    total = ScaledReal.zero()
    for v in values:
        total = total + v
    return total


@dataclass(frozen=True)
class MovingCut:
    """Per-arc nonnegative weights."""

    weights: tuple[ScaledReal, ...]

    @classmethod
    def from_values(cls, values: Iterable[ScaledReal | Number]) -> MovingCut:
        return cls(tuple(ScaledReal.from_value(v) for v in values))

    def __len__(self) -> int:
        return len(self.weights)

    def __getitem__(self, a: int) -> ScaledReal:
        return self.weights[a]

    def cost(self, caps: Sequence[int]) -> ScaledReal:
        return scaled_sum(w * c for w, c in zip(self.weights, caps) if c)

    def scaled(self, factor: ScaledReal | Number) -> MovingCut:
        return MovingCut(tuple(w * factor for w in self.weights))


ArcFlow = list  # per-arc values (int or Fraction), indexed by arc id


@dataclass
class PathFlow:
    """A path-supported flow eta * sum_j f_j.

    Each component f_j is a list of (path, multiplicity) with a path given as
    a tuple of arc ids.  Multiplicities are positive integers for flows built
    by the solvers; the sparse decomposition of a fractional arc flow may
    produce rational multiplicities.
    """

    m: int
    eta: Number = 1
    components: list[list[tuple[tuple[int, ...], Number]]] = field(default_factory=list)
    _counts: list | None = field(default=None, repr=False, compare=False)

    def add_component(self, paths: Iterable[tuple[Sequence[int], Number]]) -> None:
        comp = [(tuple(p), mult) for p, mult in paths if mult]
        self.components.append(comp)
        if self._counts is not None:
            for p, mult in comp:
                for a in p:
                    self._counts[a] += mult

    def counts(self) -> list:
        """Per-arc total multiplicity summed over components (before eta)."""
        if self._counts is None:
            counts: list = [0] * self.m
            for comp in self.components:
                for p, mult in comp:
                    for a in p:
                        counts[a] += mult
            self._counts = counts
        return list(self._counts)

    def arc_values(self) -> list:
        return [self.eta * c for c in self.counts()]

    def total_multiplicity(self) -> Number:
        return sum(mult for comp in self.components for _, mult in comp)

    @property
    def value(self) -> Number:
        return self.eta * self.total_multiplicity()

    @property
    def k(self) -> int:
        return len(self.components)

    def paths(self) -> list[tuple[tuple[int, ...], Number]]:
        return [pm for comp in self.components for pm in comp]

    def support_size(self) -> int:
        return len({p for comp in self.components for p, _ in comp})


def lightest_within_budget(
    g: Digraph,
    weights: Sequence,
    h: int,
    sources: Iterable[int],
    targets: Iterable[int],
    allowed: Callable[[int], bool] | None = None,
    zero=0,
):
    """Minimum total weight of a walk from `sources` to `targets` whose total
    length is at most h, or None when no such walk exists.

    Works for any weight type supporting + and < (int, Fraction, float,
    ScaledReal).  With nonnegative weights the optimum over walks equals the
    optimum over simple paths, since deleting a cycle never hurts.
    """
    targets = set(targets)
    table: list[list] = [[None] * g.n for _ in range(h + 1)]
    for s in sources:
        table[0][s] = zero
    arcs = [a for a in range(g.m) if allowed is None or allowed(a)]
    best = None
    for s in sources:
        if s in targets:
            best = zero
    for budget in range(1, h + 1):
        row = table[budget]
        for a in arcs:
            ell = g.lengths[a]
            if ell > budget:
                continue
            base = table[budget - ell][g.tails[a]]
            if base is None:
                continue
            cand = base + weights[a]
            v = g.heads[a]
            cur = row[v]
            if cur is None or cand < cur:
                row[v] = cand
        for t in targets:
            val = row[t]
            if val is not None and (best is None or val < best):
                best = val
    return best


def h_length_distance(
    g: Digraph,
    w: MovingCut | Sequence,
    h: int,
    sources: Iterable[int] | None = None,
    targets: Iterable[int] | None = None,
) -> ScaledReal | float:
    """d_w^(h)(sources, targets); math.inf when no path of length <= h exists."""
    if h < 0:
        raise ValueError("length bound must be nonnegative")
    weights = w.weights if isinstance(w, MovingCut) else [ScaledReal.from_value(x) for x in w]
    sources = g.S if sources is None else sources
    targets = g.T if targets is None else targets
    best = lightest_within_budget(g, weights, h, sources, targets, zero=ScaledReal.zero())
    return math.inf if best is None else best


def deficit(g: Digraph, f: Sequence[Number],
            S: Iterable[int] | None = None, T: Iterable[int] | None = None
            ) -> tuple[dict[int, Number], Number]:
    """Per-vertex |out - in| for vertices outside S and T, and their total."""
    terminals = set(g.S if S is None else S) | set(g.T if T is None else T)
    net: list = [0] * g.n
    for a, val in enumerate(f):
        if val:
            net[g.tails[a]] += val
            net[g.heads[a]] -= val
    per_vertex = {v: abs(net[v]) for v in range(g.n) if v not in terminals}
    return per_vertex, sum(per_vertex.values())


def flow_value(g: Digraph, f: Sequence[Number]) -> Number:
    """Net flow leaving the source set."""
    total = 0
    for a, val in enumerate(f):
        if val:
            if g.tails[a] in g.S:
                total += val
            if g.heads[a] in g.S:
                total -= val
    return total


def bitwise_decompose(f: Sequence[Number], U_max: int, depth: int | None = None
                      ) -> list[tuple[Fraction, list[Fraction]]]:
    """Split f into bit flows.

    Returns a list of (c, values) from the most significant position
    2**floor(log2 U_max) down to 2**-depth, where each values[a] is 0 or c and
    the bit flows sum to f exactly.  With depth=None the smallest depth that
    represents every value is used.
    """
    if U_max < 1:
        raise ValueError("U_max must be at least 1")
    top = U_max.bit_length() - 1
    vals = [Fraction(x) for x in f]
    if depth is None:
        depth = 0
        for x in vals:
            d = x.denominator
            if d & (d - 1):
                raise ValueError(f"value {x} is not a finite binary fraction")
            depth = max(depth, d.bit_length() - 1)
    scale = 2 ** depth
    units = []
    for x in vals:
        if x < 0:
            raise ValueError("flow values must be nonnegative")
        u = x * scale
        if u.denominator != 1:
            raise ValueError(f"value {x} needs more than {depth} fractional bits")
        if x >= 2 ** (top + 1):
            raise ValueError(f"value {x} exceeds the range fixed by U_max={U_max}")
        units.append(int(u))
    out = []
    for pos in range(top, -depth - 1, -1):
        bit = pos + depth
        c = Fraction(2) ** pos
        out.append((c, [c if (u >> bit) & 1 else Fraction(0) for u in units]))
    return out
