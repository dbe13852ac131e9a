"""Instance text format, random generators and JSON result documents.

Instance files are line based and 1-indexed:

    c free-form comment
    p lcf <n> <m>
    a <tail> <head> <cap> <len>
    s <v>            (source)
    t <v>            (sink)
    b <v> <budget>   (b-matching budgets)
    k <id> s|t <v>   (commodity terminals)
"""

from __future__ import annotations

import hashlib
import json
import random
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Any

from .graph_core import Digraph, MovingCut, PathFlow, ScaledReal

FORMAT_VERSION = 1


class InstanceError(ValueError):
    """Malformed instance text; `line` is 1-based (0 when not tied to a line)."""

    def __init__(self, line: int, message: str):
        super().__init__(f"line {line}: {message}" if line else message)
        self.line = line


@dataclass
class Instance:
    graph: Digraph
    budgets: dict[int, int] = field(default_factory=dict)
    commodities: dict[int, tuple[set[int], set[int]]] = field(default_factory=dict)
    comments: list[str] = field(default_factory=list)

    def commodity_pairs(self) -> list[tuple[set[int], set[int]]]:
        return [self.commodities[k] for k in sorted(self.commodities)]


def _ints(parts: list[str], count: int, line: int, what: str) -> list[int]:
    if len(parts) != count:
        raise InstanceError(line, f"{what} line needs {count} fields, got {len(parts)}")
    try:
        return [int(x) for x in parts]
    except ValueError:
        raise InstanceError(line, f"{what} line has a non-integer field") from None


def parse_instance(text: str) -> Instance:
    n = m = None
    arcs: list[tuple[int, int, int, int]] = []
    S: set[int] = set()
    T: set[int] = set()
    budgets: dict[int, int] = {}
    commodities: dict[int, tuple[set[int], set[int]]] = {}
    comments: list[str] = []

    def vertex(x: int, line: int) -> int:
        if not 1 <= x <= n:
            raise InstanceError(line, f"vertex {x} outside 1..{n}")
        return x - 1

    for no, raw in enumerate(text.splitlines(), 1):
        parts = raw.split()
        if not parts:
            continue
        kind, rest = parts[0], parts[1:]
        if kind == "c":
            comments.append(raw[1:].strip())
            continue
        if kind == "p":
            if n is not None:
                raise InstanceError(no, "duplicate header")
            if len(rest) != 3 or rest[0] != "lcf":
                raise InstanceError(no, "header must read 'p lcf <n> <m>'")
            n, m = _ints(rest[1:], 2, no, "header")
            if n < 0 or m < 0:
                raise InstanceError(no, "negative size in header")
            continue
        if n is None:
            raise InstanceError(no, "content before the 'p lcf' header")
        if kind == "a":
            u, v, cap, length = _ints(rest, 4, no, "arc")
            if cap < 0:
                raise InstanceError(no, "negative capacity")
            if length < 1:
                raise InstanceError(no, "arc length must be at least 1")
            arcs.append((vertex(u, no), vertex(v, no), cap, length))
        elif kind in ("s", "t"):
            (v,) = _ints(rest, 1, no, "terminal")
            (S if kind == "s" else T).add(vertex(v, no))
        elif kind == "b":
            v, budget = _ints(rest, 2, no, "budget")
            if budget < 0:
                raise InstanceError(no, "negative budget")
            budgets[vertex(v, no)] = budget
        elif kind == "k":
            if len(rest) != 3 or rest[1] not in ("s", "t"):
                raise InstanceError(no, "commodity line must read 'k <id> s|t <v>'")
            cid, v = _ints([rest[0], rest[2]], 2, no, "commodity")
            pair = commodities.setdefault(cid, (set(), set()))
            pair[0 if rest[1] == "s" else 1].add(vertex(v, no))
        else:
            raise InstanceError(no, f"unknown line type {kind!r}")
    if n is None:
        raise InstanceError(0, "missing 'p lcf' header")
    if len(arcs) != m:
        raise InstanceError(0, f"header declares {m} arcs but {len(arcs)} were given")
    if S & T:
        raise InstanceError(0, "a vertex is both a source and a sink")
    return Instance(Digraph(n, arcs, S, T), budgets, commodities, comments)


def format_instance(inst: Instance) -> str:
    g = inst.graph
    lines = [f"c {c}" if c else "c" for c in inst.comments]
    lines.append(f"p lcf {g.n} {g.m}")
    for u, v, cap, length in zip(g.tails, g.heads, g.caps, g.lengths):
        lines.append(f"a {u + 1} {v + 1} {cap} {length}")
    lines += [f"s {v + 1}" for v in sorted(g.S)]
    lines += [f"t {v + 1}" for v in sorted(g.T)]
    lines += [f"b {v + 1} {b}" for v, b in sorted(inst.budgets.items())]
    for cid in sorted(inst.commodities):
        S, T = inst.commodities[cid]
        lines += [f"k {cid} s {v + 1}" for v in sorted(S)]
        lines += [f"k {cid} t {v + 1}" for v in sorted(T)]
    return "\n".join(lines) + "\n"


def digest(inst: Instance) -> str:
    """SHA-256 of the canonical text, ignoring comments."""
    bare = Instance(inst.graph, inst.budgets, inst.commodities)
    return hashlib.sha256(format_instance(bare).encode()).hexdigest()


def _layer_sizes(n: int, layers: int, rng: random.Random) -> list[int]:
    sizes = [1] * layers
    for _ in range(n - layers):
        sizes[rng.randrange(layers)] += 1
    return sizes


def gen_layered(n: int, m: int, h: int, seed: int) -> Instance:
    """h-layer S-T DAG on n vertices with unit lengths and caps in [1, 16].

    Every vertex gets an arc from the layer before and to the layer after
    (so the result validates as a layered DAG); remaining arcs up to m join
    random vertices of increasing layers.
    """
    if h < 1 or n < h + 1:
        raise ValueError("layered model needs h >= 1 and n >= h + 1")
    rng = random.Random(seed)
    sizes = _layer_sizes(n, h + 1, rng)
    layers, start = [], 0
    for size in sizes:
        layers.append(list(range(start, start + size)))
        start += size
    pairs: set[tuple[int, int]] = set()
    for i in range(1, h + 1):
        for v in layers[i]:
            pairs.add((rng.choice(layers[i - 1]), v))
    for i in range(h):
        for u in layers[i]:
            if not any(p[0] == u for p in pairs):
                pairs.add((u, rng.choice(layers[i + 1])))
    if m < len(pairs):
        raise ValueError(f"layered model needs at least {len(pairs)} arcs for this layout")
    layer_of = {v: i for i, layer in enumerate(layers) for v in layer}
    candidates = [(u, v) for u in range(n) for v in range(n)
                  if layer_of[u] < layer_of[v] and (u, v) not in pairs]
    rng.shuffle(candidates)
    pairs.update(candidates[:m - len(pairs)])
    arcs = [(u, v, rng.randint(1, 16), 1) for u, v in sorted(pairs)]
    return Instance(Digraph(n, arcs, set(layers[0]), set(layers[-1])),
                    comments=[f"layered n={n} m={len(arcs)} h={h} seed={seed}"])


def gen_random(n: int, m: int, seed: int, sources: int = 1, sinks: int = 1) -> Instance:
    """Random simple digraph with lengths in [1, 4] and caps in [1, 16].

    A spanning path over a random vertex order keeps the graph connected;
    the first vertices of the order are sources and the last are sinks.
    """
    if n < 2 or m < n - 1:
        raise ValueError("random model needs n >= 2 and m >= n - 1")
    if m > n * (n - 1):
        raise ValueError("more arcs than a simple digraph allows")
    if sources + sinks > n:
        raise ValueError("too many terminals")
    rng = random.Random(seed)
    order = list(range(n))
    rng.shuffle(order)
    pairs = {(order[i], order[i + 1]) for i in range(n - 1)}
    candidates = [(u, v) for u in range(n) for v in range(n) if u != v and (u, v) not in pairs]
    rng.shuffle(candidates)
    pairs.update(candidates[:m - len(pairs)])
    arcs = [(u, v, rng.randint(1, 16), rng.randint(1, 4)) for u, v in sorted(pairs)]
    S, T = set(order[:sources]), set(order[n - sinks:])
    return Instance(Digraph(n, arcs, S, T),
                    comments=[f"random n={n} m={m} seed={seed}"])


def gen_instance(model: str, n: int, m: int, h: int, seed: int) -> Instance:
    if model == "layered":
        return gen_layered(n, m, h, seed)
    if model == "random":
        return gen_random(n, m, seed)
    raise ValueError(f"unknown model {model!r}")


# ---- result documents -------------------------------------------------

def scaled_to_json(x: ScaledReal) -> list:
    return [x.significand, x.exponent]


def scaled_from_json(pair: list) -> ScaledReal:
    return ScaledReal(float(pair[0]), int(pair[1]))


def fraction_to_json(x) -> str:
    x = Fraction(x)
    return f"{x.numerator}/{x.denominator}"


def fraction_from_json(s: str) -> Fraction:
    return Fraction(s)


def cut_to_json(w: MovingCut) -> list:
    return [scaled_to_json(x) for x in w.weights]


def cut_from_json(data: list) -> MovingCut:
    return MovingCut(tuple(scaled_from_json(p) for p in data))


def _vertices(g: Digraph, path) -> list[int]:
    return [v + 1 for v in g.path_vertices(path)]


def flow_to_json(g: Digraph, f: PathFlow) -> dict:
    comps = []
    for comp in f.components:
        comps.append([{"arcs": [a + 1 for a in p], "vertices": _vertices(g, p),
                       "multiplicity": int(mult) if Fraction(mult).denominator == 1
                       else fraction_to_json(mult)}
                      for p, mult in comp])
    eta = f.eta
    return {"eta": eta if isinstance(eta, float) else fraction_to_json(eta),
            "components": comps, "value": fraction_to_json(Fraction(eta) * f.total_multiplicity())}


def flow_from_json(m: int, data: dict) -> PathFlow:
    eta = data["eta"]
    eta = eta if isinstance(eta, float) else fraction_from_json(eta)
    f = PathFlow(m, eta)
    for comp in data["components"]:
        entries = []
        for item in comp:
            mult = item["multiplicity"]
            mult = mult if isinstance(mult, int) else fraction_from_json(mult)
            entries.append((tuple(a - 1 for a in item["arcs"]), mult))
        f.add_component(entries)
    return f


def dump_result(doc: dict[str, Any]) -> str:
    return json.dumps(doc, indent=1, sort_keys=True) + "\n"


def load_result(text: str) -> dict[str, Any]:
    doc = json.loads(text)
    if doc.get("format") != FORMAT_VERSION:
        raise ValueError("unsupported result format")
    return doc
