from __future__ import annotations

import random
from collections import Counter
from fractions import Fraction

import pytest
from hypothesis import given, strategies as st

from artifact.graph_core import Digraph, deficit, flow_value
from artifact.layered import validate_layered_dag
from artifact.rounding import (eulerian_partition, flow_turn_update, round_flow,
                               truncation_bits)
from instances import diamond, random_layered, random_path_flow


def check_partition(n, edges, part) -> None:
    assert part.covered() == list(range(len(edges)))
    ends = Counter()
    for trail in part.cycles + part.paths:
        for (e1, f1), (e2, f2) in zip(trail, trail[1:]):
            head = edges[e1][1] if f1 else edges[e1][0]
            tail = edges[e2][0] if f2 else edges[e2][1]
            assert head == tail
    for cyc in part.cycles:
        assert part.start(cyc) == part.end(cyc)
        verts = [part.start(cyc)] + [edges[e][1] if f else edges[e][0] for e, f in cyc]
        assert len(set(verts[:-1])) == len(verts) - 1
    for path in part.paths:
        s, t = part.start(path), part.end(path)
        assert s != t
        ends[s] += 1
        ends[t] += 1
        verts = [s] + [edges[e][1] if f else edges[e][0] for e, f in path]
        assert len(set(verts)) == len(verts)
    degree = Counter()
    for u, v in edges:
        degree[u] += 1
        degree[v] += 1
    odd = [v for v in degree if degree[v] % 2]
    assert len(part.paths) == len(odd) // 2
    assert all(c <= 1 for c in ends.values())


class TestEulerianPartition:
    def test_single_cycle(self):
        part = eulerian_partition(3, [(0, 1), (1, 2), (2, 0)])
        assert len(part.cycles) == 1 and not part.paths

    def test_single_path(self):
        part = eulerian_partition(4, [(0, 1), (1, 2), (2, 3)])
        assert not part.cycles and len(part.paths) == 1

    def test_k4(self):
        edges = [(u, v) for u in range(4) for v in range(u + 1, 4)]
        part = eulerian_partition(4, edges)
        assert len(part.paths) == 2
        check_partition(4, edges, part)

    def test_parallel_edges(self):
        edges = [(0, 1), (0, 1), (1, 0)]
        part = eulerian_partition(2, edges)
        check_partition(2, edges, part)

    def test_rejects_bad_endpoint(self):
        with pytest.raises(ValueError):
            eulerian_partition(2, [(0, 2)])

    def test_random_multigraphs(self):
        rng = random.Random(2024)
        for _ in range(1000):
            n = rng.randint(2, 9)
            edges = [tuple(rng.sample(range(n), 2)) for _ in range(rng.randint(0, 16))]
            check_partition(n, edges, eulerian_partition(n, edges))


class TestTurnUpdate:
    def test_directed_cycle_doubles(self):
        g = Digraph(4, [(0, 1, 1, 1), (1, 2, 1, 1), (2, 3, 1, 1), (3, 0, 1, 1)])
        half = Fraction(1, 2)
        part = eulerian_partition(4, [(0, 1), (1, 2), (2, 3), (3, 0)])
        out = flow_turn_update(g, [half] * 4, part)
        assert out == [1, 1, 1, 1] and deficit(g, out)[1] == 0

    def test_two_legs_one_doubled(self):
        g = diamond()
        half = Fraction(1, 2)
        part = eulerian_partition(4, list(zip(g.tails, g.heads)))
        out = flow_turn_update(g, [half] * 4, part)
        assert sorted(out) == [0, 0, 1, 1]
        assert deficit(g, out)[1] == 0
        assert out[0] == out[2] and out[1] == out[3]

    def test_empty(self):
        g = diamond()
        assert flow_turn_update(g, [0] * 4, eulerian_partition(4, [])) == [0, 0, 0, 0]

    def test_partition_must_cover_support(self):
        g = diamond()
        part = eulerian_partition(4, [(0, 1), (1, 3)])
        with pytest.raises(ValueError):
            flow_turn_update(g, [1, 1, 1, 1], part, arc_ids=[0, 2])

    @given(st.integers(0, 10 ** 6))
    def test_deficit_never_grows(self, seed):
        rng = random.Random(seed)
        g = random_layered(rng, 3, 3)
        c = Fraction(1, 2 ** rng.randint(0, 3))
        bit = [c if rng.random() < 0.6 else 0 for _ in range(g.m)]
        arcs = [a for a in range(g.m) if bit[a]]
        part = eulerian_partition(g.n, [(g.tails[a], g.heads[a]) for a in arcs])
        out = flow_turn_update(g, bit, part, arc_ids=arcs)
        assert all(x in (0, 2 * c) for x in out)
        assert deficit(g, out)[1] <= deficit(g, bit)[1]


class TestRoundFlow:
    def test_integral_input_kept(self):
        d = validate_layered_dag(diamond((2, 1, 2, 1)))
        assert round_flow(d, [2, 1, 2, 1]) == [2, 1, 2, 1]

    def test_half_flow_on_two_legs(self):
        d = validate_layered_dag(diamond())
        half = Fraction(1, 2)
        out = round_flow(d, [half] * 4, Fraction(1, 2))
        assert flow_value(d.to_digraph(), out) == 1
        assert out in ([1, 0, 1, 0], [0, 1, 0, 1])

    def test_quarter_values_three_layers(self):
        g = Digraph(6, [(0, 1, 1, 1), (0, 2, 1, 1), (1, 3, 1, 1), (2, 3, 1, 1), (2, 4, 1, 1),
                        (3, 5, 1, 1), (4, 5, 1, 1)], {0}, {5})
        q = Fraction(1, 4)
        f = [3 * q, 2 * q, 3 * q, q, q, 4 * q, q]
        assert deficit(g, f)[1] == 0
        d = validate_layered_dag(g)
        eps = Fraction(1, 10)
        out = round_flow(d, f, eps)
        assert all(isinstance(x, int) and 0 <= x <= u for x, u in zip(out, g.caps))
        assert deficit(g, out)[1] == 0
        assert flow_value(g, out) >= (1 - eps) * flow_value(g, f)

    def test_rejects_infeasible(self):
        d = validate_layered_dag(diamond())
        with pytest.raises(ValueError):
            round_flow(d, [2, 0, 2, 0])

    @given(st.integers(0, 10 ** 6))
    def test_value_guarantee(self, seed):
        rng = random.Random(seed)
        g = random_layered(rng, rng.randint(1, 4), 3, max_cap=6)
        f = random_path_flow(rng, g)
        d = validate_layered_dag(g)
        eps = Fraction(1, 100)
        out = round_flow(d, f, eps)
        assert all(isinstance(x, int) and 0 <= x <= u for x, u in zip(out, g.caps))
        assert deficit(g, out)[1] == 0
        assert flow_value(g, out) >= (1 - eps) * flow_value(g, f)


def test_bit_rounds_clear_low_bits_and_keep_deficit_small():
    """Replays the bit loop with the public update step, tracking the net
    balance of the whole flow so endpoint choices see real deficits."""
    rng = random.Random(7)
    for _ in range(30):
        g = random_layered(rng, 3, 3, max_cap=5)
        f = random_path_flow(rng, g)
        k = truncation_bits(g.m, g.max_cap)
        scale = 2 ** k
        cur = [Fraction(int(x * scale), scale) for x in f]
        start_deficit = deficit(g, cur)[1]
        assert start_deficit <= Fraction(2 * g.m * g.max_cap, scale)
        for i in range(k, 0, -1):
            c = Fraction(1, 2 ** i)
            bit = [c if (x / c).numerator % 2 == 1 and (x / c).denominator == 1 else 0
                   for x in cur]
            arcs = [a for a in range(g.m) if bit[a]]
            part = eulerian_partition(g.n, [(g.tails[a], g.heads[a]) for a in arcs])
            net = {v: 0 for v in range(g.n)}
            for a, x in enumerate(cur):
                net[g.tails[a]] += x
                net[g.heads[a]] -= x
            turned = flow_turn_update(g, bit, part, base_net=net, arc_ids=arcs)
            cur = [x - b + t for x, b, t in zip(cur, bit, turned)]
            assert all((x / c).denominator == 1 and (x / c).numerator % 2 == 0 or x == 0
                       for x in cur)
            assert deficit(g, cur)[1] <= start_deficit
        assert all(x.denominator == 1 for x in cur)
