from __future__ import annotations

import math
import random
from fractions import Fraction

import pytest
from hypothesis import given, settings, strategies as st

from artifact.graph_core import Digraph, PathFlow, ScaledReal
from artifact.mw import (CommodityBatch, MwParams, certify_multi, certify_pair, solve_multi,
                         solve_pair)
from artifact.verify import certify_bracket, verify_flow, verify_moving_cut
from instances import diamond, random_digraph, single_arc


class TestParams:
    def test_derived_quantities(self):
        p = MwParams.from_eps(0.6, 10)
        assert p.eps0 == pytest.approx(0.1)
        assert p.zeta == pytest.approx(1.2 / 0.1 + 1)
        assert p.eta == pytest.approx(0.1 / (1.1 * 13 * math.log(10)))
        assert p.initial_weight().log2() == pytest.approx(-13 * math.log2(10))

    def test_tiny_initial_weight_is_representable(self):
        p = MwParams.from_eps(0.001, 10 ** 6)
        w = p.initial_weight()
        assert not w.is_zero and w.to_float() == 0.0

    def test_rejects_eps(self):
        for eps in (0, 1, -0.1, 1.5):
            with pytest.raises(ValueError):
                MwParams.from_eps(eps, 4)


class TestSolvePair:
    def test_disconnected(self):
        g = Digraph(4, [(0, 1, 3, 1), (2, 3, 3, 1)], {0}, {3})
        r = solve_pair(g, 4, 0.5)
        rep = certify_pair(g, r.flow, r.cut, 4, 0.5)
        assert r.flow.value == 0 and rep.passed
        assert rep.dual.compare(rep.delta0) <= 0

    def test_single_arc(self):
        g = single_arc(cap=5)
        r = solve_pair(g, 1, 0.5)
        rep = certify_pair(g, r.flow, r.cut, 1, 0.5)
        assert rep.passed
        assert Fraction(r.flow.value) >= Fraction(5, 2)
        assert Fraction(r.flow.value) <= 5 <= rep.dual.to_fraction() * (1 + Fraction(1, 10 ** 9))

    def test_diamond(self):
        g = diamond()
        r = solve_pair(g, 2, 0.25)
        assert certify_pair(g, r.flow, r.cut, 2, 0.25).passed
        assert Fraction(3, 2) <= Fraction(r.flow.value) <= 2
        for comp in r.flow.components:
            one = PathFlow(g.m, 1)
            one.add_component(comp)
            assert all(isinstance(m, int) for _, m in comp)
            assert verify_flow(g, one, 2)

    def test_rejects_overlap_and_empty(self):
        with pytest.raises(ValueError):
            solve_pair(Digraph(2, [(0, 1, 1, 1)], {0}, set()), 1, 0.5)
        with pytest.raises(ValueError):
            solve_pair(single_arc(), 1, 1.0)

    def test_deterministic(self):
        g = diamond((2, 3, 1, 4))
        a, b = solve_pair(g, 2, 0.3), solve_pair(g, 2, 0.3)
        assert a.flow.components == b.flow.components and a.cut == b.cut

    @settings(max_examples=12)
    @given(st.integers(0, 10 ** 6), st.sampled_from(["det", "rand"]))
    def test_certified_with_invariants(self, seed, mode):
        rng = random.Random(seed)
        g = random_digraph(rng, rng.randint(2, 6), rng.randint(1, 9), max_cap=6, max_len=2)
        h, eps = rng.randint(1, 4), 0.5
        r = solve_pair(g, h, eps, mode, seed)
        rep = certify_pair(g, r.flow, r.cut, h, eps)
        assert rep.passed, rep.problems
        assert verify_moving_cut(g, r.cut, h)
        assert certify_bracket(Fraction(r.flow.value), rep.dual)
        assert r.info.max_counter_ratio <= 1
        bound = 64 * h / eps ** 4 * math.ceil(math.log2(max(g.n, 2))) ** 2
        assert r.flow.k <= bound


class TestCertify:
    def test_halved_cut_fails(self):
        g = single_arc(cap=3)
        r = solve_pair(g, 1, 0.5)
        rep = certify_pair(g, r.flow, r.cut.scaled(0.5), 1, 0.5)
        assert not rep.cut_feasible and not rep.passed

    def test_overfull_flow_fails(self):
        g = single_arc(cap=3)
        r = solve_pair(g, 1, 0.5)
        f = PathFlow(g.m, r.flow.eta)
        for comp in r.flow.components:
            f.add_component(comp)
        f.add_component(r.flow.paths() * 2)
        rep = certify_pair(g, f, r.cut, 1, 0.5)
        assert not rep.flow_feasible and not rep.passed
        assert any("capacity" in p for p in rep.problems)

    def test_long_path_fails(self):
        g = Digraph(3, [(0, 1, 1, 2), (1, 2, 1, 2)], {0}, {2})
        f = PathFlow(g.m, 1)
        f.add_component([((0, 1), 1)])
        rep = certify_pair(g, f, r_cut_ones(g), 3, 0.5)
        assert not rep.flow_feasible


def r_cut_ones(g):
    from artifact.graph_core import MovingCut
    return MovingCut.from_values([1] * g.m)


def two_components() -> Digraph:
    arcs = [(0, 1, 2, 1), (1, 2, 1, 1), (0, 2, 1, 2),
            (3, 4, 1, 1), (4, 5, 3, 1), (3, 5, 2, 1)]
    return Digraph(6, arcs)


class TestMulti:
    def test_single_commodity_matches_pair(self):
        g = diamond((1, 2, 2, 1))
        a = solve_pair(g, 2, 0.3)
        b = solve_multi(g, CommodityBatch.single_batch([(g.S, g.T)]), 2, 0.3)
        assert a.flow.components == b.flows[0].components
        assert a.flow.eta == b.flows[0].eta and a.cut == b.cut

    def test_disjoint_components_compose(self):
        g = two_components()
        pairs = [({0}, {2}), ({3}, {5})]
        h, eps = 2, 0.3
        joint = solve_multi(g, CommodityBatch.single_batch(pairs), h, eps)
        alone = [solve_multi(g, CommodityBatch.single_batch([p]), h, eps) for p in pairs]
        for i in range(2):
            assert joint.flows[i].components == alone[i].flows[0].components
            assert joint.flows[i].eta == alone[i].flows[0].eta
        arcs_of = [range(0, 3), range(3, 6)]
        for i, arcs in enumerate(arcs_of):
            for a in arcs:
                assert joint.cut.weights[a] == alone[i].cut.weights[a]
        rep = certify_multi(g, joint.flows, joint.cut, pairs, h, eps)
        assert rep.passed, rep.problems

    def test_close_pairs_rejected(self):
        g = Digraph(4, [(0, 1, 1, 1), (1, 2, 1, 1), (2, 3, 1, 1)])
        with pytest.raises(ValueError):
            solve_multi(g, CommodityBatch.single_batch([({0}, {1}), ({2}, {3})]), 1, 0.5)

    def test_close_pairs_fine_in_separate_batches(self):
        g = Digraph(4, [(0, 1, 1, 1), (1, 2, 1, 1), (2, 3, 1, 1)])
        pairs = [({0}, {1}), ({2}, {3})]
        r = solve_multi(g, CommodityBatch.one_per_batch(pairs), 1, 0.5)
        assert certify_multi(g, r.flows, r.cut, pairs, 1, 0.5).passed

    def test_shared_terminal_rejected(self):
        g = two_components()
        with pytest.raises(ValueError):
            solve_multi(g, CommodityBatch.single_batch([({0}, {2}), ({0}, {1})]), 2, 0.5)
