"""The checking oracles themselves, cross-examined against one another."""
from __future__ import annotations

import random
from fractions import Fraction

import pytest
from hypothesis import given, strategies as st

from artifact.graph_core import Digraph, MovingCut, PathFlow, ScaledReal
from artifact.verify import (EnumerationLimit, b_matching_feasible, brute_force_b_matching,
                             brute_force_disjoint_paths, certify_bracket, enumerate_h_paths,
                             enumerated_path_counts, flow_problems, max_flow_value,
                             paths_are_disjoint, residual_has_h_path, verify_moving_cut)
from instances import diamond, random_bipartite, random_digraph, random_layered, unit_path


def test_enumerate_diamond():
    assert enumerate_h_paths(diamond(), 2) == [(0, 2), (1, 3)]
    assert enumerate_h_paths(diamond(), 1) == []


def test_enumeration_limit():
    g = Digraph(2, [(0, 1, 1, 1)] * 5, {0}, {1})
    with pytest.raises(EnumerationLimit):
        enumerate_h_paths(g, 1, limit=3)


def test_unit_weights_are_feasible_cut():
    assert verify_moving_cut(diamond(), MovingCut.from_values([1] * 4), 2)
    assert not verify_moving_cut(diamond(), MovingCut.from_values([0.4] * 4), 2)
    assert verify_moving_cut(diamond(), MovingCut.from_values([0.4] * 4), 1)


def test_flow_problems_reports_capacity():
    g = unit_path(2)
    f = PathFlow(g.m, 1)
    f.add_component([((0, 1), 2)])
    assert flow_problems(g, f, 2) == ["arc 0 carries 2 > 1", "arc 1 carries 2 > 1"]


def test_bracket():
    assert certify_bracket(Fraction(3), ScaledReal.from_value(3))
    assert not certify_bracket(Fraction(4), ScaledReal.from_value(3))


@given(st.integers(0, 10 ** 6))
def test_max_flow_matches_arc_packing(seed):
    # with no effective length bound the two exact answers must agree
    rng = random.Random(seed)
    g = random_layered(rng, rng.randint(1, 3), 2, max_cap=2)
    assert max_flow_value(g) == brute_force_disjoint_paths(g, "darc", sum(g.lengths))


@given(st.integers(0, 10 ** 6))
def test_source_counts_sum_to_arc_counts_at_sources(seed):
    rng = random.Random(seed)
    g = random_layered(rng, rng.randint(1, 4), 3, max_cap=3)
    per_source, per_arc = enumerated_path_counts(g)
    for s in g.S:
        assert per_source[s] == sum(per_arc[a] for a in g.out_arcs[s])


@given(st.integers(0, 10 ** 6))
def test_disjoint_optimum_leaves_nothing_or_is_maximal(seed):
    # the variants nest: arc-disjoint packs at least as many as vertex-disjoint
    rng = random.Random(seed)
    g = random_digraph(rng, rng.randint(2, 6), rng.randint(1, 8), max_cap=1, planted=2)
    h = rng.randint(1, 4)
    assert brute_force_disjoint_paths(g, "darc", h) >= brute_force_disjoint_paths(g, "dvertex", h)


def test_residual_path_checks():
    g = diamond()
    assert residual_has_h_path(g, "darc", [(0, 2)], 2)
    assert not residual_has_h_path(g, "darc", [(0, 2), (1, 3)], 2)
    assert not residual_has_h_path(g, "dvertex", [(0, 2)], 2)
    assert not paths_are_disjoint(g, "dvertex", [(0, 2), (1, 3)])
    assert paths_are_disjoint(g, "edge", [(0, 2), (1, 3)])


def test_b_matching_examples():
    assert brute_force_b_matching([(0, 1)], [3, 2], [5]) == 2
    assert b_matching_feasible([(0, 1)], [3, 2], [5], [2])
    assert not b_matching_feasible([(0, 1)], [3, 2], [5], [3])
    with pytest.raises(EnumerationLimit):
        brute_force_b_matching([(0, 1)] * 13, [1, 1], [1] * 13)


@given(st.integers(0, 10 ** 6))
def test_b_matching_agrees_with_max_flow(seed):
    rng = random.Random(seed)
    n, edges, budgets, caps = random_bipartite(rng, max_edges=7)
    left = {u for u, _ in edges}
    arcs = [(u, v, c, 1) for (u, v), c in zip(edges, caps)]
    src, snk = n, n + 1
    arcs += [(src, u, budgets[u], 1) for u in sorted(left)]
    arcs += [(v, snk, budgets[v], 1) for v in sorted({v for _, v in edges})]
    g = Digraph(n + 2, arcs, {src}, {snk})
    assert brute_force_b_matching(edges, budgets, caps) == max_flow_value(g)
