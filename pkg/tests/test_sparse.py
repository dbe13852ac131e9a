from __future__ import annotations

import random
from fractions import Fraction

import pytest
from hypothesis import given, strategies as st

from artifact.graph_core import Digraph
from artifact.layered import validate_layered_dag
from artifact.sparse import sparse_decompose
from instances import diamond, random_layered, random_path_flow, unit_path


def test_single_path():
    f = sparse_decompose(validate_layered_dag(unit_path(2)), [1, 1])
    assert f.paths() == [((0, 1), 1)]


def test_diamond_two_paths():
    f = sparse_decompose(validate_layered_dag(diamond()), [1, 1, 1, 1])
    assert sorted(f.paths()) == [((0, 2), 1), ((1, 3), 1)]


def test_split_at_middle_vertex():
    g = Digraph(4, [(0, 1, 2, 1), (1, 2, 1, 1), (1, 3, 1, 1)], {0}, {2, 3})
    f = sparse_decompose(validate_layered_dag(g), [2, 1, 1])
    assert sorted(f.paths()) == [((0, 1), 1), ((0, 2), 1)]
    assert f.support_size() <= g.m


def test_rejects_deficit():
    with pytest.raises(ValueError):
        sparse_decompose(validate_layered_dag(diamond()), [1, 0, 0, 0])


@given(st.integers(0, 10 ** 6))
def test_exact_and_sparse(seed):
    rng = random.Random(seed)
    g = random_layered(rng, rng.randint(1, 5), 3, max_cap=7, skip=0.2)
    d = validate_layered_dag(g)
    f = random_path_flow(rng, g, pieces=8)
    pf = sparse_decompose(d, f)
    assert [Fraction(x) for x in pf.arc_values()] == f
    assert pf.support_size() <= sum(1 for x in f if x)
    for path, mult in pf.paths():
        assert mult > 0 and g.is_st_path(path)
