import itertools

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from medianlab.limits import LimitExceeded
from medianlab.median import (
    FiniteMedianAlgebra,
    closure,
    convex_hull,
    identity_defects,
    interval,
    iterated_median,
    median_closure,
    median_cube,
    median_graph,
    product_algebra,
    rank,
    rank_bruteforce,
    verify_median_axioms,
)
from medianlab.spaces import path_tree, star_tree
from medianlab.terms import free_median_algebra


def test_cube_labels_and_majority():
    cube = median_cube(3)
    assert len(cube) == 8
    a, b, c = cube.index((1, 0, 0)), cube.index((1, 1, 0)), cube.index((0, 1, 1))
    assert cube.labels[cube.m(a, b, c)] == (1, 1, 0)


def test_cube_size_limit():
    with pytest.raises(LimitExceeded):
        median_cube(17)


@pytest.mark.parametrize("n", [1, 2, 3, 4])
def test_cube_axioms_and_rank(n):
    cube = median_cube(n)
    assert verify_median_axioms(cube.table).ok
    assert rank(cube) == n


def test_corrupted_table_is_reported():
    table = median_cube(2).table.copy()
    table[0, 0, 3] = 3
    report = verify_median_axioms(table)
    assert not report.ok
    assert (0, 3) in [d[:2] for d in report.m1_defects] or report.m1_defects


def test_sampled_mode_for_large_tables():
    alg = free_median_algebra(5)[0]
    report = verify_median_axioms(alg.table, samples=20_000)
    assert report.ok and not report.exhaustive


def test_intervals_in_free_algebra_on_four():
    alg, _ = free_median_algebra(4)
    assert len(interval(alg, 0, 1)) == 6
    assert interval(alg, 2, 2) == {2}


def test_interval_rejects_non_median():
    table = np.zeros((2, 2, 2), dtype=np.int64)
    table[:, 0, :] = 1
    bad = FiniteMedianAlgebra.from_table(["x", "y"], table)
    with pytest.raises(ValueError):
        interval(bad, 1, 1)


def test_iterated_median_and_hull():
    cube = median_cube(3)
    xs = [cube.index((1, 0, 0)), cube.index((0, 1, 0))]
    b = cube.index((1, 1, 1))
    assert cube.labels[iterated_median(cube, xs, b)] == (1, 1, 0)
    hull = convex_hull(cube, xs)
    assert {cube.labels[h] for h in hull} == {(1, 0, 0), (0, 1, 0), (0, 0, 0), (1, 1, 0)}


def test_closure_matches_free_algebra():
    alg, _ = free_median_algebra(3)
    cube = median_cube(3)
    gens = [cube.index(v) for v in [(1, 0, 0), (0, 1, 0), (0, 0, 1)]]
    sub = median_closure(cube, gens)
    assert len(sub) == 4 and rank(sub) == 1
    assert sorted(closure([1, 2, 4], lambda x, y, z: (x & y) | (x & z) | (y & z))) == [0, 1, 2, 4]


def test_closure_cap():
    with pytest.raises(LimitExceeded):
        median_closure(median_cube(4), [1, 2, 4, 8], cap=4)


@pytest.mark.parametrize("p, size, r", [(1, 1, 0), (2, 2, 1), (3, 4, 1), (4, 12, 3)])
def test_free_algebra_rank_two_ways(p, size, r):
    alg, _ = free_median_algebra(p)
    assert len(alg) == size
    assert rank(alg) == r
    assert rank_bruteforce(alg) == r


def test_free_algebra_on_four_graph():
    g = median_graph(free_median_algebra(4)[0])
    assert g.connected
    assert len(g.edges) == 16


def test_free_algebra_on_five_size():
    alg, _ = free_median_algebra(5)
    assert len(alg) == 81


def test_product_of_edges_is_square():
    edge = path_tree(1).as_algebra()
    sq = product_algebra(edge, edge)
    assert len(sq) == 4
    assert rank(sq) == 2
    assert np.array_equal(np.sort(sq.table.ravel()), np.sort(median_cube(2).table.ravel()))


def test_tree_rank_is_one():
    assert rank(star_tree(3).as_algebra()) == 1
    assert rank(path_tree(4).as_algebra()) == 1


def test_identity_defects_zero_on_small_exact_algebras():
    for alg in (median_cube(2), free_median_algebra(3)[0], star_tree(3).as_algebra()):
        assert not any(identity_defects(alg).values())


def test_identity_defects_detect_corruption():
    table = median_cube(2).table.copy()
    table[1, 2, 3] = table[1, 3, 2] = table[2, 1, 3] = 0
    alg = FiniteMedianAlgebra.from_table(median_cube(2).labels, table)
    assert sum(identity_defects(alg).values()) > 0


def test_json_round_trip():
    alg = free_median_algebra(3)[0]
    back = FiniteMedianAlgebra.from_json(alg.to_json())
    assert back.labels == alg.labels
    assert np.array_equal(back.table, alg.table)


@given(st.integers(0, 15), st.integers(0, 15), st.integers(0, 15), st.integers(0, 15))
@settings(max_examples=200)
def test_cube_m3_and_isbell(a, b, c, d):
    m = median_cube(4).m
    assert m(m(a, b, c), b, d) == m(a, b, m(c, b, d))
    assert m(a, m(a, b, c), m(b, c, d)) == m(a, b, c)


@given(st.lists(st.integers(0, 7), min_size=1, max_size=4), st.integers(0, 7))
def test_iterated_median_is_order_free(xs, b):
    cube = median_cube(3)
    first = iterated_median(cube, xs, b)
    for perm in itertools.permutations(xs):
        assert iterated_median(cube, list(perm), b) == first
