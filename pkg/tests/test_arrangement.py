import itertools
import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from conftest import sweep_oracle
from sphere_blasso.arrangement import (Stratum, cover_count, enumerate_strata, full_regions,
                                       min_norm_in_hull, pattern_feasible, sparsity_bound,
                                       strata_by_codim)
from sphere_blasso.geometry import flat_from_normals
from sphere_blasso.instances import FIG1_POINTS


def full_flat(d):
    return flat_from_normals(np.zeros((0, d)), d)


def test_min_norm_in_hull_simple():
    res = min_norm_in_hull(np.array([[1.0, -1.0], [1.0, 1.0]]))
    assert res.converged
    np.testing.assert_allclose(res.point, [1.0, 0.0], atol=1e-12)
    res = min_norm_in_hull(np.array([[1.0, 0.0], [-1.0, 0.0], [0.0, 1.0]]))
    assert res.distance < 1e-12


def test_pattern_feasible_quadrant():
    f = pattern_feasible([[1.0, 0.0], [0.0, 1.0]], [1, 1], full_flat(2))
    assert f.feasible
    np.testing.assert_allclose(f.witness, [np.sqrt(0.5), np.sqrt(0.5)], atol=1e-9)


def test_pattern_feasible_opposite_halfplanes():
    f = pattern_feasible([[1.0, 0.0], [-1.0, 0.0]], [1, 1], full_flat(2))
    assert not f.feasible


def test_fig1_points_ten_feasible_patterns():
    X = np.array(FIG1_POINTS)
    count = sum(pattern_feasible(X, s, full_flat(2)).feasible
                for s in itertools.product([1, -1], repeat=5))
    assert count == 10


def test_projected_point_vanishing_is_infeasible():
    # on the flat orthogonal to (1,0), the point (2,0) projects to zero
    flat = flat_from_normals([[1.0, 0.0]], 2)
    assert not pattern_feasible([[2.0, 0.0]], [1], flat).feasible


def test_single_hyperplane_four_strata():
    S = enumerate_strata(np.array([[1.0, 0.0]]))
    assert len(S) == 4
    assert sorted(s.ternary() for s in S) == [(-1,), (0,), (0,), (1,)]
    points = sorted(tuple(np.round(s.witness, 12)) for s in S if not s.strict)
    assert points == [(0.0, -1.0), (0.0, 1.0)]


def test_two_orthogonal_inputs_four_regions():
    S = enumerate_strata(np.array([[1.0, 0.0], [0.0, 1.0]]))
    regions = sorted(s.ternary() for s in full_regions(S))
    assert regions == [(-1, -1), (-1, 1), (1, -1), (1, 1)]
    assert strata_by_codim(S) == {0: 4, 1: 4}


def test_fig1_points_strata():
    S = enumerate_strata(np.array(FIG1_POINTS))
    assert strata_by_codim(S) == {0: 10, 1: 10}
    assert sweep_oracle(np.array(FIG1_POINTS)) == sorted(s.ternary() for s in S)


def test_canonical_order_and_witnesses():
    rng = np.random.default_rng(5)
    X = rng.normal(size=(6, 3))
    S = enumerate_strata(X)
    sizes = [len(s.strict) for s in S]
    assert sizes == sorted(sizes, reverse=True)
    for s in S:
        w = s.witness
        assert abs(np.linalg.norm(w) - 1) < 1e-12
        inner = X @ w
        for j, sg in zip(s.strict, s.signs):
            assert sg * inner[j] > 1e-9
        for z in s.zero_indices:
            assert abs(inner[z]) <= 1e-10
        assert s.contains(w, X)
    assert len(S) <= 3 ** 6
    assert len(full_regions(S)) == cover_count(6, 3)


def test_enumeration_matches_sweep_oracle_on_random_instances():
    rng = np.random.default_rng(11)
    for trial in range(100):
        n = int(rng.integers(1, 9))
        X = rng.normal(size=(n, 2))
        if trial % 10 == 0 and n >= 2:
            X[1] = -2.5 * X[0]  # antiparallel duplicate hyperplane
        S = enumerate_strata(X)
        assert sorted(s.ternary() for s in S) == sweep_oracle(X)
        if trial % 10 != 0:
            assert len(full_regions(S)) == cover_count(n, 2)


def test_all_parallel_points():
    X = np.array([[1.0, 1.0], [2.0, 2.0], [-1.0, -1.0]])
    S = enumerate_strata(X)
    assert sorted(s.ternary() for s in S) == sweep_oracle(X)
    assert len(full_regions(S)) == 2


def test_parallel_enumeration_identical():
    X = np.random.default_rng(2).normal(size=(6, 3))
    a = enumerate_strata(X)
    b = enumerate_strata(X, workers=2)
    assert [s.ternary() for s in a] == [s.ternary() for s in b]


def test_cover_count_examples():
    assert cover_count(5, 2) == 10
    assert cover_count(4, 1) == 2
    for n in range(1, 6):
        for d in range(n, n + 3):
            assert cover_count(n, d) == 2 ** n
    assert cover_count(3, -1) == 0
    assert cover_count(0, 2) == 1


def test_sparsity_bound_examples():
    assert sparsity_bound(5, 2) == 10
    for n in range(1, 7):
        for d in range(1, 6):
            assert sparsity_bound(n, d) <= 3 ** n
            if n <= d:
                assert sparsity_bound(n, d) == max(math.comb(n, k) * 2 ** (n - k) for k in range(n + 1))


@settings(max_examples=40, deadline=None)
@given(st.integers(1, 5), st.integers(2, 3), st.integers(0, 10_000))
def test_region_count_bounded_by_cover_count(n, d, seed):
    rng = np.random.default_rng(seed)
    X = rng.integers(-2, 3, size=(n, d)).astype(float)
    X[np.linalg.norm(X, axis=1) == 0] = 1.0
    S = enumerate_strata(X)
    assert len(full_regions(S)) <= cover_count(n, d)
    # the ternary patterns are what is counted; antipodal point pairs share one
    assert len({s.ternary() for s in S}) <= 3 ** n
