import math

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from oracles import cut_norm_brute, reduced_sum_loops
from uppertail.constructions import clique_construction
from uppertail.errors import DomainError
from uppertail.graphs import WeightedGraph, total_relative_entropy, triangle_density
from uppertail.regularity import (
    VertexPartition,
    blowup_graph,
    max_cut_deviation,
    part_bound,
    partition_event_bound,
    partition_of,
    reduced_density_error,
    reduced_triangle_sum,
    weak_regular_partition,
)


def random_graph(n, gen, weighted=False):
    if weighted:
        v = gen.random((n, n))
    else:
        v = (gen.random((n, n)) < gen.uniform(0.1, 0.9)).astype(float)
    w = np.triu(v, 1)
    return WeightedGraph(w + w.T)


def two_cliques(n):
    w = np.zeros((n, n))
    h = n // 2
    w[:h, :h] = 1
    w[h:, h:] = 1
    np.fill_diagonal(w, 0)
    return WeightedGraph(w)


def test_constant_graph_single_part():
    n = 15
    G = WeightedGraph(0.3 * (np.ones((n, n)) - np.eye(n)))
    P = weak_regular_partition(G, 0.3)
    assert len(P.parts) == 1
    assert reduced_density_error(G, partition_of(G, [range(n)])) <= 3 * 0.3


def test_two_cliques():
    n = 16
    G = two_cliques(n)
    P = weak_regular_partition(G, 0.3)
    value, _ = max_cut_deviation(G, P, exact=True)
    assert value <= 0.3 * n * n
    assert reduced_density_error(G, P) <= 0.9


def test_exact_cut_matches_brute_force():
    gen = np.random.default_rng(3)
    for _ in range(10):
        n = int(gen.integers(3, 9))
        G = random_graph(n, gen, weighted=True)
        P = partition_of(G, [range(n)])
        W = G.weights
        D = W - P.densities[0, 0]
        np.fill_diagonal(D, -P.densities[0, 0])
        value, (s, t) = max_cut_deviation(G, P, exact=True)
        assert value == pytest.approx(cut_norm_brute(D), rel=1e-12, abs=1e-12)
        assert abs(s @ D @ t) == pytest.approx(value, rel=1e-12, abs=1e-12)


def test_heuristic_never_exceeds_exact():
    gen = np.random.default_rng(5)
    for _ in range(10):
        G = random_graph(14, gen)
        P = partition_of(G, [range(7), range(7, 14)])
        exact, _ = max_cut_deviation(G, P, exact=True)
        heur, _ = max_cut_deviation(G, P, exact=False)
        assert heur <= exact + 1e-9


def test_counting_suite():
    gen = np.random.default_rng(11)
    worst = 0.0
    for i in range(50):
        n = int(gen.integers(10, 61))
        eps = (0.3, 0.4)[i % 2]
        G = random_graph(n, gen, weighted=bool(i % 3 == 0))
        P = weak_regular_partition(G, eps, seed=i)
        assert len(P.parts) <= part_bound(eps)
        err = reduced_density_error(G, P)
        assert err <= 3 * eps
        worst = max(worst, err / eps)
    assert worst < 3


def test_gnp50_example():
    gen = np.random.default_rng(0)
    G = random_graph(50, gen)
    P = weak_regular_partition(G, 0.4)
    assert len(P.parts) <= min(part_bound(0.4), 4 ** math.ceil(1 / 0.16))
    assert reduced_density_error(G, P) < 1.2


def test_discrete_partition_is_exact():
    gen = np.random.default_rng(2)
    for n in (5, 12, 30):
        G = random_graph(n, gen, weighted=True)
        P = partition_of(G, [[v] for v in range(n)])
        assert reduced_density_error(G, P) == 0.0 or reduced_density_error(G, P) <= 1e-15


def test_reduced_sum_against_loops():
    gen = np.random.default_rng(4)
    G = random_graph(9, gen, weighted=True)
    P = partition_of(G, [[0, 3, 5], [1, 2], [4, 6, 7, 8]])
    assert reduced_triangle_sum(P) == pytest.approx(reduced_sum_loops(P.sizes, P.densities, 9), rel=1e-13)


def test_rounding_changes_sum_by_at_most_3eps():
    gen = np.random.default_rng(6)
    for eps in (0.25, 0.3, 0.4):
        for _ in range(20):
            G = random_graph(int(gen.integers(6, 30)), gen, weighted=True)
            P = weak_regular_partition(G, eps) if G.n < 15 else partition_of(G, np.array_split(np.arange(G.n), 4))
            r = P.rounded_densities(eps)
            assert np.all(r <= P.densities + 1e-12)
            assert np.all(P.densities - r < eps + 1e-12)
            assert abs(reduced_triangle_sum(P) - reduced_triangle_sum(P, r)) <= 3 * eps


def test_rounding_keeps_exact_grid_points():
    P = VertexPartition(2, ((0,), (1,)), np.array([[0.0, 0.6], [0.6, 0.0]]))
    assert P.rounded_densities(0.3)[0, 1] == pytest.approx(0.6)
    P = VertexPartition(2, ((0,), (1,)), np.array([[0.0, 0.59], [0.59, 0.0]]))
    assert P.rounded_densities(0.3)[0, 1] == pytest.approx(0.3)


def test_partition_validation_and_json():
    with pytest.raises(DomainError):
        VertexPartition(3, ((0,), (1,)), np.zeros((2, 2)))
    with pytest.raises(DomainError):
        VertexPartition(3, ((0, 1), (1, 2)), np.zeros((2, 2)))
    with pytest.raises(DomainError):
        VertexPartition(2, ((0,), (1,)), np.zeros((3, 3)))
    with pytest.raises(DomainError):
        weak_regular_partition(two_cliques(8), 0.2)
    G = random_graph(10, np.random.default_rng(1), weighted=True)
    P = partition_of(G, [[0, 4, 9], [1, 2, 3], [5, 6, 7, 8]])
    Q = VertexPartition.from_json(P.to_json())
    assert Q.parts == P.parts and np.array_equal(Q.densities, P.densities)


def test_event_bound_examples():
    P = partition_of(two_cliques(10), [range(5), range(5, 10)])
    zero = partition_event_bound(P, np.full((2, 2), 0.1), 0.2)
    assert zero.exponent == 0.0 and zero.consistent
    # one planted clique of size a with the rest at p equals the clique construction entropy
    n, p = 20, 0.3
    r = clique_construction(n, p, 1.0)
    a = r.size_parameter
    Q = partition_of(r.graph, [range(a), range(a, n)])
    d = np.array([[1.0, p], [p, p]])
    b = partition_event_bound(Q, d, p)
    assert -b.exponent == pytest.approx(math.comb(a, 2) * math.log(1 / p), rel=1e-12)
    assert -b.exponent == pytest.approx(r.objective, rel=1e-12)
    with pytest.raises(DomainError):
        partition_event_bound(P, np.zeros((3, 3)), 0.2)


@given(seed=st.integers(0, 10 ** 6), p=st.floats(0.05, 0.9))
@settings(max_examples=50, deadline=None)
def test_event_bound_blowup_identity(seed, p):
    gen = np.random.default_rng(seed)
    n = int(gen.integers(4, 25))
    m = int(gen.integers(1, min(n, 5) + 1))
    P = partition_of(random_graph(n, gen), np.array_split(gen.permutation(n), m))
    v = gen.random((m, m))
    d = np.triu(v) + np.triu(v, 1).T
    b = partition_event_bound(P, d, p)
    G = blowup_graph(P, d, p)
    assert -b.exponent == pytest.approx(total_relative_entropy(G, p), rel=1e-9, abs=1e-12)
    assert b.consistent
    assert b.blowup_triangle_density == pytest.approx(triangle_density(G), rel=1e-12)
