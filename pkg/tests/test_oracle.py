import math
from itertools import combinations

import numpy as np
import pytest

from ergmee import (
    ExactDistribution,
    Graph,
    MleDoesNotExistError,
    ModelSpec,
    Term,
    exact_expectations,
    exact_mle,
    full_statistics,
)

EDGE_SPEC = ModelSpec((Term.edge(),))


def test_distribution_normalizes():
    spec = ModelSpec((Term.edge(), Term.alt_triangle(2.0)))
    dist = ExactDistribution(spec, None, np.array([-0.5, 0.3]), 5)
    assert dist.probs.sum() == pytest.approx(1.0, abs=1e-12)


def test_expected_edges_theta_zero():
    assert exact_expectations(EDGE_SPEC, None, np.array([0.0]), 3)[0] == pytest.approx(1.5)


def test_expected_edges_theta_log_half():
    # independent dyads with p = 1/3, three dyads
    val = exact_expectations(EDGE_SPEC, None, np.array([math.log(0.5)]), 3)[0]
    assert val == pytest.approx(1.0, abs=1e-12)


def test_second_enumeration_ordering_agrees():
    """Re-enumerate by explicit edge subsets instead of bitmask order."""
    spec = ModelSpec((Term.edge(), Term.alt_triangle(2.0)))
    theta = np.array([-0.5, 0.3])
    n = 5
    dyads = list(combinations(range(n), 2))
    weights = []
    stats = []
    for k in range(len(dyads) + 1):
        for subset in combinations(dyads, k):
            g = Graph.from_edges(n, list(subset))
            z = full_statistics(g, None, spec)
            stats.append(z)
            weights.append(float(theta @ z))
    w = np.exp(np.array(weights) - max(weights))
    w /= w.sum()
    expect2 = w @ np.array(stats)
    expect1 = exact_expectations(spec, None, theta, n)
    assert np.allclose(expect1, expect2, atol=1e-10)


def test_expectation_monotone_in_own_parameter():
    spec = ModelSpec((Term.edge(), Term.alt_star(2.0)))
    grid = [-1.0, 0.0, 1.0]
    for idx in range(2):
        values = []
        for v in grid:
            theta = np.zeros(2)
            theta[idx] = v
            values.append(exact_expectations(spec, None, theta, 5)[idx])
        assert values[0] < values[1] < values[2]


def test_rejects_large_n():
    with pytest.raises(ValueError):
        exact_expectations(EDGE_SPEC, None, np.array([0.0]), 7)


def test_mle_single_edge_logit():
    g = Graph.from_edges(3, [(0, 1)])
    theta = exact_mle(EDGE_SPEC, None, g)
    assert theta[0] == pytest.approx(math.log(0.5), abs=1e-8)


def test_mle_does_not_exist_on_boundary():
    with pytest.raises(MleDoesNotExistError):
        exact_mle(EDGE_SPEC, None, Graph(3))
    with pytest.raises(MleDoesNotExistError):
        exact_mle(EDGE_SPEC, None, Graph.complete(4))


def test_mle_round_trip_fixed_point():
    # one isolate (node 4), strictly inside the achievable range [0, 5]
    spec = ModelSpec((Term.edge(), Term.isolates()))
    g = Graph.from_edges(5, [(0, 1), (1, 2), (2, 3)])
    theta = exact_mle(spec, None, g)
    z_obs = full_statistics(g, None, spec)
    back = exact_expectations(spec, None, theta, 5)
    assert np.allclose(back, z_obs, atol=1e-7)


def test_mle_rejects_boundary_isolate_count():
    # all nodes tied somewhere: isolate count 0 is the achievable minimum
    spec = ModelSpec((Term.edge(), Term.isolates()))
    g = Graph.from_edges(5, [(0, 1), (1, 2), (3, 4)])
    with pytest.raises(MleDoesNotExistError):
        exact_mle(spec, None, g)


def test_mle_matches_independent_dyad_closed_form():
    # 6-node graph with 9 of 15 edges: logit(9/15)
    edges = [(0, 1), (0, 2), (0, 3), (1, 2), (1, 4), (2, 5), (3, 4), (3, 5), (4, 5)]
    g = Graph.from_edges(6, edges)
    theta = exact_mle(EDGE_SPEC, None, g)
    assert theta[0] == pytest.approx(math.log(9 / 6), abs=1e-8)


def test_covariance_positive_definite_at_zero():
    spec = ModelSpec((Term.edge(), Term.alt_two_path(2.0)))
    dist = ExactDistribution(spec, None, np.zeros(2), 4)
    eig = np.linalg.eigvalsh(dist.covariance())
    assert eig[0] > 0
