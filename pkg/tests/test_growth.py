"""Resource growth: geometry, cost accounting, fusion, and error profiles."""

import math

import networkx as nx
import numpy as np
import pytest
from scipy import stats as sps

from heraldtpc.growth import (
    BudgetExceededError,
    DivergentCostError,
    EOModel,
    GrowthStrategy,
    build_plan,
    estimate_error_profile,
    expected_cost,
    fuse_and_prune_node,
    grow_resource,
    node_marginal_evaluator,
    required_resource_size,
    resource_graph,
    resource_size,
    sample_fusion_structure,
)

KINDS = ("star", "cross", "snowflake")


# -- validation -------------------------------------------------------------

def test_model_and_strategy_validation():
    with pytest.raises(ValueError):
        EOModel(p_h=1.2)
    with pytest.raises(ValueError):
        EOModel(p_h=0.5, p_G=-0.1)
    with pytest.raises(ValueError):
        GrowthStrategy("star", 0)
    with pytest.raises(ValueError):
        GrowthStrategy("pentagon", 2)
    assert EOModel(p_h=0.3).p_s == pytest.approx(0.7)


def test_resource_sizes():
    assert resource_size(GrowthStrategy("star", 3)) == 24
    assert resource_size(GrowthStrategy("cross", 3)) == 14
    assert resource_size(GrowthStrategy("snowflake", 3)) == 25


# -- deterministic growth at p_h = 0 ----------------------------------------

def test_zero_failure_growth_is_exact():
    rng = np.random.default_rng(0)
    m = EOModel(p_h=0.0)
    for kind in KINDS:
        for n in (1, 2, 4):
            s = GrowthStrategy(kind, n)
            graph, st = grow_resource(s, m, rng)
            assert st.total_raw_qubits_consumed == resource_size(s)
            assert st.abandonments == 0
            assert st.completed_resource_size == resource_size(s)
            mult = nx.get_node_attributes(graph, "multiplicity")
            assert sum(mult.values()) == resource_size(s)


def test_growth_rounds_log_in_size():
    # a star whose raw size is 2^k completes in exactly k doubling rounds
    for n, k in ((1, 3), (2, 4), (4, 5), (8, 6)):
        s = GrowthStrategy("star", n)
        assert build_plan(s).rounds == k


def test_expected_cost_equals_size_at_zero_failure():
    for kind in KINDS:
        for n in (1, 2, 8):
            s = GrowthStrategy(kind, n)
            assert expected_cost(s, 0.0) == pytest.approx(resource_size(s))


def test_cost_diverges_at_certain_failure():
    with pytest.raises(DivergentCostError):
        expected_cost(GrowthStrategy("star", 2), 1.0)
    with pytest.raises(DivergentCostError):
        grow_resource(GrowthStrategy("star", 2), EOModel(1.0), np.random.default_rng(0))


def test_budget_abort():
    s = GrowthStrategy("snowflake", 8)
    m = EOModel(p_h=0.9)
    rng = np.random.default_rng(1)
    with pytest.raises(BudgetExceededError):
        grow_resource(s, m, rng, max_raw_qubits=100)


# -- geometry ----------------------------------------------------------------

def test_completed_graph_isomorphic_to_plan():
    rng = np.random.default_rng(2)
    for kind in KINDS:
        s = GrowthStrategy(kind, 2)
        target = resource_graph(build_plan(s))
        for p_h in (0.0, 0.6):
            graph, _ = grow_resource(s, EOModel(p_h), rng)
            assert nx.is_isomorphic(graph, target)
            assert nx.is_connected(graph)


def test_star_graph_shape():
    g = resource_graph(build_plan(GrowthStrategy("star", 3)))
    degrees = sorted(d for _, d in g.degree())
    # one high-degree center, pendants and leaves around it
    assert degrees[-1] == g.number_of_nodes() - sum(1 for d in degrees if d > 1)


# -- Monte Carlo cost vs analytic recursion ----------------------------------

def _cost_z_score(s, p_h, runs, rng):
    m = EOModel(p_h)
    costs = np.array(
        [grow_resource(s, m, rng)[1].total_raw_qubits_consumed for _ in range(runs)],
        dtype=float,
    )
    mean = expected_cost(s, p_h)
    se = costs.std(ddof=1) / math.sqrt(runs)
    if se == 0:
        return 0.0 if costs.mean() == mean else math.inf
    return (costs.mean() - mean) / se


def test_star_cost_matches_recursion_10k_runs():
    rng = np.random.default_rng(3)
    z = _cost_z_score(GrowthStrategy("star", 1), 0.5, 10_000, rng)
    assert abs(z) < 3


@pytest.mark.parametrize("p_h", [0.0, 0.25, 0.5, 0.75, 0.9])
def test_cost_grid_matches_recursion(p_h):
    rng = np.random.default_rng(4)
    cases = [
        ("star", 1), ("star", 4), ("star", 8),
        ("cross", 1), ("cross", 8),
        ("snowflake", 1), ("snowflake", 4),
    ]
    for kind, n in cases:
        s = GrowthStrategy(kind, n)
        if resource_size(s) > 64:
            continue
        z = _cost_z_score(s, p_h, 1500, rng)
        assert abs(z) < 3, (kind, n, p_h, z)


# -- fusion ------------------------------------------------------------------

def test_all_attempts_fail_at_certain_failure():
    res = build_plan(GrowthStrategy("star", 2))
    nbrs = [build_plan(GrowthStrategy("star", 2)) for _ in range(4)]
    statuses, record = fuse_and_prune_node(
        res, nbrs, EOModel(1.0), np.random.default_rng(5)
    )
    assert statuses == [False] * 4


def test_perfect_fusion_bonds_all_with_empty_record():
    res = build_plan(GrowthStrategy("star", 1))
    nbrs = [build_plan(GrowthStrategy("star", 1)) for _ in range(4)]
    statuses, record = fuse_and_prune_node(
        res, nbrs, EOModel(0.0), np.random.default_rng(6)
    )
    assert statuses == [True] * 4
    assert record.weight() == 0


def test_bond_missing_probability_is_geometric_tail():
    rng = np.random.default_rng(7)
    for p_h in (0.5, 0.9):
        for n in (1, 4, 16):
            draws = 50_000
            misses = 0
            for _ in range(draws):
                for fails, bonded in sample_fusion_structure(n, p_h, rng):
                    misses += not bonded
            p = p_h**n
            total = 4 * draws
            sigma = math.sqrt(p * (1 - p) / total)
            assert abs(misses / total - p) < 3 * sigma + 3 / total, (p_h, n)


def test_attempt_counts_follow_truncated_geometric():
    rng = np.random.default_rng(8)
    n, p_h = 4, 0.5
    draws = 5_000
    # tally: k failures then success (k < n), or k = n all-failed
    counts = np.zeros(n + 1)
    for _ in range(draws):
        for fails, bonded in sample_fusion_structure(n, p_h, rng):
            counts[fails] += 1
    probs = np.array([(1 - p_h) * p_h**k for k in range(n)] + [p_h**n])
    chi2, pval = sps.chisquare(counts, probs * counts.sum())
    assert pval > 1e-3


# -- sizing ------------------------------------------------------------------

def test_required_size_examples():
    n, _, _ = required_resource_size("snowflake", 0.9, 0.01)
    assert n == 44
    assert 0.9**4 == pytest.approx(0.6561)
    n, _, _ = required_resource_size("star", 0.0, 0.01)
    assert n == 1
    with pytest.raises(ValueError):
        required_resource_size("star", 0.9, 1.0)


def test_high_failure_rate_needs_huge_resources():
    n, _, total = required_resource_size("snowflake", 0.98, 0.01)
    assert total > 1000


# -- error profiles ----------------------------------------------------------

def test_zero_rates_give_exactly_zero_profile():
    s = GrowthStrategy("cross", 2)
    m = EOModel(p_h=0.5, p_G=0.0, p_M=0.0)
    prof = estimate_error_profile(s, m, 300, np.random.default_rng(9))
    assert prof.p_x == 0.0
    assert prof.p_z == 0.0
    assert prof.p_corr_same_sublattice == 0.0
    assert prof.p_corr_cross_sublattice == 0.0


def test_single_fault_star_marginal_bounds():
    # with p_s = 1 the patch circuit is fixed; at tiny p_G the node error
    # is linear, at least one fault location away and at most one per location
    s = GrowthStrategy("star", 1)
    f = node_marginal_evaluator(s, 0.0, 1, np.random.default_rng(10))
    p_g = 1e-5
    px, pz = f(p_g)
    total = px + pz
    from heraldtpc.circuits import fault_locations
    from heraldtpc.growth import build_patch

    circ, _, _ = build_patch(
        build_plan(s),
        [build_plan(s) for _ in range(4)],
        EOModel(0.0, p_g, 0.0),
        tuple((0, True) for _ in range(4)),
    )
    c = len(fault_locations(circ))
    assert p_g <= total <= c * p_g


def test_marginals_monotone_in_gate_error():
    s = GrowthStrategy("snowflake", 2)
    f = node_marginal_evaluator(s, 0.5, 6, np.random.default_rng(11))
    grid = [1e-4, 1e-3, 1e-2]
    vals = [sum(f(p)) for p in grid]
    assert vals[0] < vals[1] < vals[2]


def test_profile_monotone_in_gate_error_with_ci_separation():
    s = GrowthStrategy("star", 2)
    rng = np.random.default_rng(12)
    highs, lows = [], []
    for p_g in (1e-3, 1e-2, 5e-2):
        prof = estimate_error_profile(s, EOModel(0.5, p_g, 0.0), 3000, rng)
        lo, hi = prof.intervals["p_z"]
        lows.append(lo)
        highs.append(hi)
    assert highs[0] < lows[1]
    assert highs[1] < lows[2]


def test_profile_bond_missing_tracks_formula():
    s = GrowthStrategy("star", 4)
    prof = estimate_error_profile(
        s, EOModel(0.5, 0.0, 0.0), 4000, np.random.default_rng(13)
    )
    p = 0.5**4
    sigma = math.sqrt(p * (1 - p) / (4 * 4000))
    assert abs(prof.bond_missing_prob - p) < 3 * sigma
