import pytest

from app.analytics.bounds import compute_cost_bound, disturbance_gain, ramp_relaxation_check
from app.errors import BoundUndefinedError, ConfigError
from app.grid.graph import CommGraph, build_complete, build_ring, check_condition
from app.grid.plant import ResourceParams

REFERENCE_COSTS = [0.4, 0.65, 0.45, 0.6, 0.5]


def test_disturbance_gain_for_reference_costs():
    assert 2 / sum(1 / a for a in REFERENCE_COSTS) == pytest.approx(0.201463, abs=1e-6)
    assert disturbance_gain(REFERENCE_COSTS) == pytest.approx(0.058537, abs=1e-6)


def test_equal_costs_have_zero_bound():
    bound = compute_cost_bound(build_ring(5), 0.1, [0.5] * 5, 0.001)
    assert bound.delta == pytest.approx(0.0, abs=1e-15)
    assert bound.c == pytest.approx(0.0, abs=1e-12)
    assert bound.bound == pytest.approx(0.0, abs=1e-15)


def test_bound_constant_on_a_complete_graph():
    graph = build_complete(5)
    report = check_condition(graph, 0.1, REFERENCE_COSTS)
    assert report.satisfied
    bound = compute_cost_bound(graph, 0.1, REFERENCE_COSTS, 0.001)
    assert bound.gamma == pytest.approx(report.gamma)
    assert bound.c == pytest.approx(0.058537 / (1 - report.gamma), rel=1e-4)
    assert bound.c == disturbance_gain(REFERENCE_COSTS) / (1 - bound.gamma)
    assert bound.bound == pytest.approx(bound.c * 0.001)


def test_bound_is_undefined_when_condition_fails():
    with pytest.raises(BoundUndefinedError, match="gamma"):
        compute_cost_bound(build_ring(5), 0.003, REFERENCE_COSTS, 0.001)


def test_bound_is_undefined_on_disconnected_graph():
    graph = CommGraph.from_edges(4, [(0, 1), (2, 3)])
    with pytest.raises(BoundUndefinedError):
        compute_cost_bound(graph, 0.1, [0.5] * 4, 0.001)


def test_ramp_check_with_zero_bound_constant():
    graph = build_ring(5)
    resources = [ResourceParams(a=0.5, ramp_r=0.01)] * 5
    bound = compute_cost_bound(graph, 0.1, [0.5] * 5, 0.001)
    rows = ramp_relaxation_check(bound, graph, 0.1, resources)
    for row in rows:
        assert row.lhs == pytest.approx(0.0002, abs=1e-15)
        assert row.margin == pytest.approx(0.0098, abs=1e-15)
        assert row.satisfied
        assert row.neighbors == 2


def test_ramp_check_zero_epsilon_leaves_full_margin():
    graph = build_complete(5)
    resources = [ResourceParams(a=a, ramp_r=0.02) for a in REFERENCE_COSTS]
    bound = compute_cost_bound(graph, 0.1, REFERENCE_COSTS, 0.0)
    rows = ramp_relaxation_check(bound, graph, 0.1, resources)
    assert all(row.satisfied and row.margin == 0.02 for row in rows)


def test_ramp_check_arithmetic_with_spread_costs():
    graph = build_complete(5)
    resources = [ResourceParams(a=a, ramp_r=0.001) for a in REFERENCE_COSTS]
    bound = compute_cost_bound(graph, 0.1, REFERENCE_COSTS, 0.001)
    rows = ramp_relaxation_check(bound, graph, 0.1, resources)
    expected = (2 * 0.1 * bound.c * 4 + 1 / 5) * 0.001
    for row in rows:
        assert row.neighbors == 4
        assert row.lhs == pytest.approx(expected, rel=1e-12)
        assert row.satisfied == (expected <= 0.001)


def test_zero_ramp_limit_is_a_construction_error():
    with pytest.raises(ConfigError, match="ramp_r"):
        ResourceParams(a=0.5, ramp_r=0.0)
