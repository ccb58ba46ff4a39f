import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from app.control.distributed import (
    DistributedControllerState,
    InnovationMode,
    consensus_innovation_step,
    control_law_matrix_form,
    estimate_innovation,
    innovation_potential,
    pi_equivalent_gains,
)
from app.errors import ConfigError, DimensionError
from app.grid.graph import build_complete, build_ring, check_condition
from app.grid.plant import AreaParams, ResourceParams

REFERENCE_COSTS = np.array([0.4, 0.65, 0.45, 0.6, 0.5])

floats = st.floats(min_value=-0.01, max_value=0.01, allow_nan=False, allow_infinity=False)


def _ctrl(graph=None, beta=0.003, pm=None, costs=REFERENCE_COSTS):
    graph = graph or build_ring(len(costs))
    pm = np.zeros(len(costs)) if pm is None else np.asarray(pm)
    return DistributedControllerState.initial(graph, beta, InnovationMode.ORACLE_LOAD, costs, pm)


def test_initial_state_anchors_to_mechanical_power():
    ctrl = _ctrl(pm=[0.001, 0.002, 0.0, 0.0, 0.001])
    np.testing.assert_allclose(ctrl.lambda_, 2 * REFERENCE_COSTS * np.array([0.001, 0.002, 0.0, 0.0, 0.001]))
    assert _ctrl().lambda_.tolist() == [0.0] * 5


def test_beta_must_be_positive():
    with pytest.raises(ConfigError, match="beta must be > 0"):
        DistributedControllerState.initial(build_ring(5), 0.0)


def test_step_with_equal_prices_only_applies_innovation():
    costs = np.full(4, 0.5)
    pm = np.full(4, 0.001)
    ctrl = _ctrl(build_ring(4), pm=pm, costs=costs)
    u, lam_tilde = consensus_innovation_step(ctrl, costs, pm, 0.004)
    np.testing.assert_allclose(u, pm + 0.001)
    np.testing.assert_allclose(lam_tilde, 2 * costs * u)


def test_step_accepts_resource_params():
    resources = [ResourceParams(a=a) for a in REFERENCE_COSTS]
    ctrl = _ctrl()
    u_params, _ = consensus_innovation_step(ctrl, resources, np.zeros(5), 0.005)
    u_vector, _ = consensus_innovation_step(ctrl, REFERENCE_COSTS, np.zeros(5), 0.005)
    np.testing.assert_array_equal(u_params, u_vector)


def test_step_rejects_dimension_mismatch():
    with pytest.raises(DimensionError):
        consensus_innovation_step(_ctrl(), REFERENCE_COSTS[:4], np.zeros(4), 0.0)


@settings(max_examples=200, deadline=None)
@given(st.lists(floats, min_size=5, max_size=5), floats)
def test_total_control_equals_mechanical_power_plus_innovation(pm, innovation):
    pm = np.array(pm)
    ctrl = _ctrl(beta=0.05, pm=pm)
    u, _ = consensus_innovation_step(ctrl, REFERENCE_COSTS, pm, innovation)
    assert u.sum() == pytest.approx(pm.sum() + innovation, abs=1e-15)


@settings(max_examples=100, deadline=None)
@given(st.lists(floats, min_size=5, max_size=5), floats)
def test_matrix_form_matches_per_resource_update(pm, load_next):
    pm = np.array(pm)
    graph = build_complete(5)
    ctrl = _ctrl(graph, beta=0.05, pm=pm)
    u, _ = consensus_innovation_step(ctrl, REFERENCE_COSTS, pm, load_next - pm.sum())
    np.testing.assert_allclose(control_law_matrix_form(graph, 0.05, REFERENCE_COSTS, pm, load_next), u, atol=1e-15)


def test_consensus_reduces_price_disagreement():
    pm = np.array([0.004, 0.0, 0.0, 0.0, 0.001])
    ctrl = _ctrl(build_complete(5), beta=0.05, pm=pm)
    _, lam_tilde = consensus_innovation_step(ctrl, REFERENCE_COSTS, pm, 0.0)
    assert np.ptp(lam_tilde) < np.ptp(ctrl.lambda_)


def test_estimate_innovation_is_exact_for_a_linear_swing():
    area = AreaParams(inertia_H=0.0833, damping_D=0.0084)
    load, pm_sum, tie, f_now, dt = 0.005, 0.002, 0.0003, -0.001, 0.4
    slope = (-area.damping_D * f_now + pm_sum - load - tie) / (2 * area.inertia_H)
    f_next = f_now + slope * dt
    assert estimate_innovation(area, f_now, f_next, tie, dt) == pytest.approx(load - pm_sum, abs=1e-15)


def test_estimate_innovation_rejects_bad_slot():
    with pytest.raises(ConfigError):
        estimate_innovation(AreaParams(0.1, 0.01), 0.0, 0.0, 0.0, 0.0)


def test_innovation_potential_splits_the_estimate_by_cost():
    area = AreaParams(inertia_H=0.0833, damping_D=0.0084)
    pot = innovation_potential(REFERENCE_COSTS, area, -0.001, -0.0015, 4.0)
    est = estimate_innovation(area, -0.001, -0.0015, 0.0, 4.0)
    np.testing.assert_allclose(pot, 2 * REFERENCE_COSTS / 5 * est, rtol=1e-12)


def test_pi_equivalent_gains():
    area = AreaParams(inertia_H=0.0833, damping_D=0.0084)
    rows = pi_equivalent_gains([ResourceParams(a=0.5, T_g=0.05, T_t=0.4)] * 5, area, 4.0)
    assert rows[0].T_u == pytest.approx(4.45)
    assert rows[0].proportional_gain == pytest.approx(2 * 0.0833 / (5 * 4.45))
    assert rows[0].integral_gain == pytest.approx(0.0084 / (5 * 4.45))


@settings(max_examples=100, deadline=None)
@given(st.permutations(range(5)), st.lists(floats, min_size=5, max_size=5), floats)
def test_step_is_equivariant_under_node_relabeling(perm, pm, innovation):
    perm = np.array(perm)
    pm = np.array(pm)
    graph = build_ring(5)
    u, lam_tilde = consensus_innovation_step(_ctrl(graph, beta=0.05, pm=pm), REFERENCE_COSTS, pm, innovation)

    costs_p, pm_p = np.empty(5), np.empty(5)
    costs_p[perm] = REFERENCE_COSTS
    pm_p[perm] = pm
    ctrl_p = _ctrl(graph.relabel(perm.tolist()), beta=0.05, pm=pm_p, costs=costs_p)
    u_p, lam_tilde_p = consensus_innovation_step(ctrl_p, costs_p, pm_p, innovation)

    np.testing.assert_allclose(u_p[perm], u, rtol=1e-12, atol=1e-15)
    np.testing.assert_allclose(lam_tilde_p[perm], lam_tilde, rtol=1e-12, atol=1e-15)


@pytest.mark.parametrize("order", [range(5), range(4, -1, -1)])
def test_every_price_is_computed_from_the_same_snapshot(order):
    pm = np.array([0.004, -0.001, 0.0, 0.002, 0.001])
    graph = build_ring(5)
    ctrl = _ctrl(graph, beta=0.05, pm=pm)
    _, lam_tilde = consensus_innovation_step(ctrl, REFERENCE_COSTS, pm, 0.003)

    snapshot = ctrl.lambda_.copy()
    by_hand = np.empty(5)
    for i in order:
        diff = sum(snapshot[i] - snapshot[l] for l in graph.neighbors(i))
        a = REFERENCE_COSTS[i]
        by_hand[i] = snapshot[i] - 2 * a * 0.05 * diff + 2 * a / 5 * 0.003
    np.testing.assert_allclose(lam_tilde, by_hand, rtol=1e-12, atol=1e-15)
    # la foto no se modifica durante el paso
    np.testing.assert_array_equal(ctrl.lambda_, snapshot)


@settings(max_examples=200, deadline=None)
@given(st.lists(floats, min_size=5, max_size=5))
def test_consensus_contracts_disagreement_by_gamma(pm):
    graph = build_complete(5)
    report = check_condition(graph, 0.1, REFERENCE_COSTS)
    assert report.satisfied
    ctrl = _ctrl(graph, beta=0.1, pm=np.array(pm))
    _, lam_tilde = consensus_innovation_step(ctrl, REFERENCE_COSTS, np.array(pm), 0.0)

    scale = np.sqrt(2 * REFERENCE_COSTS)
    direction = (1 / scale) / np.linalg.norm(1 / scale)

    def disagreement(lam):
        w = lam / scale
        return np.linalg.norm(w - direction * (direction @ w))

    assert disagreement(lam_tilde) <= report.gamma * disagreement(ctrl.lambda_) + 1e-15
