import numpy as np
import pytest

from app.control.distributed import InnovationMode
from app.errors import ConfigError
from app.sim.engine import (
    SimTrace,
    balance_residual,
    compare_controllers,
    dispatch_gap_series,
    freq_nadir,
    max_abs_freq,
    run_multi_area,
    run_scenario,
    settling_time,
    sweep_slot_len,
    tune_agc_gains,
)
from app.sim.loads import LoadProfile
from app.sim.scenario import AgcSpec, DistributedSpec
from tests.conftest import REFERENCE_COSTS, make_config


def _synthetic(freq, load=None, dt=1.0):
    freq = np.asarray(freq, dtype=float).reshape(-1, 1)
    t = np.arange(len(freq)) * dt
    load = np.zeros_like(freq) if load is None else np.asarray(load, dtype=float).reshape(-1, 1)
    zeros = np.zeros((len(freq), 1))
    return SimTrace(
        times=t, slot=np.arange(len(freq)), freq_dev=freq, load=load, tie_flow=zeros,
        mech_power=zeros, valve_pos=zeros, control=zeros, marginal_price=zeros,
        area_of=np.array([0]), slot_len=dt,
    )


# ------------------------------------------------------------------------------
# Métricas
# ------------------------------------------------------------------------------

def test_settling_time_is_first_sample_after_last_violation():
    trace = _synthetic([0.0, -0.003, -0.002, 0.0006, 0.0001, 0.0, 0.0], load=[0, 1, 1, 1, 1, 1, 1])
    assert settling_time(trace, 5e-4) == 4.0


def test_settling_time_without_violation_is_the_last_change():
    trace = _synthetic([0.0, 0.0001, 0.0], load=[0, 1, 1])
    assert settling_time(trace, 5e-4) == 1.0
    assert settling_time(_synthetic([0.0, 0.0, 0.0]), 5e-4) == 0.0


def test_settling_time_none_when_final_sample_violates():
    assert settling_time(_synthetic([0.0, -0.001, -0.001]), 5e-4) is None


def test_settling_time_ignores_violations_before_the_last_change():
    trace = _synthetic([0.0, -0.01, 0.0, 0.0, 0.0], load=[0, 1, 1, 2, 2])
    assert settling_time(trace, 5e-4) == 3.0


def test_nadir_and_max_abs():
    trace = _synthetic([0.0, -0.003, 0.002])
    assert freq_nadir(trace).tolist() == [-0.003]
    assert max_abs_freq(trace) == 0.003


# ------------------------------------------------------------------------------
# Corridas
# ------------------------------------------------------------------------------

def test_trace_shape_and_boundaries():
    config = make_config(horizon=12.0)
    trace = run_scenario(config)
    assert trace.n_areas == 1
    assert trace.n_resources == 5
    assert trace.times[0] == 0.0
    assert trace.times[-1] == pytest.approx(12.0)
    assert np.all(np.diff(trace.times) > 0)
    np.testing.assert_allclose(trace.times[trace.boundary_rows()], [0.0, 4.0, 8.0])


def test_runs_are_deterministic():
    config = make_config(horizon=20.0)
    a, b = run_scenario(config), run_scenario(config)
    np.testing.assert_array_equal(a.freq_dev, b.freq_dev)
    np.testing.assert_array_equal(a.control, b.control)


def test_failed_condition_is_a_warning_not_an_error():
    trace = run_scenario(make_config(horizon=8.0))
    assert any("gamma" in w for w in trace.warnings)


def test_oracle_innovation_balances_every_slot():
    config = make_config(
        controller=DistributedSpec(beta=0.05, innovation_mode=InnovationMode.ORACLE_LOAD),
        load=LoadProfile(kind="piecewise-constant-random", epsilon=0.001, period=4.0, seed=5),
        horizon=80.0,
    )
    trace = run_scenario(config)
    rows = trace.boundary_rows()
    np.testing.assert_allclose(trace.control[rows].sum(axis=1), trace.load[rows, 0], atol=1e-12)


def test_distributed_step_response_restores_frequency():
    trace = run_scenario(make_config(horizon=40.0))
    assert abs(trace.freq_dev[-1, 0]) < 5e-4
    res = balance_residual(trace)
    assert abs(res["control"][0]) < 1e-4
    assert abs(res["mech_power"][0]) < 1e-4


def test_agc_holds_integral_and_restores_frequency():
    config = make_config(controller=AgcSpec(kp=0.05, ki=0.06), slot_len=0.4, horizon=120.0)
    trace = run_scenario(config)
    assert abs(trace.freq_dev[-1, 0]) < 5e-4
    # participación uniforme: todos los recursos reciben lo mismo
    np.testing.assert_allclose(trace.control[-1], trace.control[-1, 0])


def test_ramp_limits_clip_control_changes():
    config = make_config(horizon=20.0, enforce_ramping=True, ramp_r=0.0005)
    trace = run_scenario(config)
    rows = trace.boundary_rows()
    steps = np.abs(np.diff(trace.control[rows], axis=0))
    assert np.all(steps <= 0.0005 + 1e-15)
    assert np.all(np.abs(trace.control[rows[0]]) <= 0.0005 + 1e-15)


def test_clipped_controls_report_their_own_marginal_price():
    config = make_config(horizon=20.0, enforce_ramping=True, ramp_r=0.0005)
    trace = run_scenario(config)
    rows = trace.boundary_rows()
    steps = np.abs(np.diff(np.vstack([np.zeros(5), trace.control[rows]]), axis=0))
    assert np.any(np.isclose(steps, 0.0005, rtol=1e-12, atol=0))
    np.testing.assert_allclose(
        trace.marginal_price[rows], 2 * np.array(REFERENCE_COSTS) * trace.control[rows], rtol=1e-14, atol=0
    )


def test_ideal_resources_follow_controls():
    config = make_config(ideal=True, horizon=8.0)
    trace = run_scenario(config)
    np.testing.assert_array_equal(trace.mech_power, trace.control)


def test_dispatch_gap_series_has_one_point_per_slot():
    config = make_config(horizon=12.0)
    gaps = dispatch_gap_series(run_scenario(config), REFERENCE_COSTS)
    assert [g.time for g in gaps] == [0.0, 4.0, 8.0]
    assert all(g.relative_error is not None for g in gaps)


def test_multi_area_requires_two_areas():
    with pytest.raises(ConfigError, match="al menos 2"):
        run_multi_area(make_config())


# ------------------------------------------------------------------------------
# Comparaciones y barridos
# ------------------------------------------------------------------------------

def test_compare_rejects_different_plants():
    a = make_config()
    b = make_config(costs=(0.5,) * 5, controller=AgcSpec(kp=0.05, ki=0.06), slot_len=0.4)
    with pytest.raises(ConfigError, match="misma planta"):
        compare_controllers(a, b)


def test_compare_reports_both_controllers():
    a = make_config(horizon=40.0)
    b = make_config(controller=AgcSpec(kp=0.05, ki=0.06), slot_len=0.4, horizon=40.0)
    report = compare_controllers(a, b)
    assert report.summaries[0].slot_len == 4.0
    assert report.summaries[1].slot_len == 0.4
    assert len(report.gaps[0]) == 10
    assert len(report.gaps[1]) == 100


def test_sweep_returns_one_value_per_slot_length():
    rows = sweep_slot_len(make_config(horizon=40.0), [2.0, 4.0])
    assert [dt for dt, _ in rows] == [2.0, 4.0]


def test_sweep_rounds_horizon_up_to_a_multiple():
    config = make_config(horizon=40.0).with_slot_len(3.0)
    assert config.horizon == pytest.approx(42.0)
    assert config.n_slots == 14


def test_tune_agc_requires_agc_scenario():
    with pytest.raises(ConfigError, match="agc"):
        tune_agc_gains(make_config(), [0.1], [0.1])


def test_tune_agc_picks_a_grid_point():
    config = make_config(controller=AgcSpec(kp=0.05, ki=0.06), slot_len=0.4, horizon=60.0)
    kp, ki, t = tune_agc_gains(config, [0.02, 0.05], [0.06])
    assert kp in (0.02, 0.05)
    assert ki == 0.06
    if t is not None:
        assert t > 0
