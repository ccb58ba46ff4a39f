import numpy as np
import pytest

from app.control.agc import (
    AgcControllerState,
    agc_step,
    area_control_error,
    frequency_bias,
    participation_factors,
    uniform_participation,
)
from app.errors import ConfigError
from app.grid.plant import AreaParams, ResourceParams


def test_participation_factors_are_inverse_cost_weights():
    alpha = participation_factors([0.4, 0.65, 0.45, 0.6, 0.5])
    assert alpha.sum() == pytest.approx(1.0)
    assert alpha[0] > alpha[4] > alpha[1]
    np.testing.assert_allclose(alpha * np.array([0.4, 0.65, 0.45, 0.6, 0.5]), 1 / np.sum(1 / np.array([0.4, 0.65, 0.45, 0.6, 0.5])))


def test_uniform_participation():
    np.testing.assert_array_equal(uniform_participation(4), [0.25] * 4)


def test_invalid_participation_is_rejected():
    with pytest.raises(ConfigError, match="sum to 1"):
        AgcControllerState(kp=0.1, ki=0.1, alpha=np.array([0.5, 0.6]))
    with pytest.raises(ConfigError):
        AgcControllerState(kp=0.1, ki=0.1, alpha=np.array([1.5, -0.5]))


def test_frequency_bias_adds_droops_to_damping():
    area = AreaParams(inertia_H=0.0833, damping_D=0.0084)
    bias = frequency_bias(area, [ResourceParams(a=1.0, droop_R=2.0), ResourceParams(a=1.0, droop_R=2.5)])
    assert bias == pytest.approx(0.0084 + 0.5 + 0.4)


def test_ace_combines_tie_and_frequency():
    ace = area_control_error(1, -0.002, -0.001, 0.0005, 2.0)
    assert ace.value == pytest.approx(0.0005 - 0.004)
    assert ace.area_id == 1


def test_non_finite_ace_is_rejected():
    with pytest.raises(ConfigError):
        area_control_error(0, float("nan"), 0.0, 0.0, 1.0)


def test_zero_ace_keeps_command_and_integral():
    ctrl = AgcControllerState(kp=0.3, ki=0.2, alpha=uniform_participation(2), integral_acc=0.0)
    u, new = agc_step(ctrl, area_control_error(0, 0.0, 0.0, 0.0, 1.0), 4.0)
    np.testing.assert_array_equal(u, [0.0, 0.0])
    assert new.integral_acc == 0.0


def test_integral_accumulates_before_command():
    ctrl = AgcControllerState(kp=0.0, ki=1.0, alpha=uniform_participation(2))
    ace = area_control_error(0, 1.0, 1.0, 0.0, 1.0)
    u1, ctrl = agc_step(ctrl, ace, 1.0)
    u2, ctrl = agc_step(ctrl, ace, 1.0)
    assert u1.sum() == pytest.approx(-1.0)
    assert u2.sum() == pytest.approx(-2.0)
    assert ctrl.integral_acc == pytest.approx(2.0)


def test_under_frequency_raises_generation():
    ctrl = AgcControllerState(kp=0.05, ki=0.06, alpha=participation_factors([0.4, 0.6]))
    u, _ = agc_step(ctrl, area_control_error(0, -0.01, 0.0, 0.0, 2.0), 0.16)
    assert np.all(u > 0)
    assert u[0] > u[1]
