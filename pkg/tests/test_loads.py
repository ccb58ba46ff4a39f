import numpy as np
import pytest

from app.errors import ConfigError
from app.sim.loads import LoadProfile


def test_step_applies_from_start():
    series = LoadProfile(kind="step", magnitude=0.005, start=8.0).series(5, 4.0)
    np.testing.assert_array_equal(series, [0.0, 0.0, 0.005, 0.005, 0.005])


def test_step_at_zero_is_active_in_the_first_slot():
    assert LoadProfile(kind="step", magnitude=0.005).series(3, 4.0)[0] == 0.005


def test_monotone_ramp_increments_every_period():
    series = LoadProfile(kind="monotone-ramp", epsilon=0.001, period=4.0).series(6, 2.0)
    np.testing.assert_allclose(series, [0.001, 0.001, 0.002, 0.002, 0.003, 0.003])


def test_monotone_ramp_cap():
    series = LoadProfile(kind="monotone-ramp", epsilon=0.001, period=1.0, magnitude=0.0025).series(5, 1.0)
    np.testing.assert_allclose(series, [0.001, 0.002, 0.0025, 0.0025, 0.0025])


def test_random_load_respects_epsilon_per_period_and_seed():
    profile = LoadProfile(kind="piecewise-constant-random", epsilon=0.001, period=4.0, seed=3)
    series = profile.series(100, 0.4)
    changes = np.abs(np.diff(series))
    assert np.all(changes <= 0.001 + 1e-15)
    # solo cambia en bordes de período
    changed_at = np.flatnonzero(changes > 0) + 1
    assert np.all(changed_at % 10 == 0)
    np.testing.assert_array_equal(series, profile.series(100, 0.4))
    assert not np.array_equal(series, LoadProfile(kind="piecewise-constant-random", epsilon=0.001,
                                                  period=4.0, seed=4).series(100, 0.4))


def test_from_file(tmp_path):
    path = tmp_path / "carga.csv"
    path.write_text("time,load\n0,0.0\n4,0.002\n10,0.001\n", encoding="utf-8")
    series = LoadProfile(kind="from-file", path=str(path)).series(6, 2.0)
    np.testing.assert_allclose(series, [0.0, 0.0, 0.002, 0.002, 0.002, 0.001])


def test_from_file_bad_row(tmp_path):
    path = tmp_path / "carga.csv"
    path.write_text("time,load\n0,abc\n", encoding="utf-8")
    with pytest.raises(ConfigError, match="fila 2"):
        LoadProfile(kind="from-file", path=str(path))


def test_unknown_kind_is_rejected():
    with pytest.raises(ConfigError, match="desconocido"):
        LoadProfile(kind="sine")


def test_negative_epsilon_is_rejected():
    with pytest.raises(ConfigError, match="epsilon"):
        LoadProfile(kind="monotone-ramp", epsilon=-0.001)
