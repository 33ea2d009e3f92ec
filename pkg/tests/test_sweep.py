import csv
import io
import math

import numpy as np
import pytest

from sfwm.budget import forward_singles
from sfwm.config import load_config
from sfwm.errors import ConfigError
from sfwm.sweep import AXES, COLUMNS, operating_point, run_sweep


@pytest.fixture
def cfg(reference_config_path):
    return load_config(reference_config_path)


def test_reference_point_is_identity(cfg):
    b, flag = operating_point(cfg)
    assert b == cfg.budget.budget()
    assert flag == ""
    b2, _ = operating_point(cfg, temperature_C=42.0, power_mw=30.0, displacement_mm=0.0)
    assert b2.pair_rate == pytest.approx(383.0, rel=1e-12)
    assert b2.eta_antistokes == pytest.approx(0.22, rel=1e-12)


def test_power_scaling_is_linear(cfg):
    b, _ = operating_point(cfg, power_mw=60.0)
    m0 = forward_singles(cfg.budget.budget())
    m1 = forward_singles(b)
    assert m1[0] - 200.0 == pytest.approx(2 * (m0[0] - 200.0), rel=1e-12)


def test_low_power_flag(cfg):
    _, flag = operating_point(cfg, power_mw=2.0)
    assert flag == "outside_model_validity"


def test_csv_shape_and_order(cfg):
    res = run_sweep(cfg, "temperature", 40.0, 65.0, 11)
    text = res.to_csv()
    rows = list(csv.reader(io.StringIO(text)))
    assert rows[0] == [AXES["temperature"], *COLUMNS]
    assert len(rows) == 12
    axis = [float(r[0]) for r in rows[1:]]
    assert axis == sorted(axis)
    threaded = run_sweep(cfg, "temperature", 40.0, 65.0, 11, workers=4)
    assert threaded.to_csv() == text


def test_temperature_trends(cfg):
    res = run_sweep(cfg, "temperature", 40.0, 65.0, 26)
    for col in ("M_S_hz", "M_AS_hz", "coincidence_rate_hz"):
        assert np.all(np.diff(res.column(col)) > 0)
    assert np.all(np.diff(res.column("g2_peak")) < 0)
    assert np.allclose(res.column("bandwidth_mhz"), 370.0, rtol=1e-9)


def test_displacement_trends(cfg):
    res = run_sweep(cfg, "displacement", -3.0, 15.0, 37)
    m_s, m_as, g2 = res.column("M_S_hz"), res.column("M_AS_hz"), res.column("g2_peak")
    z = np.array(res.values)
    assert np.all(np.diff(m_s) >= 0)
    # saturation: slope falls for z > 0 and the end sits within 1% of the all-atoms limit
    assert np.all(np.diff(np.diff(m_s)[z[:-1] >= 0]) < 0)
    limit = forward_singles(operating_point(cfg, displacement_mm=60.0)[0])[0]
    assert m_s[-1] >= 0.99 * limit
    k = int(np.argmax(m_as))
    assert 0 < k < len(z) - 1
    assert np.all(np.diff(m_as[: k + 1]) > 0) and np.all(np.diff(m_as[k:]) < 0)
    assert np.all(np.diff(g2[z >= 0]) < 0)


def test_infeasible_points_are_flagged(cfg):
    res = run_sweep(cfg, "displacement", -40.0, 0.0, 3)
    assert res.rows[0]["flag"].startswith("infeasible")
    assert math.isnan(res.rows[0]["g2_peak"])
    assert res.rows[-1]["flag"] == ""
    text = res.to_csv()
    assert len(text.strip().splitlines()) == 4


def test_bad_axis_and_range(cfg):
    with pytest.raises(ConfigError):
        run_sweep(cfg, "pressure", 0, 1, 2)
    with pytest.raises(ConfigError):
        run_sweep(cfg, "power", 10, 5, 3)
    with pytest.raises(ConfigError):
        run_sweep(cfg, "power", 10, 20, 0)
    assert len(run_sweep(cfg, "power", 10, 10, 1).rows) == 1
