import math
import os
import pathlib

import numpy as np
import pytest

import bowen

CONFIGS = pathlib.Path(__file__).resolve().parents[2] / "configs"
Z2 = [0, 0, 1]


def test_bowen_parameter_of_two_squares():
    r = bowen.bowen_parameter([Z2, Z2], depth=10)
    assert abs(r["delta"] - 2.0) < 2e-3
    assert r["t_lo"] <= r["delta"] <= r["t_hi"]
    assert r["hyperbolic"] == "pass"


def test_pressure_matches_closed_form():
    for t in (0.0, 1.0, 2.5):
        p = bowen.pressure([Z2, [0, 0, 0, 1]], t, depth=10)
        assert abs(p["value"] - math.log(2 ** (1 - t) + 3 ** (1 - t))) < 1e-6


def test_rational_generator_and_errors():
    with pytest.raises(bowen.NoRepellingSeed):
        bowen.bowen_parameter([[1, 1]])
    with pytest.raises(bowen.InvalidMap):
        bowen.bowen_parameter([[3]])
    with pytest.raises(bowen.CriticalPreimage):
        bowen.pressure([[-2, 0, 1]], 1.0, basepoint=-2)
    with pytest.raises(bowen.InvalidMap):
        bowen.pressure([([0, 0, 0, 1], [0, 1])], 0.0)  # common root at 0
    r = bowen.pressure([([1], [0, 0, 1])], 0.0, depth=6)  # 1/z^2
    assert abs(r["value"] - math.log(2)) < 1e-12


def test_cloud_and_box_dimension():
    pts = bowen.julia_cloud([Z2], depth=14)
    assert pts.dtype == np.complex128
    assert np.allclose(np.abs(pts), 1.0, atol=1e-9)
    box = bowen.box_dimension(pts)
    assert abs(box["slope"] - 1.0) < 0.1
    with pytest.raises(bowen.InsufficientPoints):
        bowen.box_dimension(pts[:100])


def test_config_round_trip_and_osc():
    cfg = bowen.Config.load(str(CONFIGS / "z3_z3_over8_osc.json"))
    assert bowen.Config.parse(cfg.to_json()) == cfg
    assert bowen.osc_check(cfg)["verdict"] == "pass"
    bad = bowen.osc_check(bowen.Config.load(str(CONFIGS / "z2_z2.json")))
    assert bad["verdict"] == "fail"
    assert bad["witnesses"]
    with pytest.raises(bowen.ConfigError):
        bowen.Config.parse('{"generators": [{"num": [0, 0, 1]}], "bogus": 1}')


def test_small_sweep():
    cfg = bowen.Config.parse(
        """{
        "family": {"generators": [{"num": [[0], [0], [1]]}, {"num": [[0], [0], [0, 1]]}],
                   "domain": {"type": "annulus", "center": 0, "r1": 0, "r2": 0.95}, "excluded": [0]},
        "grid": {"re_min": -0.5, "re_max": 0.5, "re_steps": 3, "im_min": 0, "im_max": 0, "im_steps": 1},
        "thermo": {"depth": 7}}"""
    )
    out = bowen.sweep(cfg)
    assert out["shape"] == (1, 3)
    assert out["status"] == ["ok", "invalid-instance", "ok"]
    assert np.isnan(out["delta"][1])
    assert np.all(np.abs(out["delta"][[0, 2]] - 2.0) < 1e-2)


def test_cli_in_process(tmp_path):
    target = tmp_path / "p.csv"
    code, out, err = bowen.run_cli(["pressure", "--config", str(CONFIGS / "z2.json"), "--out", str(target)])
    assert code == 0, err
    assert target.read_text().startswith("t,value,residual,depth\n")
    code, _, _ = bowen.run_cli(["pressure", "--config", os.devnull + ".missing"])
    assert code == 2


def test_threads_roundtrip():
    bowen.set_threads(2)
    assert bowen.threads() == 2
    bowen.set_threads(0)
    assert bowen.threads() >= 1
