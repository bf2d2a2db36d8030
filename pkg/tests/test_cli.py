from __future__ import annotations

import csv
import json

import pytest

from kgconc.cli import EXIT_ASSERT, EXIT_CONFIG, EXIT_CONSTRUCTION, EXIT_OK, main

SMALL_BOOST = """
[boost]
points_per_a = 6
half_width = 4
conservation_points_per_a = 4
conservation_half_width = 2
export_field = true
"""

SMALL_ACCEL = """
[trajectory]
kind = constant
beta0 = 0.5
[scale]
zeta = 1e-2
[construction]
n_t = 9
t_min = -0.5
t_max = 0.5
fan_size = 4
residual_times = 0.0
"""

SMALL_SWEEP = """
[scale]
zeta = 1e-2, 3e-3, 1e-3
[construction]
n_t = 9
t_min = -0.5
t_max = 0.5
z_points_per_unit = 16
residual_times =
"""


def _run(tmp_path, cmd, text, *extra, name="run.ini", out="out"):
    cfg = tmp_path / name
    cfg.write_text(text)
    return main([cmd, "--config", str(cfg), "--out", str(tmp_path / out), *extra])


def _rows(path):
    with open(path, newline="") as fh:
        return list(csv.DictReader(fh))


def test_rest_state_table(tmp_path, capsys):
    assert _run(tmp_path, "rest-state", "", "--assert") == EXIT_OK
    rows = _rows(tmp_path / "out" / "rest_states.csv")
    xi = [float(r["xi"]) for r in rows]
    assert xi[0] == pytest.approx(0.0, abs=1e-4)
    assert xi[1] == pytest.approx(2.17, abs=0.05)
    assert xi[2] == pytest.approx(3.41, abs=0.05)
    assert "PASS xi_1" in capsys.readouterr().out
    assert (tmp_path / "out" / "rest_profiles.csv").exists()


def test_boost_is_deterministic_and_verifiable(tmp_path):
    assert _run(tmp_path, "boost", SMALL_BOOST, out="a") == EXIT_OK
    assert _run(tmp_path, "boost", SMALL_BOOST, out="b") == EXIT_OK
    for name in ("boost.json", "boost_density.csv", "boost_field.csv", "boost_field.json"):
        assert (tmp_path / "a" / name).read_bytes() == (tmp_path / "b" / name).read_bytes()
    report = json.loads((tmp_path / "a" / "boost.json").read_text())
    assert report["checks"]["einstein_identity"] is True

    verify = f"[verify]\nfield = {tmp_path / 'a' / 'boost_field.csv'}\n"
    assert _run(tmp_path, "verify", verify, name="v.ini", out="v") == EXIT_OK
    got = json.loads((tmp_path / "v" / "verify.json").read_text())["residuals"]
    assert got == pytest.approx(report["conservation"], rel=1e-12)


def test_accelerate_constant_velocity(tmp_path, capsys):
    assert _run(tmp_path, "accelerate", SMALL_ACCEL) == EXIT_OK
    rows = _rows(tmp_path / "out" / "acceleration.csv")
    assert rows and all(r["phi_ac_slope"] == "0.0" for r in rows)
    report = json.loads((tmp_path / "out" / "accelerate.json").read_text())
    assert report["phi_ac_slope_max_abs"] == 0.0
    assert report["checks"]["kg_residual_floor"] is True
    assert (tmp_path / "out" / "characteristics.csv").exists()
    assert (tmp_path / "out" / "solution.csv").exists()


def test_accelerate_assert_reports_failed_checks(tmp_path, capsys):
    # sup|Phi| at zeta = 1e-2 exceeds zeta^(2 - delta); --assert turns that into exit 4
    assert _run(tmp_path, "accelerate", SMALL_ACCEL, "--assert") == EXIT_ASSERT
    assert "FAIL phi_bound" in capsys.readouterr().out


def test_construction_failure_exit_code(tmp_path):
    text = SMALL_ACCEL.replace("zeta = 1e-2", "zeta = 0.3").replace("kind = constant\nbeta0 = 0.5", "kind = tanh")
    assert _run(tmp_path, "accelerate", text) == EXIT_CONSTRUCTION


def test_config_error_exit_code(tmp_path, capsys):
    assert _run(tmp_path, "boost", "[boost]\nbeta = 1.2\n") == EXIT_CONFIG
    assert "config error" in capsys.readouterr().err
    assert main(["boost", "--config", str(tmp_path / "missing.ini")]) == EXIT_CONFIG
    assert _run(tmp_path, "verify", "") == EXIT_CONFIG
    assert _run(tmp_path, "boost", SMALL_BOOST, "--threads", "0") == EXIT_CONFIG


def test_sweep_outputs(tmp_path):
    assert _run(tmp_path, "sweep", SMALL_SWEEP, "--threads", "3", out="a") == EXIT_OK
    assert _run(tmp_path, "sweep", SMALL_SWEEP, out="b") == EXIT_OK
    for name in ("sweep.json", "sweep.csv", "sweep_summary.txt"):
        assert (tmp_path / "a" / name).read_bytes() == (tmp_path / "b" / name).read_bytes()
    rep = json.loads((tmp_path / "a" / "sweep.json").read_text())
    assert len(rep["rows"]) == 3
    assert all(v is not None for k, v in rep["slopes"].items())


def test_check_family(tmp_path):
    assert _run(tmp_path, "check-family", "", "--assert", "--format", "csv") == EXIT_OK
    assert not (tmp_path / "out" / "check_family.json").exists()
    assert len(_rows(tmp_path / "out" / "family.csv")) == 5
    bad = "[family]\nprofile = power\nN = 2\n"
    assert _run(tmp_path, "check-family", bad, "--assert", out="bad") == EXIT_ASSERT
