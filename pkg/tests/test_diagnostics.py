from __future__ import annotations

import json
import math

import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from kgconc.assembly import MovingGrid, assemble_field
from kgconc.boost import BoostSpec, boosted_field, lab_grid
from kgconc.characteristics import make_scale
from kgconc.diagnostics import (
    SweepConfig,
    SweepReport,
    SweepRow,
    concentration_checks,
    convergence_sweep,
    fit_slope,
    newton_einstein_report,
    restricted_quantities,
    synthetic_family,
)
from kgconc.errors import ConfigError, DomainError, ResolutionError
from kgconc.trajectory import ConstantBeta


def _assembled(traj, zeta, n_t=41):
    sp = make_scale(zeta)
    return assemble_field(traj, sp, MovingGrid(float(sp.tau(-1.0)), float(sp.tau(1.0)), n_t, 32))


@given(st.floats(0.5, 3.0), st.floats(1e-3, 10.0))
def test_fit_slope_recovers_power_laws(p, c):
    x = np.array([1e-2, 3e-3, 1e-3])
    assert fit_slope(x, c * x**p) == pytest.approx(p, rel=1e-10)


def test_fit_slope_needs_three_points():
    assert fit_slope([1e-2, 1e-3], [1.0, 2.0]) is None
    assert fit_slope([1e-2, 1e-3, 1e-4], [1.0, float("nan"), 2.0]) is None


# ------------------------------------------------------------ restricted


def test_uniform_motion_newton_einstein(const_traj, log_nl):
    sol = _assembled(const_traj, 1e-2)
    obs = restricted_quantities(sol, log_nl, const_traj)
    rep = newton_einstein_report(obs)
    assert rep["newton_residual"] < 1e-12
    assert rep["m0_rel_std"] < 1e-12
    assert rep["energy_defect"] < 1e-12
    assert rep["ergocenter_gap"] < 1e-12
    assert obs.ergocenter_identity < 1e-12


def test_ergocenter_identity_accelerating(tanh_traj, log_nl):
    obs = restricted_quantities(_assembled(tanh_traj, 1e-2), log_nl, tanh_traj)
    assert obs.ergocenter_identity < 1e-12
    assert np.all(obs.energy > 0.0)


def test_energy_gap_is_the_gaussian_tail(const_traj, log_nl):
    """Restricted energy misses exactly the mass of the Gaussian beyond |z| = theta_bar."""
    for zeta in (1e-2, 1e-3):
        sol = _assembled(const_traj, zeta)
        obs = restricted_quantities(sol, log_nl, const_traj)
        tail = math.erfc(sol.sp.theta_bar)
        rel = 1.0 - obs.energy / obs.energy_inf
        assert rel == pytest.approx(np.full_like(rel, tail), rel=0.1)


def test_energy_profile_defect_scales_like_zeta_squared(tanh_traj, log_nl):
    consts = []
    for zeta in (1e-2, 1e-3):
        obs = restricted_quantities(_assembled(tanh_traj, zeta, 21), log_nl, tanh_traj)
        consts.append(obs.energy_profile_defect / zeta ** (2.0 - 0.003))
    assert consts[1] <= consts[0]


def test_charge_pinning_improves(tanh_traj, log_nl):
    gaps = [
        newton_einstein_report(restricted_quantities(_assembled(tanh_traj, z), log_nl, tanh_traj))["charge_pinning_gap"]
        for z in (1e-2, 1e-3)
    ]
    assert gaps[1] < gaps[0]


def test_restricted_assembled_domain_errors(const_traj, log_nl, lin_nl):
    sol = _assembled(const_traj, 1e-2, 9)
    with pytest.raises(DomainError):
        restricted_quantities(sol, log_nl, const_traj, R=2.0 * sol.sp.R)
    with pytest.raises(ConfigError):
        restricted_quantities(sol, lin_nl, const_traj)
    short = _assembled(const_traj, 1e-2, 4)
    with pytest.raises(ResolutionError):
        newton_einstein_report(restricted_quantities(short, log_nl, const_traj))


@pytest.fixture(scope="module")
def boosted_lab():
    spec = BoostSpec((0.0, 0.0, 0.6), 1.0)
    h = 1.0 / 8
    # one grid cell per time step keeps the discrete ball centred on r_hat
    times = np.arange(5) * h / 0.6
    return boosted_field(spec, lab_grid(spec, 5.0, 8, times))


def test_boosted_gausson_ergocenter_is_centre(boosted_lab, log_nl):
    obs = restricted_quantities(boosted_lab, log_nl, ConstantBeta(0.6), R=3.5)
    # end slices carry one-sided time differences, which break the symmetry
    assert np.max(np.abs(obs.ergocenter - obs.r_hat)[1:-1]) < 1e-8
    assert obs.ergocenter_identity < 1e-12


def test_boosted_gausson_restricted_limits(log_nl):
    traj = ConstantBeta(0.6)
    spec = BoostSpec((0.0, 0.0, 0.6), 1.0)
    frame = boosted_field(spec, lab_grid(spec, 5.0, 16, [-1e-3, 0.0, 1e-3]))
    e_full = 1.25 * 1.5
    gaps_e, gaps_q = [], []
    for R in (2.0, 3.0, 4.0):
        obs = restricted_quantities(frame, log_nl, traj, R=R)
        gaps_e.append(abs(obs.energy[1] - e_full))
        gaps_q.append(abs(obs.charge[1] - 1.0))
    assert gaps_e[0] > gaps_e[1] > gaps_e[2]
    assert gaps_q[0] > gaps_q[1] > gaps_q[2]
    assert gaps_e[-1] < 0.01 * e_full and gaps_q[-1] < 0.01


def test_lab_ball_must_fit(boosted_lab, log_nl):
    with pytest.raises(DomainError):
        restricted_quantities(boosted_lab, log_nl, ConstantBeta(0.6), R=4.9)
    with pytest.raises(ConfigError):
        restricted_quantities(boosted_lab, log_nl, ConstantBeta(0.6))


# ------------------------------------------------------------ concentration


def test_synthetic_gaussian_family_passes():
    rep = concentration_checks(synthetic_family("gaussian", 8.0))
    assert all(rep.verdicts.values()), rep.verdicts


def test_violating_family_fails_boundary_decay():
    fam = synthetic_family("power", 2.0)
    assert fam[-1].anthen > fam[0].anthen
    rep = concentration_checks(fam)
    assert not rep.verdicts["boundary_decay"]


def test_synthetic_family_validation():
    with pytest.raises(ConfigError):
        synthetic_family("box", 8.0)
    with pytest.raises(ConfigError):
        synthetic_family("power", 1.5)


# ------------------------------------------------------------ sweep


@pytest.fixture(scope="module")
def small_sweep(tanh_traj):
    cfg = SweepConfig(t_window=(-0.5, 0.5), n_t=9, z_points_per_unit=16, residual_times=())
    return convergence_sweep(tanh_traj, [1e-2, 3e-3, 1e-3], cfg)


def test_sweep_report_schema(small_sweep, tmp_path):
    d = json.loads(small_sweep.to_json())
    assert [r["zeta"] for r in d["rows"]] == [1e-2, 3e-3, 1e-3]
    assert all(d["slopes"][k] is not None for k in ("sup_Phi_vs_zeta", "sup_phi_b_vs_zeta", "energy_gap_vs_zeta"))
    assert d["rows"][0]["kg_residual"] is None
    assert d["config"]["zeta_list"] == [1e-2, 3e-3, 1e-3]
    assert d["concentration"] is not None
    p = tmp_path / "sweep.csv"
    small_sweep.write_csv(p)
    lines = p.read_text().splitlines()
    assert lines[0].split(",") == list(SweepRow.__dataclass_fields__)
    assert len(lines) == 4
    assert "slope sup_Phi_vs_zeta" in small_sweep.summary()


def test_sweep_is_deterministic(small_sweep, tanh_traj):
    cfg = SweepConfig(t_window=(-0.5, 0.5), n_t=9, z_points_per_unit=16, residual_times=())
    again = convergence_sweep(tanh_traj, [1e-2, 3e-3, 1e-3], cfg)
    assert again.to_json() == small_sweep.to_json()


def test_sweep_records_row_failures(tanh_traj):
    cfg = SweepConfig(t_window=(-0.5, 0.5), n_t=9, z_points_per_unit=16, residual_times=())
    rep = convergence_sweep(tanh_traj, [0.3, 1e-2, 1e-3], cfg)
    assert rep.rows[0].error is not None and "budget" in rep.rows[0].error
    assert not rep.verdicts["all_rows_constructed"]
    assert rep.rows[1].error is None


def test_sweep_input_validation(tanh_traj):
    with pytest.raises(ConfigError):
        convergence_sweep(tanh_traj, [1e-2, 1e-3])
    with pytest.raises(ConfigError):
        convergence_sweep(tanh_traj, [1e-3, 1e-2, 1e-4])


def test_report_roundtrip_types():
    rep = SweepReport(rows=[SweepRow(1e-2, 0.1, 2.0, 0.2)], slopes={"x": None}, verdicts={"v": True})
    d = json.loads(rep.to_json())
    assert d["rows"][0]["sup_Phi"] is None and d["verdicts"]["v"] is True
