"""Command-line entry point: ``kgconc <subcommand> --config run.ini``.

Exit codes: 0 success, 2 invalid configuration, 3 construction failure,
4 a threshold check failed under ``--assert``.
"""

from __future__ import annotations

import argparse
import logging
import sys
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

from . import io
from .assembly import MovingGrid, assemble_field, kg_residual, write_solution_csv
from .boost import BoostSpec, boosted_field, free_observables, lab_grid
from .characteristics import accelerating_potential, fan, make_scale
from .config import RunConfig, load_config
from .densities import PhysParams, conservation_residuals, densities, totals
from .diagnostics import (
    SweepConfig,
    concentration_checks,
    convergence_sweep,
    newton_einstein_report,
    restricted_quantities,
    synthetic_family,
)
from .errors import ConfigError, KGError
from .nonlinearity import Mode
from .rest_states import ShootingConfig, solve_rest_spectrum

log = logging.getLogger("kgconc")

EXIT_OK = 0
EXIT_CONFIG = 2
EXIT_CONSTRUCTION = 3
EXIT_ASSERT = 4


@dataclass
class Outcome:
    """What a subcommand produced: artifacts to write and threshold checks."""

    json: dict = field(default_factory=dict)
    tables: dict = field(default_factory=dict)  # stem -> (header, rows)
    writers: list = field(default_factory=list)  # callables taking the out dir
    checks: dict = field(default_factory=dict)
    failed_construction: bool = False


# --------------------------------------------------------------------------
# subcommands


def cmd_rest_state(cfg: RunConfig, pool) -> Outcome:
    rc = cfg.rest_state
    nl = cfg.build_nonlinearity(Mode.NONLINEAR)
    shoot = ShootingConfig(r_max=rc.r_max, n_grid=rc.n_grid, tail_tol=rc.tail_tol)
    states = solve_rest_spectrum(nl, rc.node_counts, shoot)
    rows = [
        [s.node_count, s.xi, s.amplitude, s.l2_norm, s.energy_coeff, s.truncation_radius, s.sign_changes()]
        for s in states
    ]
    header = ["node_count", "xi", "amplitude", "l2_norm", "energy_coeff", "truncation_radius", "sign_changes"]
    r = states[0].r
    stride = max(1, r.size // 512)
    prof_rows = [[r[i]] + [s.profile[i] for s in states] for i in range(0, r.size, stride)]
    out = Outcome()
    out.tables["rest_states"] = (header, rows)
    out.tables["rest_profiles"] = (["r"] + [f"psi_{s.node_count}" for s in states], prof_rows)
    out.json = {"nonlinearity": nl.label, "states": [dict(zip(header, row)) for row in rows]}
    th = cfg.thresholds
    for s in states:
        if s.node_count < len(th.xi_expected):
            want, tol = th.xi_expected[s.node_count], th.xi_tol[s.node_count]
            out.checks[f"xi_{s.node_count}"] = abs(s.xi - want) <= tol
    return out


def cmd_boost(cfg: RunConfig, pool) -> Outcome:
    bc, ph = cfg.boost, cfg.physics
    nl = cfg.build_nonlinearity(Mode.NONLINEAR)
    pp = PhysParams(m=ph.m, c=ph.c, q=ph.q, chi=bc.chi, a=bc.size_a)
    d = np.asarray(bc.direction, dtype=float)
    v = tuple(float(x) for x in bc.beta * ph.c * d / np.linalg.norm(d))
    spec = BoostSpec(v, bc.omega or pp.omega0, params=pp)

    h_t = bc.totals_h_t
    frame = boosted_field(spec, lab_grid(spec, bc.half_width * bc.size_a, bc.points_per_a, [-h_t, 0.0, h_t]))
    dg = densities(frame, nl, time_index=1)
    tot = totals(dg, time_index=0)
    free = free_observables(spec, bc.theta)
    rel = {
        "energy": abs(tot["energy"] - free["energy"]) / abs(free["energy"]),
        "charge": abs(tot["charge"] - ph.q) / ph.q,
    }
    if spec.speed > 0.0:
        vv = np.asarray(v)
        rel["current"] = float(np.max(np.abs(np.asarray(tot["current"]) - ph.q * vv))) / (ph.q * spec.speed)
        rel["momentum"] = float(np.max(np.abs(np.asarray(tot["momentum"]) - free["mass"] * vv))) / (
            free["mass"] * spec.speed
        )
    out = Outcome()
    out.json = {
        "velocity": list(v),
        "gamma": spec.gamma,
        "omega": spec.omega,
        "quadrature": tot,
        "free": free,
        "relative_error": rel,
    }
    k = frame.psi.shape[-1] // 2
    xs = frame.axis(1)
    rows = [
        [xs[i], xs[j], dg.rho[i, j, k], dg.energy[i, j, k], dg.current[0][i, j, k], dg.current[1][i, j, k],
         dg.momentum[0][i, j, k], dg.momentum[1][i, j, k]]
        for i in range(xs.size)
        for j in range(xs.size)
    ]
    out.tables["boost_density"] = (["x", "y", "rho", "energy", "J_x", "J_y", "P_x", "P_y"], rows)

    if bc.n_times:
        hc = bc.size_a / bc.conservation_points_per_a
        times = 0.5 * hc / ph.c * np.arange(bc.n_times)
        stack = boosted_field(spec, lab_grid(spec, bc.conservation_half_width * bc.size_a, bc.conservation_points_per_a, times))
        res = conservation_residuals(stack, nl)
        out.json["conservation"] = res
        if bc.export_field:
            out.writers.append(lambda d: io.write_field_export(Path(d) / "boost_field.csv", stack))
        if cfg.thresholds.conservation_abs is not None:
            out.checks["conservation"] = all(x <= cfg.thresholds.conservation_abs for x in res.values())
    for key, val in rel.items():
        out.checks[f"{key}_within_tol"] = val <= cfg.thresholds.boost_rel_tol
    out.checks["einstein_identity"] = free["einstein_defect"] == 0.0
    return out


def cmd_accelerate(cfg: RunConfig, pool) -> Outcome:
    sc, cc, ph = cfg.scale, cfg.construction, cfg.physics
    sp = make_scale(sc.zeta[0], sc.one_plus, sc.two_plus, sc.delta, ph.m, ph.c, cfg.mode)
    traj = cfg.build_trajectory()
    phi0 = cfg.build_phi0()
    char = cfg.char_config()
    nl = cfg.build_nonlinearity()
    out = Outcome()

    paths = fan(sp, traj, n=cc.fan_size, cfg=char)
    fan_sup = max(p.max_abs_phi for p in paths)
    out.tables["characteristics"] = (
        ["path", "tau0", "s", "z", "Phi"],
        [[i, p.tau0, s, z, f] for i, p in enumerate(paths) for s, z, f in zip(p.s, p.z, p.phi)],
    )

    grid = MovingGrid(float(sp.tau(cc.t_min)), float(sp.tau(cc.t_max)), cc.n_t, cc.z_points_per_unit)
    sol = assemble_field(traj, sp, grid, phi0=phi0, cfg=char, q=ph.q)
    out.writers.append(lambda d: write_solution_csv(Path(d) / "solution.csv", sol))

    residuals = []
    for t_c in cc.residual_times:
        g = MovingGrid.around(float(sp.tau(t_c)), cc.residual_n_tau, cc.residual_h_tau, cc.residual_points_per_unit)
        s_res = assemble_field(traj, sp, g, phi0=phi0, cfg=char, q=ph.q)
        r = kg_residual(s_res, nl)
        r_ab = kg_residual(s_res, nl, ablate_balancing=True)
        residuals.append({"t": t_c, "linf": r["linf"], "l2": r["l2"], "ablated_linf": r_ab["linf"], "floor": r["floor"]})

    ts = sp.t_of(sol.taus)
    acc_rows = []
    for t in ts:
        ap = accelerating_potential(float(t), 0.0, traj, phi0, ph.m, ph.q, sp.chi, cfg.tolerances.quad_rtol)
        acc_rows.append([float(t), float(traj.beta(t)), float(traj.gamma(t)), ap["phi_ac_slope"] + 0.0, ap["s_phase"]])
    out.tables["acceleration"] = (["t", "beta", "gamma", "phi_ac_slope", "s_phase"], acc_rows)

    obs = restricted_quantities(sol, nl, traj)
    ne = newton_einstein_report(obs, t0=cc.t0)
    slopes = [row[3] for row in acc_rows]
    out.json = {
        "scale": {"zeta": sp.zeta, "a": sp.a, "theta_bar": sp.theta_bar, "R": sp.R, "phi_bound": sp.phi_bound},
        "fan_sup_Phi": fan_sup,
        "sup_Phi": float(np.max(np.abs(sol.Phi))),
        "sup_phi_b": float(np.max(np.abs(sol.phi_b))),
        "sup_S": float(np.max(np.abs(sol.S))),
        "phi_ac_slope_max_abs": max(abs(x) for x in slopes) + 0.0,
        "kg_residual": residuals,
        "newton_einstein": ne,
    }
    th = cfg.thresholds
    out.checks["phi_bound"] = max(fan_sup, out.json["sup_Phi"]) <= sp.phi_bound
    out.checks["kg_residual_floor"] = all(r["linf"] <= th.residual_factor * r["floor"] for r in residuals)
    out.checks["ablation_raises_residual"] = all(r["ablated_linf"] >= th.ablation_factor * r["linf"] for r in residuals)
    return out


def sweep_config(cfg: RunConfig) -> SweepConfig:
    sc, cc, ph = cfg.scale, cfg.construction, cfg.physics
    return SweepConfig(
        t_window=(cc.t_min, cc.t_max),
        n_t=cc.n_t,
        z_points_per_unit=cc.z_points_per_unit,
        residual_times=tuple(cc.residual_times),
        residual_points_per_unit=cc.residual_points_per_unit,
        residual_h_tau=cc.residual_h_tau,
        residual_n_tau=cc.residual_n_tau,
        one_plus=sc.one_plus,
        two_plus=sc.two_plus,
        delta=sc.delta,
        mode=cc.mode,
        m=ph.m,
        c=ph.c,
        q=ph.q,
        char=cfg.char_config(),
        t0=cc.t0,
        phi0=cfg.trajectory.phi0,
    )


def cmd_sweep(cfg: RunConfig, pool) -> Outcome:
    rep = convergence_sweep(cfg.build_trajectory(), cfg.scale.zeta, sweep_config(cfg), executor=pool)
    out = Outcome()
    out.json = rep.to_dict()
    out.writers.append(lambda d: rep.write_csv(Path(d) / "sweep.csv"))
    out.writers.append(lambda d: (Path(d) / "sweep_summary.txt").write_text(rep.summary()))
    out.failed_construction = not rep.verdicts["all_rows_constructed"]
    th, ph = cfg.thresholds, cfg.physics
    rows = rep.rows
    s_phi, s_pb = rep.slopes["sup_Phi_vs_zeta"], rep.slopes["sup_phi_b_vs_zeta"]
    out.checks.update(rep.verdicts)
    out.checks["slope_Phi"] = s_phi is not None and th.slope_phi[0] <= s_phi <= th.slope_phi[1]
    out.checks["slope_phi_b"] = s_pb is not None and th.slope_phi_b[0] <= s_pb <= th.slope_phi_b[1]
    out.checks["kg_residual_floor"] = all(
        r.kg_residual is not None and r.kg_residual <= th.residual_factor * cfg.tolerances.ode_rtol for r in rows
    )
    first = rows[0]
    out.checks["ablation_raises_residual"] = (
        first.kg_residual is not None and first.kg_residual_ablated >= th.ablation_factor * first.kg_residual
    )
    last = rows[-1]
    out.checks["energy_gap_final"] = last.energy_gap is not None and last.energy_gap < th.energy_gap_rel * ph.m * ph.c**2
    out.checks["m0_flat_final"] = last.m0_rel_std is not None and last.m0_rel_std < th.m0_rel_std
    return out


def cmd_verify(cfg: RunConfig, pool) -> Outcome:
    vc = cfg.verify
    if not vc.field:
        raise ConfigError("[verify] field is required")
    path = Path(vc.field)
    if not path.is_absolute() and cfg.source:
        path = Path(cfg.source).parent / path
    frame = io.read_field_export(path)
    res = conservation_residuals(frame, cfg.build_nonlinearity(Mode.NONLINEAR), margin=vc.margin)
    out = Outcome()
    out.json = {"field": path.name, "shape": list(frame.psi.shape), "residuals": res}
    out.tables["verify"] = (["balance", "residual"], [[k, v] for k, v in sorted(res.items())])
    if cfg.thresholds.conservation_abs is not None:
        out.checks["conservation"] = all(x <= cfg.thresholds.conservation_abs for x in res.values())
    return out


def cmd_check_family(cfg: RunConfig, pool) -> Outcome:
    fc = cfg.family
    members = synthetic_family(fc.profile, fc.N, fc.a_list, fc.alpha, fc.zeta, fc.beta, fc.theta_power)
    rep = concentration_checks(members, growth_factor=fc.growth_factor)
    out = Outcome()
    out.json = {"family": {"profile": fc.profile, "N": fc.N, "alpha": fc.alpha}, **rep.to_dict()}
    rows = [
        [mb.a, mb.theta, mb.anthen, rep.volume[i], rep.boundary[i], rep.energy[i]] for i, mb in enumerate(members)
    ]
    out.tables["family"] = (["a", "theta", "anthen", "volume", "boundary", "energy"], rows)
    out.checks.update(rep.verdicts)
    return out


COMMANDS = {
    "rest-state": cmd_rest_state,
    "boost": cmd_boost,
    "accelerate": cmd_accelerate,
    "sweep": cmd_sweep,
    "verify": cmd_verify,
    "check-family": cmd_check_family,
}


# --------------------------------------------------------------------------
# driver


def build_parser() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--config", metavar="PATH", help="INI run configuration (defaults apply when omitted)")
    common.add_argument("--out", metavar="DIR", help="output directory (overrides [output] out_dir)")
    common.add_argument("--assert", dest="assert_", action="store_true", help="exit 4 when a threshold check fails")
    common.add_argument("--threads", type=int, default=1, metavar="N", help="worker threads (default 1)")
    common.add_argument("--format", choices=("csv", "json", "both"), help="artifact format (overrides [output] format)")
    common.add_argument("-v", "--verbose", action="store_true")
    parser = argparse.ArgumentParser(prog="kgconc", description="Localized Klein-Gordon solutions and diagnostics.")
    sub = parser.add_subparsers(dest="command", required=True)
    for name in COMMANDS:
        sub.add_parser(name, parents=[common])
    return parser


def _write(out: Outcome, name: str, out_dir: Path, fmt: str) -> list[Path]:
    out_dir.mkdir(parents=True, exist_ok=True)
    written = []
    stem = name.replace("-", "_")
    if fmt in ("json", "both"):
        report = dict(out.json)
        report["checks"] = out.checks
        p = out_dir / f"{stem}.json"
        io.write_json(p, report)
        written.append(p)
    if fmt in ("csv", "both"):
        for tname, (header, rows) in out.tables.items():
            p = out_dir / f"{tname}.csv"
            io.write_rows(p, header, rows)
            written.append(p)
        for w in out.writers:
            w(out_dir)
    return written


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING, format="%(levelname)s %(message)s")
    try:
        cfg = load_config(args.config)
        if args.threads < 1:
            raise ConfigError("--threads must be positive")
    except ConfigError as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    out_dir = Path(args.out or cfg.output.out_dir)
    fmt = args.format or cfg.output.format
    pool = ThreadPoolExecutor(max_workers=args.threads) if args.threads > 1 else None
    try:
        outcome = COMMANDS[args.command](cfg, pool)
    except ConfigError as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    except KGError as exc:
        print(f"construction failed: {type(exc).__name__}: {exc}", file=sys.stderr)
        return EXIT_CONSTRUCTION
    finally:
        if pool is not None:
            pool.shutdown()
    for p in _write(outcome, args.command, out_dir, fmt):
        log.info("wrote %s", p)
    for key, ok in outcome.checks.items():
        print(f"{'PASS' if ok else 'FAIL'} {key}")
    if outcome.failed_construction:
        print("construction failed for at least one row", file=sys.stderr)
        return EXIT_CONSTRUCTION
    if args.assert_ and not all(outcome.checks.values()):
        return EXIT_ASSERT
    return EXIT_OK


if __name__ == "__main__":
    sys.exit(main())
