"""Convergence sweep over zeta for a tanh trajectory; writes sweep.json/csv/summary."""

from __future__ import annotations

import argparse
from dataclasses import dataclass, replace
from pathlib import Path

from kgconc.diagnostics import SweepConfig, convergence_sweep
from kgconc.trajectory import TanhBeta


@dataclass(frozen=True)
class Experiment:
    beta0: float = 0.4
    beta1: float = 0.1
    zetas: tuple[float, ...] = (1e-2, 3e-3, 1e-3)
    mode: str = "nonlinear"
    n_t: int = 81
    out: str = "out/sweep"


def run(exp: Experiment) -> None:
    out = Path(exp.out)
    out.mkdir(parents=True, exist_ok=True)
    cfg = SweepConfig(n_t=exp.n_t, mode=exp.mode)
    rep = convergence_sweep(TanhBeta(exp.beta0, exp.beta1), exp.zetas, cfg)
    (out / "sweep.json").write_text(rep.to_json() + "\n")
    rep.write_csv(out / "sweep.csv")
    (out / "sweep_summary.txt").write_text(rep.summary())
    print(rep.summary(), end="")


def main() -> None:
    p = argparse.ArgumentParser(description=__doc__)
    p.add_argument("--mode", choices=("nonlinear", "linear"), default="nonlinear")
    p.add_argument("--zetas", type=float, nargs="+")
    p.add_argument("--n-t", type=int)
    p.add_argument("--out")
    args = p.parse_args()
    exp = Experiment(mode=args.mode)
    if args.zetas:
        exp = replace(exp, zetas=tuple(args.zetas))
    if args.n_t:
        exp = replace(exp, n_t=args.n_t)
    if args.out:
        exp = replace(exp, out=args.out)
    run(exp)


if __name__ == "__main__":
    main()
