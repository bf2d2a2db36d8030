"""Boosted gausson: quadrature totals and conservation residuals under refinement."""

from __future__ import annotations

import argparse
from dataclasses import dataclass

import numpy as np

from kgconc.boost import BoostSpec, boosted_field, free_observables, lab_grid
from kgconc.densities import conservation_residuals, densities, totals
from kgconc.nonlinearity import logarithmic_nonlinearity


@dataclass(frozen=True)
class Experiment:
    beta: float = 0.6
    theta: float = 0.5
    totals_ppa: tuple[int, ...] = (8, 12, 16)
    conservation_ppa: tuple[int, ...] = (8, 16)
    half_width: float = 5.0
    conservation_half_width: float = 2.5


def run(exp: Experiment) -> None:
    nl = logarithmic_nonlinearity()
    spec = BoostSpec((exp.beta, 0.0, 0.0), 1.0)
    free = free_observables(spec, exp.theta)
    print(f"closed form: energy {free['energy']!r} momentum {free['momentum'][0]!r} current {exp.beta!r}")
    print("ppa,charge,energy,current_x,momentum_x")
    for ppa in exp.totals_ppa:
        fr = boosted_field(spec, lab_grid(spec, exp.half_width, ppa, [-1e-3, 0.0, 1e-3]))
        t = totals(densities(fr, nl, time_index=1))
        print(f"{ppa},{t['charge']:.10f},{t['energy']:.10f},{t['current'][0]:.10f},{t['momentum'][0]:.10f}")
    print("ppa,continuity,energy,momentum")
    for ppa in exp.conservation_ppa:
        h = 1.0 / ppa
        fr = boosted_field(spec, lab_grid(spec, exp.conservation_half_width, ppa, np.arange(5) * h / 2))
        r = conservation_residuals(fr, nl)
        print(f"{ppa},{r['continuity']:.4e},{r['energy']:.4e},{r['momentum']:.4e}")


def main() -> None:
    p = argparse.ArgumentParser(description=__doc__)
    p.add_argument("--beta", type=float, default=0.6)
    run(Experiment(beta=p.parse_args().beta))


if __name__ == "__main__":
    main()
