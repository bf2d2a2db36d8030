"""Restricted energy and charge, ergocenters, concentration gates and the zeta sweep."""

from __future__ import annotations

import csv
import json
import math
from concurrent.futures import Executor
from dataclasses import asdict, dataclass, field
from typing import Callable, Sequence

import numpy as np
from scipy import integrate

from .assembly import (
    AssembledSolution,
    MovingGrid,
    _cumulative,
    assemble_field,
    d1_4,
    kg_residual,
)
from .characteristics import CharConfig, ScaleParams, kinematics, make_scale
from .densities import FieldFrame, densities
from .errors import ConfigError, ConstructionFailure, DomainError, KGError, ResolutionError
from .nonlinearity import Mode, Nonlinearity, logarithmic_nonlinearity, linear_nonlinearity
from .trajectory import ConstantPotential, Trajectory

__all__ = [
    "RestrictedObservables",
    "restricted_quantities",
    "SyntheticMember",
    "synthetic_family",
    "ConcentrationReport",
    "concentration_checks",
    "newton_einstein_report",
    "SweepConfig",
    "SweepRow",
    "SweepReport",
    "convergence_sweep",
    "fit_slope",
]

_SQRT_PI = math.sqrt(math.pi)


@dataclass(frozen=True, eq=False)
class RestrictedObservables:
    times: np.ndarray
    energy: np.ndarray
    charge: np.ndarray
    ergocenter: np.ndarray
    r_hat: np.ndarray
    R: float
    gamma: np.ndarray
    grad_phi_inf: np.ndarray
    m: float = 1.0
    c: float = 1.0
    q: float = 1.0
    ergocenter_identity: float = 0.0
    energy_profile_defect: float | None = None
    extras: dict = field(default_factory=dict)

    @property
    def energy_inf(self) -> np.ndarray:
        return self.gamma * self.m * self.c**2

    @property
    def rest_mass(self) -> np.ndarray:
        return self.energy / (self.c**2 * self.gamma)


def _integral(f: np.ndarray, h: float) -> np.ndarray:
    return _cumulative(f, h)[..., -1]


def _moving_frame_densities(sol: AssembledSolution):
    """Energy and charge per unit z (slab times analytic transverse plane)."""
    sp = sol.sp
    k = kinematics(sol.taus, sp, sol.traj)
    z = sol.zs[None, :]
    kap = 1.0 if sol.gamma0 is None else sol.gamma0**2
    zeta2 = sp.zeta**2
    sigma = sol.sigma[:, None]
    psi2 = sol.Psi**2
    gam, beta = k.gamma[:, None], k.beta[:, None]
    Z = sol.Z
    core = zeta2 * (k.dsigma[:, None] + kap * beta * z) ** 2 + (sol.Phi - gam) ** 2 + (gam * beta - Z) ** 2 + 1.0
    if sp.mode is Mode.NONLINEAR:
        # transverse gradient and the integrated logarithmic G
        bracket = core + zeta2 * kap * kap * z * z + zeta2 - zeta2 * (2.0 * sigma - kap * z * z + 1.0)
    else:
        bracket = core + zeta2 * kap * kap * z * z
    energy_z = 0.5 * sp.m * sp.c**2 * psi2 * bracket
    charge_z = sol.q * psi2 * (gam - sol.Phi)
    return energy_z, charge_z


def restricted_quantities(
    source: AssembledSolution | FieldFrame,
    nl: Nonlinearity,
    traj: Trajectory,
    R: float | None = None,
    axis: int = 2,
    grad_phi_inf: Callable | None = None,
) -> RestrictedObservables:
    """E_n(t), rho_n(t) and the ergocenter r_n(t) over Omega(r_hat(t), R).

    For an assembled solution the ball is replaced by the slab |y| <= R with
    the transverse Gaussian integrated exactly.  For a lab frame (1D or 3D)
    densities are evaluated by finite differences and integrated over the
    ball centred at r_hat(t) on ``axis``.
    """
    if isinstance(source, AssembledSolution):
        return _restricted_assembled(source, nl, R)
    return _restricted_lab(source, nl, traj, R, axis, grad_phi_inf)


def _restricted_assembled(sol: AssembledSolution, nl: Nonlinearity, R: float | None) -> RestrictedObservables:
    sp = sol.sp
    if R is not None and R > sp.R * (1.0 + 1e-12):
        raise DomainError(f"R = {R} exceeds the assembled strip half-width {sp.R}")
    if R is not None and R < sp.R * (1.0 - 1e-12):
        raise DomainError("the assembled strip is integrated in full; pass R = theta_bar a or None")
    if nl.mode is not sp.mode:
        raise ConfigError("nonlinearity mode differs from the construction mode")
    hz = sol.h_z
    e_z, rho_z = _moving_frame_densities(sol)
    energy = _integral(e_z, hz)
    charge = _integral(rho_z, hz)
    first = _integral(e_z * sol.zs[None, :], hz)
    offset = sp.a * first / energy
    ts = sp.t_of(sol.taus)
    r_hat = np.asarray(sol.traj.position(ts), dtype=float)
    ergo = r_hat + offset
    ident = np.abs(_integral(e_z * (sol.zs[None, :] - offset[:, None] / sp.a), hz)) / energy
    k = kinematics(sol.taus, sp, sol.traj)
    slope = -(sp.m / sol.q) * sp.c * np.asarray(sol.traj.d_gamma_beta(ts), dtype=float)
    # pointwise energy profile against gamma m c^2 |psi_rest|^2
    rest2 = np.exp(-sol.zs**2) / _SQRT_PI
    defect = np.abs(e_z - k.gamma[:, None] * sp.m * sp.c**2 * rest2[None, :]) / rest2[None, :]
    return RestrictedObservables(
        times=ts,
        energy=energy,
        charge=charge,
        ergocenter=ergo,
        r_hat=r_hat,
        R=sp.R,
        gamma=k.gamma,
        grad_phi_inf=slope,
        m=sp.m,
        c=sp.c,
        q=sol.q,
        ergocenter_identity=float(np.max(ident)),
        energy_profile_defect=float(np.max(defect)),
    )


def _restricted_lab(frame, nl, traj, R, axis, grad_phi_inf) -> RestrictedObservables:
    if R is None:
        raise ConfigError("R is required for lab frames")
    pp = frame.params
    dg = densities(frame, nl)
    ts = frame.times()
    r_hat = np.asarray(traj.position(ts), dtype=float)
    axes = [frame.axis(k) for k in range(1, frame.psi.ndim)]
    dim = len(axes)
    ax = min(axis, dim - 1)
    for k, a_k in enumerate(axes):
        lo, hi = float(a_k[0]), float(a_k[-1])
        cen = r_hat if k == ax else np.zeros_like(r_hat)
        if np.any(cen - R < lo - 1e-12) or np.any(cen + R > hi + 1e-12):
            raise DomainError("ball leaves the grid")
    weights = []
    for k in range(dim):
        n = frame.psi.shape[k + 1]
        w = np.full(n, frame.spacing[k + 1])
        w[0] *= 0.5
        w[-1] *= 0.5
        weights.append(w)
    W = weights[0]
    for w in weights[1:]:
        W = np.multiply.outer(W, w)
    mesh = np.meshgrid(*axes, indexing="ij")
    nt = ts.size
    energy = np.empty(nt)
    charge = np.empty(nt)
    ergo = np.empty(nt)
    ident = 0.0
    for it in range(nt):
        r2 = sum((mesh[k] - (r_hat[it] if k == ax else 0.0)) ** 2 for k in range(dim))
        mask = (r2 <= R * R) * W
        e = dg.energy[it] * mask
        energy[it] = e.sum()
        charge[it] = (dg.rho[it] * mask).sum()
        ergo[it] = (e * mesh[ax]).sum() / energy[it]
        ident = max(ident, abs((e * (mesh[ax] - ergo[it])).sum()) / energy[it])
    gam = np.asarray(traj.gamma(ts), dtype=float)
    slope = (
        np.asarray([grad_phi_inf(t) for t in ts], dtype=float)
        if grad_phi_inf is not None
        else -(pp.m / pp.q) * pp.c * np.asarray(traj.d_gamma_beta(ts), dtype=float)
    )
    return RestrictedObservables(
        times=ts,
        energy=energy,
        charge=charge,
        ergocenter=ergo,
        r_hat=r_hat,
        R=R,
        gamma=gam,
        grad_phi_inf=slope,
        m=pp.m,
        c=pp.c,
        q=pp.q,
        ergocenter_identity=float(ident),
    )


# --------------------------------------------------------------------------
# concentration gates


@dataclass(frozen=True)
class SyntheticMember:
    """psi(t, x) = a^{-3/2} psi0((x - r_hat(t))/a) with a radial profile psi0."""

    a: float
    theta: float
    zeta: float
    beta: float
    profile: str
    N: float
    alpha: float = 0.9

    def psi0(self, r):
        r = np.asarray(r, dtype=float)
        if self.profile == "gaussian":
            return math.pi**-0.75 * np.exp(-0.5 * r * r)
        return _power_norm(self.N) * (1.0 + r * r) ** (-0.5 * self.N)

    def dpsi0(self, r):
        r = np.asarray(r, dtype=float)
        if self.profile == "gaussian":
            return -r * self.psi0(r)
        return -self.N * r * self.psi0(r) / (1.0 + r * r)

    @property
    def anthen(self) -> float:
        """a^{-1} theta^{2 - (1 + alpha) N}; must tend to 0 along the family."""
        return self.theta ** (2.0 - (1.0 + self.alpha) * self.N) / self.a


def _power_norm(N: float) -> float:
    if N <= 1.5:
        raise ConfigError("power-law profile needs N > 3/2 to be square integrable")
    val, _ = integrate.quad(lambda r: 4.0 * math.pi * r * r * (1.0 + r * r) ** (-N), 0.0, np.inf, epsrel=1e-13)
    return 1.0 / math.sqrt(val)


def _abs_log_g(s):
    s = np.asarray(s, dtype=float)
    with np.errstate(divide="ignore", invalid="ignore"):
        out = np.abs(s * (np.log(s) + 1.5 * math.log(math.pi) + 2.0))
    return np.where(s > 0.0, out, 0.0)


def _signed_log_g(s):
    s = np.asarray(s, dtype=float)
    with np.errstate(divide="ignore", invalid="ignore"):
        out = -s * (np.log(s) + 1.5 * math.log(math.pi) + 2.0)
    return np.where(s > 0.0, out, 0.0)


def synthetic_family(
    profile: str = "gaussian",
    N: float = 8.0,
    a_list: Sequence[float] = (1e-2, 1e-3, 1e-4, 1e-5, 1e-6),
    alpha: float = 0.9,
    zeta: float = 0.5,
    beta: float = 0.5,
    theta_power: float = 0.25,
) -> list[SyntheticMember]:
    """Members with theta_n = a_n^{-theta_power}."""
    if profile not in ("gaussian", "power"):
        raise ConfigError(f"unknown synthetic profile '{profile}'")
    if not 3.0 - (1.0 + alpha) * N < 0.0:
        raise ConfigError("need 3 - (1 + alpha) N < 0")
    return [SyntheticMember(float(a), float(a) ** -theta_power, zeta, beta, profile, N, alpha) for a in a_list]


def _synthetic_values(mb: SyntheticMember, m=1.0, c=1.0) -> dict:
    z2, b2 = mb.zeta**2, mb.beta**2

    def dens(r, grad_w):
        p = mb.psi0(r)
        d = mb.dpsi0(r)
        return z2 * grad_w * d * d + z2 * _abs_log_g(p * p) + p * p

    th = mb.theta
    vol, _ = integrate.quad(lambda r: 4.0 * math.pi * r * r * dens(r, 1.0 + b2), 0.0, th, epsrel=1e-11, limit=200)
    bnd = 4.0 * math.pi * th * th / mb.a * float(dens(th, 1.0 + b2))

    def e_dens(r):
        p = mb.psi0(r)
        d = mb.dpsi0(r)
        return z2 * (1.0 + b2 / 3.0) * d * d + z2 * _signed_log_g(p * p) + p * p

    en, _ = integrate.quad(lambda r: 4.0 * math.pi * r * r * e_dens(r), 0.0, th, epsrel=1e-11, limit=200)
    envelope = float(np.sqrt(mb.dpsi0(th) ** 2 + mb.psi0(th) ** 2) * th**mb.N) if th >= 1.0 else None
    return {"volume": vol, "boundary": bnd, "energy": 0.5 * m * c * c * en, "anthen": mb.anthen, "envelope": envelope}


def _assembled_values(sol: AssembledSolution, nl: Nonlinearity) -> dict:
    """Gate integrals for the Gaussian construction (3D in nonlinear mode, 1D in linear mode)."""
    sp = sol.sp
    zeta2 = sp.zeta**2
    k = kinematics(sol.taus, sp, sol.traj)
    z = sol.zs[None, :]
    kap = 1.0 if sol.gamma0 is None else sol.gamma0**2
    gam, beta = k.gamma[:, None], k.beta[:, None]
    phi_t = sol.frame.phi * sol.q / (sp.m * sp.c**2)
    # a_C^2 |grad_{0,x} psi|^2 / |psi|^2 along y and t (plain derivatives)
    w_ty = (
        zeta2 * (k.dsigma[:, None] + kap * beta * z) ** 2
        + (sol.Phi - gam - phi_t) ** 2
        + zeta2 * kap * kap * z * z
        + (gam * beta - sol.Z) ** 2
    )
    psi1 = sol.Psi**2 / sp.a
    hz = sol.h_z
    out = {}
    e_z, _ = _moving_frame_densities(sol)
    energy = _integral(e_z, hz)
    if sp.mode is Mode.LINEAR:
        vol = _integral(psi1 * sp.a * (w_ty + 1.0), hz)
        bnd = (psi1 * (w_ty + 1.0))[:, [0, -1]].sum(axis=1)
    else:
        th = sp.theta_bar
        # transverse radius grid (in units of a) for |G|, volume integrand
        rho = np.linspace(0.0, 8.0, 801)
        g2 = np.exp(-rho * rho) / math.pi  # a^2 |g|^2
        s3 = (g2[None, None, :] * sol.Psi[:, :, None] ** 2)  # a^3 |psi|^2
        absg = _abs_log_g(s3)
        with np.errstate(divide="ignore", invalid="ignore"):
            ratio = np.where(s3 > 0.0, absg / s3, 0.0)
        dens = s3 * (w_ty[:, :, None] + zeta2 * rho[None, None, :] ** 2 + zeta2 * ratio + 1.0)
        transverse = integrate.trapezoid(dens * 2.0 * math.pi * rho[None, None, :], rho, axis=2)
        vol = _integral(transverse, hz)
        # sphere |x - r_hat| = R parametrised by height z; area element 2 pi theta a^2 dz
        rho_b = np.sqrt(np.maximum(th * th - z * z, 0.0))
        s3b = np.exp(-rho_b**2) / math.pi * sol.Psi**2
        with np.errstate(divide="ignore", invalid="ignore"):
            ratio_b = np.where(s3b > 0.0, _abs_log_g(s3b) / s3b, 0.0)
        dens_b = s3b / sp.a**3 * (w_ty + zeta2 * rho_b**2 + zeta2 * ratio_b + 1.0)
        bnd = 2.0 * math.pi * th * sp.a**2 * _integral(dens_b, hz)
    out["volume"] = float(np.max(vol))
    out["boundary"] = float(np.max(bnd))
    out["energy"] = float(np.min(energy))
    out["exponent"] = math.log(1.0 / sp.a) - sp.theta_bar**2
    # potential gates: |phi| + |grad_{0,x} phi| and the same for phi - phi_ac
    phi = sol.frame.phi
    ht, hy = sol.frame.spacing
    if sol.taus.size >= 5:
        dphi_t = d1_4(phi, ht, 0)
        dpb_t = d1_4(sol.phi_b, ht, 0)
        # d/dt at fixed lab x = d/dt|_z - v/a d/dz
        v = (sp.c * k.beta)[:, None]
        dphi_y = d1_4(phi, hy, 1)
        dpb_y = d1_4(sol.phi_b, hy, 1)
        g_phi = np.sqrt(((dphi_t - v * dphi_y) / sp.c) ** 2 + dphi_y**2)
        g_pb = np.sqrt(((dpb_t - v * dpb_y) / sp.c) ** 2 + dpb_y**2)
        out["potential_bound"] = float(np.max(np.abs(phi) + g_phi))
        out["potential_local"] = float(np.max(np.abs(sol.phi_b) + g_pb))
    return out


@dataclass
class ConcentrationReport:
    volume: list
    boundary: list
    energy: list
    verdicts: dict
    extras: dict = field(default_factory=dict)

    def to_dict(self) -> dict:
        return asdict(self)


def concentration_checks(members, sps=None, traj=None, nl: Nonlinearity | None = None, growth_factor: float = 2.0):
    """Per-member gate integrals and three verdicts.

    boundedness: every volume integral is at most ``growth_factor`` times the
    first one; boundary_decay: boundary integrals strictly decrease;
    energy_floor: restricted energies stay positive and above a tenth of
    their maximum.  Potential gates are reported, not judged.
    """
    vals = []
    for mb in members:
        if isinstance(mb, SyntheticMember):
            vals.append(_synthetic_values(mb))
        elif isinstance(mb, AssembledSolution):
            use = nl or (linear_nonlinearity() if mb.sp.mode is Mode.LINEAR else logarithmic_nonlinearity())
            vals.append(_assembled_values(mb, use))
        else:
            raise ConfigError(f"unsupported member type {type(mb).__name__}")
    vol = [v["volume"] for v in vals]
    bnd = [v["boundary"] for v in vals]
    en = [v["energy"] for v in vals]
    finite = all(math.isfinite(x) for x in vol + bnd + en)
    verdicts = {
        "boundedness": bool(finite and max(vol) <= growth_factor * vol[0]),
        "boundary_decay": bool(finite and all(b < a for a, b in zip(bnd, bnd[1:]))),
        "energy_floor": bool(finite and min(en) > 0.0 and min(en) >= 0.1 * max(en)),
    }
    extras = {k: [v.get(k) for v in vals] for k in vals[0] if k not in ("volume", "boundary", "energy")}
    return ConcentrationReport(vol, bnd, en, verdicts, extras)


# --------------------------------------------------------------------------
# Newton-Einstein verdict


def _dt4(f: np.ndarray, h: float) -> np.ndarray:
    return d1_4(np.asarray(f, dtype=float), h, 0)


def newton_einstein_report(obs: RestrictedObservables | Sequence[RestrictedObservables], traj=None, sps=None, t0=None):
    """Newton residual, Einstein-mass flatness and energy-balance defects per row."""
    rows = [obs] if isinstance(obs, RestrictedObservables) else list(obs)
    out = []
    for o in rows:
        ts = o.times
        if ts.size < 5:
            raise ResolutionError("Newton-Einstein report needs at least 5 time samples")
        h = float(ts[1] - ts[0])
        if not np.allclose(np.diff(ts), h, rtol=1e-9, atol=0.0):
            raise ResolutionError("time samples must be uniform")
        mass = o.energy / o.c**2
        vel = _dt4(o.ergocenter, h)
        newton = _dt4(mass * vel, h) + o.charge * o.grad_phi_inf
        m0 = o.rest_mass
        i0 = ts.size // 2 if t0 is None else int(np.argmin(np.abs(ts - t0)))
        v_hat = _dt4(o.r_hat, h)
        work = _cumulative(v_hat * o.grad_phi_inf * o.charge, h)
        work = work - work[i0]
        energy_defect = np.abs(o.energy - o.energy[i0] + work)
        power_defect = np.abs(_dt4(o.energy, h) + o.charge * v_hat * o.grad_phi_inf)
        m0_mean = float(np.mean(m0))
        pinned = o.q * m0_mean / o.m
        sl = slice(2, -2)
        out.append(
            {
                "newton_residual": float(np.max(np.abs(newton[sl]))),
                "m0_mean": m0_mean,
                "m0_rel_std": float(np.std(m0) / abs(m0_mean)),
                "mass_rel_std": float(np.std(mass) / abs(np.mean(mass))),
                "energy_gap": float(np.max(np.abs(o.energy - o.energy_inf))),
                "charge_gap": float(np.max(np.abs(o.charge - o.q))),
                "ergocenter_gap": float(np.max(np.abs(o.ergocenter - o.r_hat))),
                "energy_defect": float(np.max(energy_defect)),
                "power_defect": float(np.max(power_defect[sl])),
                "charge_pinning_gap": float(np.max(np.abs(o.charge - pinned))),
                "charge_drift": float(np.max(np.abs(o.charge - o.charge[i0]))),
            }
        )
    return out if not isinstance(obs, RestrictedObservables) else out[0]


# --------------------------------------------------------------------------
# sweep


@dataclass(frozen=True)
class SweepConfig:
    t_window: tuple[float, float] = (-2.0, 2.0)
    n_t: int = 81
    z_points_per_unit: int = 32
    residual_times: tuple[float, ...] = (0.0,)
    residual_points_per_unit: int = 64
    residual_h_tau: float = 0.05
    residual_n_tau: int = 5
    one_plus: float = 1.1
    two_plus: float = 2.1
    delta: float = 0.003
    mode: str = "nonlinear"
    m: float = 1.0
    c: float = 1.0
    q: float = 1.0
    char: CharConfig = CharConfig()
    t0: float | None = None
    phi0: float = 0.0


@dataclass
class SweepRow:
    zeta: float
    a: float
    theta_bar: float
    R: float
    sup_Phi: float | None = None
    sup_phi_b: float | None = None
    sup_S: float | None = None
    kg_residual: float | None = None
    kg_residual_ablated: float | None = None
    energy_gap: float | None = None
    charge_gap: float | None = None
    ergocenter_gap: float | None = None
    newton_residual: float | None = None
    m0_rel_std: float | None = None
    m0_mean: float | None = None
    energy_defect: float | None = None
    energy_profile_defect: float | None = None
    phi_bound_ok: bool | None = None
    error: str | None = None


def fit_slope(x, y) -> float | None:
    """Least-squares slope of log y against log x (None with fewer than 3 points)."""
    x = np.asarray(x, dtype=float)
    y = np.asarray(y, dtype=float)
    ok = np.isfinite(x) & np.isfinite(y) & (x > 0) & (y > 0)
    if ok.sum() < 3:
        return None
    return float(np.polyfit(np.log(x[ok]), np.log(y[ok]), 1)[0])


@dataclass
class SweepReport:
    rows: list
    slopes: dict
    verdicts: dict
    concentration: dict | None = None
    config: dict = field(default_factory=dict)

    def to_dict(self) -> dict:
        return {
            "config": self.config,
            "rows": [asdict(r) for r in self.rows],
            "slopes": self.slopes,
            "verdicts": self.verdicts,
            "concentration": self.concentration,
        }

    def to_json(self) -> str:
        return json.dumps(self.to_dict(), indent=2, sort_keys=True, default=_json_default)

    def write_csv(self, path) -> None:
        names = list(SweepRow.__dataclass_fields__)
        with open(path, "w", newline="") as fh:
            w = csv.writer(fh, lineterminator="\n")
            w.writerow(names)
            for r in self.rows:
                w.writerow(["" if getattr(r, n) is None else _fmt(getattr(r, n)) for n in names])

    def summary(self) -> str:
        lines = ["zeta sweep"]
        for r in self.rows:
            if r.error:
                lines.append(f"  zeta={r.zeta:.3g}: ERROR {r.error}")
            else:
                kg = "n/a" if r.kg_residual is None else f"{r.kg_residual:.3g}"
                lines.append(
                    f"  zeta={r.zeta:.3g}: sup|Phi|={r.sup_Phi:.4g} sup|phi_b|={r.sup_phi_b:.4g} "
                    f"kg={kg} dE={r.energy_gap:.3g} newton={r.newton_residual:.3g}"
                )
        for k, v in self.slopes.items():
            lines.append(f"  slope {k}: {'n/a' if v is None else f'{v:.4f}'}")
        for k, v in self.verdicts.items():
            lines.append(f"  {k}: {'PASS' if v else 'FAIL'}")
        return "\n".join(lines) + "\n"


def _fmt(v):
    if isinstance(v, float):
        return repr(v)
    return str(v)


def _json_default(o):
    if isinstance(o, (np.floating,)):
        return float(o)
    if isinstance(o, (np.integer,)):
        return int(o)
    if isinstance(o, np.ndarray):
        return o.tolist()
    if isinstance(o, tuple):
        return list(o)
    if hasattr(o, "value"):
        return o.value
    raise TypeError(f"cannot serialise {type(o).__name__}")


def _row_task(traj: Trajectory, sp: ScaleParams, cfg: SweepConfig):
    row = SweepRow(zeta=sp.zeta, a=sp.a, theta_bar=sp.theta_bar, R=sp.R)
    nl = linear_nonlinearity() if sp.mode is Mode.LINEAR else logarithmic_nonlinearity()
    char = CharConfig(**{**cfg.char.__dict__, "t_window": tuple(cfg.t_window)})
    try:
        lo, hi = sp.tau(cfg.t_window[0]), sp.tau(cfg.t_window[1])
        grid = MovingGrid(float(lo), float(hi), cfg.n_t, cfg.z_points_per_unit)
        sol = assemble_field(traj, sp, grid, phi0=ConstantPotential(cfg.phi0), cfg=char, q=cfg.q)
        obs = restricted_quantities(sol, nl, traj)
        ne = newton_einstein_report(obs, t0=cfg.t0)
        res, res_ab = [], []
        for t_c in cfg.residual_times:
            g = MovingGrid.around(float(sp.tau(t_c)), cfg.residual_n_tau, cfg.residual_h_tau, cfg.residual_points_per_unit)
            s_res = assemble_field(traj, sp, g, phi0=ConstantPotential(cfg.phi0), cfg=char, q=cfg.q)
            res.append(kg_residual(s_res, nl)["linf"])
            res_ab.append(kg_residual(s_res, nl, ablate_balancing=True)["linf"])
        row.sup_Phi = float(np.max(np.abs(sol.Phi)))
        row.sup_phi_b = float(np.max(np.abs(sol.phi_b)))
        row.sup_S = float(np.max(np.abs(sol.S)))
        row.kg_residual = float(max(res)) if res else None
        row.kg_residual_ablated = float(min(res_ab)) if res_ab else None
        row.energy_gap = ne["energy_gap"]
        row.charge_gap = ne["charge_gap"]
        row.ergocenter_gap = ne["ergocenter_gap"]
        row.newton_residual = ne["newton_residual"]
        row.m0_rel_std = ne["m0_rel_std"]
        row.m0_mean = ne["m0_mean"]
        row.energy_defect = ne["energy_defect"]
        row.energy_profile_defect = obs.energy_profile_defect
        row.phi_bound_ok = bool(row.sup_Phi <= sp.phi_bound)
        extra = sol
    except (ConstructionFailure, KGError) as exc:
        row.error = f"{type(exc).__name__}: {exc}"
        extra = None
    return row, extra


def _decreasing(vals) -> bool:
    v = [x for x in vals if x is not None]
    return len(v) == len(vals) and all(b < a for a, b in zip(v, v[1:]))


def convergence_sweep(
    traj: Trajectory,
    zeta_list: Sequence[float],
    config: SweepConfig | None = None,
    executor: Executor | None = None,
    with_concentration: bool = True,
) -> SweepReport:
    """scale_sequence -> assemble_field -> kg_residual -> restricted_quantities per zeta."""
    cfg = config or SweepConfig()
    zs = [float(z) for z in zeta_list]
    if len(zs) < 3:
        raise ConfigError("a sweep needs at least 3 zeta values")
    if any(b >= a for a, b in zip(zs, zs[1:])):
        raise ConfigError("zeta list must be strictly decreasing")
    sps = [make_scale(z, cfg.one_plus, cfg.two_plus, cfg.delta, cfg.m, cfg.c, Mode(cfg.mode)) for z in zs]
    if executor is None:
        results = [_row_task(traj, sp, cfg) for sp in sps]
    else:
        results = list(executor.map(lambda sp: _row_task(traj, sp, cfg), sps))
    rows = [r for r, _ in results]
    sols = [s for _, s in results]
    good = [r for r in rows if r.error is None]
    slopes = {
        "sup_Phi_vs_zeta": fit_slope([r.zeta for r in good], [r.sup_Phi for r in good]),
        "sup_phi_b_vs_zeta": fit_slope([r.zeta for r in good], [r.sup_phi_b for r in good]),
        "sup_S_vs_zeta": fit_slope([r.zeta for r in good], [r.sup_S for r in good]),
        "ergocenter_gap_vs_R": fit_slope([r.R for r in good], [r.ergocenter_gap for r in good]),
        "energy_gap_vs_zeta": fit_slope([r.zeta for r in good], [r.energy_gap for r in good]),
    }
    verdicts = {
        "all_rows_constructed": len(good) == len(rows),
        "phi_bound_every_row": all(bool(r.phi_bound_ok) for r in rows),
        "energy_gap_decreasing": _decreasing([r.energy_gap for r in rows]),
        "newton_residual_decreasing": _decreasing([r.newton_residual for r in rows]),
        "ergocenter_gap_decreasing": _decreasing([r.ergocenter_gap for r in rows]),
        "ergocenter_within_2R": all(r.ergocenter_gap is not None and r.ergocenter_gap <= 2.0 * r.R for r in rows),
    }
    conc = None
    if with_concentration and all(s is not None for s in sols):
        conc = concentration_checks(sols).to_dict()
    cfg_dict = asdict(cfg)
    cfg_dict["zeta_list"] = zs
    cfg_dict["trajectory"] = {"kind": type(traj).__name__, **{k: v for k, v in traj.__dict__.items()}}
    return SweepReport(rows=rows, slopes=slopes, verdicts=verdicts, concentration=conc, config=cfg_dict)
