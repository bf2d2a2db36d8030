"""Moving-frame phase field Phi(tau, z) from the characteristic system.

Coordinates: tau = c t / a, z = (y - y_hat(t)) / a, so d/dtau = (a/c) d/dt.
The auxiliary phases are Z = Theta(Phi) (the small root of the real-part
quadratic) and Phi, which solves a quasilinear first-order PDE integrated
along characteristics starting on z = 0 with Phi = 0.

Sign convention: with Z_true = zeta dS/dz the real-part quadratic is solved
by Z_true = -Theta(Phi).  Hence S = -(1/zeta) int_0^z Theta and the balancing
potential reads phi_b = (m c^2/q) (Phi - d/dtau int_0^z Theta + beta Theta).
"""

from __future__ import annotations

import functools
import math
import warnings
from dataclasses import dataclass, field
from typing import Callable

import numpy as np
from scipy import integrate, optimize

from .errors import ConfigError, ConstructionFailure, DiscriminantCollapse, InversionError
from .nonlinearity import Mode
from .odeint import StepSizeUnderflow, dopri5
from .trajectory import Admissibility, Trajectory, check_admissible

__all__ = [
    "ScaleParams",
    "CharConfig",
    "CharPath",
    "ThetaEval",
    "Kinematics",
    "make_scale",
    "scale_sequence",
    "kinematics",
    "q_term",
    "q_term_dz",
    "theta_of_phi",
    "theta_from_q",
    "integrate_characteristic",
    "phi_at",
    "phi_field",
    "phi_points",
    "phase_S",
    "balancing_potential",
    "accelerating_potential",
    "fan",
    "smallness_gates",
]


# --------------------------------------------------------------------------
# scale parameters


@dataclass(frozen=True)
class ScaleParams:
    zeta: float
    a: float
    theta_bar: float
    delta: float = 0.003
    one_plus: float = 1.1
    two_plus: float = 2.1
    m: float = 1.0
    c: float = 1.0
    mode: Mode = Mode.NONLINEAR

    @property
    def a_C(self) -> float:
        return self.zeta * self.a

    @property
    def chi(self) -> float:
        return self.m * self.c * self.zeta * self.a

    @property
    def R(self) -> float:
        return self.theta_bar * self.a

    @property
    def omega0(self) -> float:
        return self.m * self.c**2 / self.chi

    @property
    def phi_bound(self) -> float:
        return self.zeta ** (2.0 - self.delta)

    def tau(self, t):
        return self.c * np.asarray(t, dtype=float) / self.a

    def t_of(self, tau):
        return self.a * np.asarray(tau, dtype=float) / self.c


def _check_exponents(one_plus: float, two_plus: float, delta: float) -> None:
    if not (1.0 < two_plus / 2.0 < one_plus < 2.0):
        raise ConfigError(f"need 1 < 2+/2 < 1+ < 2, got 1+={one_plus}, 2+={two_plus}")
    if not (0.0 < delta < (two_plus - 2.0) / 32.0):
        raise ConfigError(f"need 0 < delta < (2+ - 2)/32 = {(two_plus - 2.0) / 32.0:.3g}, got {delta}")


def make_scale(
    zeta: float,
    one_plus: float = 1.1,
    two_plus: float = 2.1,
    delta: float = 0.003,
    m: float = 1.0,
    c: float = 1.0,
    mode: Mode | str = Mode.NONLINEAR,
) -> ScaleParams:
    """a = exp(-(ln 1/zeta)^(1/1+)), theta_bar = (ln 1/zeta)^(1/2+)."""
    _check_exponents(one_plus, two_plus, delta)
    if not 0.0 < zeta < 1.0:
        raise ConfigError(f"zeta must lie in (0, 1), got {zeta}")
    L = math.log(1.0 / zeta)
    a = math.exp(-(L ** (1.0 / one_plus)))
    theta = L ** (1.0 / two_plus)
    return ScaleParams(zeta, a, theta, delta, one_plus, two_plus, m, c, Mode(mode))


def scale_sequence(zeta_list, one_plus=1.1, two_plus=2.1, delta=0.003, m=1.0, c=1.0, mode=Mode.NONLINEAR):
    """Scale points for a strictly decreasing zeta list; checks R and a_C/a^2 trends."""
    zs = [float(z) for z in zeta_list]
    if any(b >= a for a, b in zip(zs, zs[1:])):
        raise ConfigError("zeta list must be strictly decreasing")
    seq = [make_scale(z, one_plus, two_plus, delta, m, c, mode) for z in zs]
    Rs = [sp.R for sp in seq]
    if any(b >= a for a, b in zip(Rs, Rs[1:])):
        raise ConfigError("R_n must decrease along the sequence")
    ratios = [sp.a_C / sp.a**2 for sp in seq]
    if any(b > a * (1.0 + 1e-12) for a, b in zip(ratios, ratios[1:])):
        raise ConfigError("a_C/a^2 must stay bounded along the sequence")
    return seq


# --------------------------------------------------------------------------
# kinematics in tau units


@dataclass(frozen=True)
class Kinematics:
    beta: np.ndarray
    dbeta: np.ndarray
    gamma: np.ndarray
    dgamma: np.ndarray
    sigma: np.ndarray
    dsigma: np.ndarray
    d2sigma: np.ndarray


def kinematics(tau, sp: ScaleParams, traj: Trajectory) -> Kinematics:
    t = sp.t_of(tau)
    s = sp.a / sp.c
    return Kinematics(
        beta=np.asarray(traj.beta(t), dtype=float),
        dbeta=s * np.asarray(traj.dbeta(t), dtype=float),
        gamma=np.asarray(traj.gamma(t), dtype=float),
        dgamma=s * np.asarray(traj.dgamma(t), dtype=float),
        sigma=np.asarray(traj.sigma(t), dtype=float),
        dsigma=s * np.asarray(traj.dsigma(t), dtype=float),
        d2sigma=s * s * np.asarray(traj.d2sigma(t), dtype=float),
    )


def _q_parts(k: Kinematics, z, sp: ScaleParams, form: str, gamma0: float | None = None):
    """Q and dQ/dz.  ``gamma0`` fixes the z-contraction of the Gaussian (kappa = gamma0^2)."""
    z = np.asarray(z, dtype=float)
    zeta2 = sp.zeta**2
    kap = 1.0 if gamma0 is None else gamma0 * gamma0
    sigma = k.sigma if gamma0 is None else k.sigma + 0.5 * math.log(gamma0)
    common = -(k.d2sigma + k.dsigma**2) - kap * z * k.dbeta - 2.0 * kap * k.beta * z * k.dsigma
    common_z = kap * (-k.dbeta - 2.0 * k.beta * k.dsigma)
    inv_g2 = 1.0 - k.beta**2
    if form == "derived":
        if sp.mode is Mode.LINEAR:
            return (
                zeta2 * (common + kap * kap * inv_g2 * z * z - kap * inv_g2),
                zeta2 * (common_z + 2.0 * kap * kap * inv_g2 * z),
            )
        return (
            zeta2 * (common - kap * kap * k.beta**2 * z * z + kap * k.beta**2 + (kap * kap - kap) * z * z
                     + (1.0 - kap) + 2.0 * sigma),
            zeta2 * (common_z - 2.0 * kap * kap * k.beta**2 * z + 2.0 * (kap * kap - kap) * z),
        )
    if form == "printed":
        if gamma0 is not None:
            raise ConfigError("the printed Q form is only defined without gamma0")
        if sp.mode is Mode.LINEAR:
            return (
                zeta2 * (common - inv_g2 * zeta2 * (z * z - 1.0)),
                zeta2 * (common_z - 2.0 * inv_g2 * zeta2 * z),
            )
        return (
            zeta2 * (common - k.beta**2 * zeta2 * (z * z - 1.0) + 2.0 * sigma),
            zeta2 * (common_z - 2.0 * k.beta**2 * zeta2 * z),
        )
    raise ConfigError(f"unknown Q form '{form}'")


def q_term(tau, z, sp: ScaleParams, traj: Trajectory, form: str = "derived", gamma0: float | None = None):
    """Q(tau, z).  ``form='printed'`` keeps the variant with zeta^4 in the beta^2 term."""
    return _q_parts(kinematics(tau, sp, traj), z, sp, form, gamma0)[0]


def q_term_dz(tau, z, sp: ScaleParams, traj: Trajectory, form: str = "derived", gamma0: float | None = None):
    return _q_parts(kinematics(tau, sp, traj), z, sp, form, gamma0)[1]


@dataclass(frozen=True)
class ThetaEval:
    theta_val: np.ndarray
    theta_dphi: np.ndarray
    theta_dz: np.ndarray
    discriminant: np.ndarray


def _guard_radicands(phi, gamma, beta, q, tau, z):
    direct = phi * phi - 2.0 * gamma * phi + (beta * gamma) ** 2 + q
    composite = (phi - gamma) ** 2 - 1.0 + q
    for name, val in (("phi^2 - 2 gamma phi + beta^2 gamma^2 + Q", direct), ("(phi - gamma)^2 - 1 + Q", composite)):
        bad = ~(val > 0.0)
        if np.any(bad):
            i = int(np.flatnonzero(np.ravel(bad))[0])
            pick = lambda a: float(np.ravel(np.broadcast_to(a, np.shape(val)))[i])  # noqa: E731
            raise DiscriminantCollapse(
                f"radicand {name} is not positive",
                {"tau": pick(tau), "z": pick(z), "phi": pick(phi), "value": pick(val), "radicand": name},
            )
    return direct


def theta_from_q(phi, q, q_z, beta, gamma, tau=0.0, z=0.0) -> ThetaEval:
    """Theta = -beta gamma + sgn(beta) sqrt(D) and its partial derivatives."""
    phi = np.asarray(phi, dtype=float)
    d = _guard_radicands(phi, gamma, beta, q, tau, z)
    root = np.sqrt(d)
    sg = np.sign(beta)
    return ThetaEval(
        theta_val=-beta * gamma + sg * root,
        theta_dphi=sg * (phi - gamma) / root,
        theta_dz=sg * q_z / (2.0 * root),
        discriminant=d,
    )


def theta_of_phi(
    phi, tau, z, sp: ScaleParams, traj: Trajectory, form: str = "derived", gamma0: float | None = None
) -> ThetaEval:
    k = kinematics(tau, sp, traj)
    q, qz = _q_parts(k, z, sp, form, gamma0)
    return theta_from_q(phi, q, qz, k.beta, k.gamma, tau, z)


# --------------------------------------------------------------------------
# characteristic system


@dataclass(frozen=True)
class CharConfig:
    rtol: float = 1e-10
    atol: float = 1e-14
    event_tol: float = 1e-12
    q_form: str = "derived"
    gamma0: float | None = None
    root_tol: float = 1e-13
    max_root_iter: int = 40
    t_window: tuple[float, float] = (-2.0, 2.0)
    fd_step_factor: float = 1e-3


def smallness_gates(sp: ScaleParams, traj: Trajectory, t_window, adm: Admissibility | None = None) -> dict:
    """Sufficient conditions for |Phi| <= beta_check^2/4 and Q >= -beta_check^2/4.

    Reported as flags only; failing them does not stop a run.
    """
    adm = adm or check_admissible(traj, t_window)
    t = np.linspace(t_window[0], t_window[1], 2001)
    k = kinematics(sp.tau(t), sp, traj)
    zeta = sp.zeta
    lhs = (
        zeta**2 * np.max(np.abs(k.d2sigma + k.dsigma**2 - 2.0 * k.sigma - k.beta**2 * zeta**2))
        + zeta ** (4.0 / 3.0) * np.max(np.abs(k.dbeta + 2.0 * k.beta * k.dsigma))
        + zeta ** (10.0 / 3.0)
    )
    gate_z = bool(zeta ** (1.0 / 3.0) * sp.theta_bar <= 1.0)
    gate_q = bool(lhs <= adm.beta_check**2 / 8.0)
    if not (gate_z and gate_q):
        warnings.warn("smallness gates not met; continuing", RuntimeWarning, stacklevel=2)
    return {"gate_z": gate_z, "gate_q": gate_q, "gate_q_lhs": float(lhs)}


class _Problem:
    """Bundles (scale, trajectory, config) with cached kinematic bounds."""

    def __init__(self, sp: ScaleParams, traj: Trajectory, cfg: CharConfig):
        self.sp = sp
        self.traj = traj
        self.cfg = cfg
        lo, hi = cfg.t_window
        pad = 4.0 * sp.a * (sp.theta_bar + 1.0) / sp.c
        self.adm: Admissibility = check_admissible(traj, (lo - pad, hi + pad))
        self.kappa = 1.0 if cfg.gamma0 is None else cfg.gamma0**2
        self.sign = float(np.sign(traj.beta(0.5 * (lo + hi))))
        # |Phi| <= beta_check^2/4 keeps the discriminant bounded below
        self.budget = self.adm.beta_check**2 / 4.0
        self.gates = smallness_gates(sp, traj, (lo - pad, hi + pad), self.adm)

    def rhs_parts(self, tau, z, phi):
        k = kinematics(tau, self.sp, self.traj)
        q, qz = _q_parts(k, z, self.sp, self.cfg.q_form, self.cfg.gamma0)
        th = theta_from_q(phi, q, qz, k.beta, k.gamma, tau, z)
        kap = self.kappa
        dz = -th.theta_dphi - k.beta
        dphi = -2.0 * phi * (k.dsigma + kap * k.beta * z) - 2.0 * kap * z * th.theta_val + th.theta_dz
        return dz, dphi, th

    def rhs(self, tau, y):
        dz, dphi, _ = self.rhs_parts(tau, y[0], y[1])
        return np.stack([dz, dphi])

    def s_bracket(self, z):
        """Bounds on |s| needed to reach |z| along a characteristic."""
        a = self.adm
        lo = abs(z) / (2.0 * (1.0 / a.beta_check - a.beta_check))
        hi = 2.0 * abs(z) / (1.0 / a.eps1 - a.eps1)
        return lo, hi

    def b_tau(self, tau):
        return self.traj.b_fn(self.sp.t_of(tau))


@functools.lru_cache(maxsize=64)
def _problem(sp: ScaleParams, traj: Trajectory, cfg: CharConfig) -> _Problem:
    return _Problem(sp, traj, cfg)


@dataclass(frozen=True, eq=False)
class CharPath:
    tau0: float
    s: np.ndarray = field(repr=False)
    z: np.ndarray = field(repr=False)
    phi: np.ndarray = field(repr=False)
    discriminant: np.ndarray = field(repr=False)
    s_minus: float
    s_plus: float
    max_abs_phi: float
    invariants: dict

    @property
    def tau(self) -> np.ndarray:
        return self.tau0 + self.s


def _check_budget(pb: _Problem, tau, z, phi):
    if abs(phi) > pb.budget:
        raise ConstructionFailure(
            "|Phi| exceeded the construction budget", {"tau": float(tau), "z": float(z), "phi": float(phi)}
        )


def _one_direction(pb: _Problem, tau0: float, direction: float):
    sp = pb.sp
    s_hi = 1.5 * pb.s_bracket(sp.theta_bar)[1] + 1.0
    target = direction * sp.theta_bar

    def f(s, y):
        return pb.rhs(tau0 + s, y)

    def event(s, y):
        return float(y[0, 0]) - target

    try:
        res = dopri5(
            f,
            0.0,
            np.zeros((2, 1)),
            direction * s_hi,
            rtol=pb.cfg.rtol,
            atol=pb.cfg.atol,
            record=True,
            event=event,
            event_tol=pb.cfg.event_tol,
        )
    except StepSizeUnderflow as exc:
        raise ConstructionFailure(str(exc), {"tau0": tau0}) from exc
    if res.event_t is None:
        raise ConstructionFailure("characteristic did not reach |z| = theta_bar", {"tau0": tau0})
    s = np.array(res.ts)
    ys = np.concatenate(res.ys, axis=1)
    for si, zi, pi in zip(s, ys[0], ys[1]):
        _check_budget(pb, tau0 + si, zi, pi)
    return s, ys[0], ys[1], float(res.event_t)


def integrate_characteristic(
    tau0: float, sp: ScaleParams, traj: Trajectory, cfg: CharConfig | None = None
) -> CharPath:
    """Integrate both ways from (tau0, 0) with Phi = 0 until |z| = theta_bar."""
    cfg = cfg or CharConfig()
    pb = _problem(sp, traj, cfg)
    sb, zb, pbk, s_minus = _one_direction(pb, tau0, -1.0)
    sf, zf, pf, s_plus = _one_direction(pb, tau0, 1.0)
    s = np.concatenate([sb[::-1], sf[1:]])
    z = np.concatenate([zb[::-1], zf[1:]])
    phi = np.concatenate([pbk[::-1], pf[1:]])
    k = kinematics(tau0 + s, sp, traj)
    q, _ = _q_parts(k, z, sp, cfg.q_form, cfg.gamma0)
    disc = phi * phi - 2.0 * k.gamma * phi + (k.beta * k.gamma) ** 2 + q
    adm = pb.adm
    lower = (1.0 / adm.eps1 - adm.eps1) * np.abs(s) / 2.0
    upper = 2.0 * np.abs(s) * (1.0 / adm.beta_check - adm.beta_check)
    tol = 1e-12
    max_phi = float(np.max(np.abs(phi)))
    invariants = {
        "phi_bound": bool(max_phi <= sp.phi_bound),
        "zgrle": bool(np.all(lower <= np.abs(z) + tol) and np.all(np.abs(z) <= upper + tol)),
        "discriminant_floor": bool(np.all(disc >= phi * phi + adm.beta_check**2 / 4.0)),
        "gate_z": pb.gates["gate_z"],
        "gate_q": pb.gates["gate_q"],
        "endpoint": bool(
            abs(abs(z[0]) - sp.theta_bar) <= cfg.event_tol and abs(abs(z[-1]) - sp.theta_bar) <= cfg.event_tol
        ),
    }
    return CharPath(tau0, s, z, phi, disc, s_minus, s_plus, max_phi, invariants)


def fan(sp: ScaleParams, traj: Trajectory, n: int = 64, cfg: CharConfig | None = None) -> list[CharPath]:
    """n characteristics with tau0 spread evenly over the configured time window."""
    cfg = cfg or CharConfig()
    lo, hi = cfg.t_window
    taus = np.linspace(sp.tau(lo), sp.tau(hi), n)
    return [integrate_characteristic(float(t0), sp, traj, cfg) for t0 in taus]


def _shoot_to(pb: _Problem, tau0: float, s_end: float):
    if s_end == 0.0:
        return 0.0, 0.0
    res = dopri5(lambda s, y: pb.rhs(tau0 + s, y), 0.0, np.zeros((2, 1)), s_end, rtol=pb.cfg.rtol, atol=pb.cfg.atol)
    return float(res.y[0, 0]), float(res.y[1, 0])


def phi_at(tau: float, z: float, sp: ScaleParams, traj: Trajectory, cfg: CharConfig | None = None) -> float:
    """Phi(tau, z) by root-finding the starting time tau0 and re-integrating.

    Reference path: bracket from the monotone bounds on z(s), Brent's method
    on tau0, one integration per trial.
    """
    cfg = cfg or CharConfig()
    pb = _problem(sp, traj, cfg)
    if abs(z) > sp.theta_bar * (1.0 + 1e-12):
        raise InversionError("point outside the strip |z| <= theta_bar", {"tau": tau, "z": z})
    if z == 0.0:
        return 0.0
    s_lo, s_hi = pb.s_bracket(z)
    sg = math.copysign(1.0, z)
    lo = tau - sg * s_hi * 1.05
    hi = tau - sg * s_lo * 0.95

    def F(t0):
        return _shoot_to(pb, t0, tau - t0)[0] - z

    f_lo, f_hi = F(lo), F(hi)
    if f_lo * f_hi > 0.0:
        raise InversionError("starting time not bracketed", {"tau": tau, "z": z, "bracket": [lo, hi]})
    t0 = optimize.brentq(F, lo, hi, xtol=cfg.root_tol * max(1.0, abs(tau)), rtol=1e-15, maxiter=200)
    zz, ph = _shoot_to(pb, t0, tau - t0)
    _check_budget(pb, tau, zz, ph)
    return ph


def phi_field(
    taus,
    zs,
    sp: ScaleParams,
    traj: Trajectory,
    cfg: CharConfig | None = None,
    tau0_guess: np.ndarray | None = None,
    return_tau0: bool = False,
):
    """Phi on the tensor grid taus x zs (shape (len(taus), len(zs)))."""
    T, Zt = np.meshgrid(np.asarray(taus, dtype=float), np.asarray(zs, dtype=float), indexing="ij")
    phi, t0 = phi_points(T.ravel(), Zt.ravel(), sp, traj, cfg, tau0_guess)
    if return_tau0:
        return phi.reshape(T.shape), t0.reshape(T.shape)
    return phi.reshape(T.shape)


def phi_points(
    tau_p,
    z_p,
    sp: ScaleParams,
    traj: Trajectory,
    cfg: CharConfig | None = None,
    tau0_guess: np.ndarray | None = None,
):
    """Phi at scattered points; returns (Phi, tau0).

    Batched variant of :func:`phi_at`: all starting times are refined
    together by secant steps, each step integrating every characteristic in
    one vectorized pass (time rescaled to u in [0, 1]).  ``tau0_guess``
    warm-starts the refinement.
    """
    cfg = cfg or CharConfig()
    pb = _problem(sp, traj, cfg)
    tau_p = np.asarray(tau_p, dtype=float).ravel()
    z_p = np.asarray(z_p, dtype=float).ravel()
    if np.any(np.abs(z_p) > sp.theta_bar * (1.0 + 1e-12)):
        raise InversionError("grid leaves the strip |z| <= theta_bar", {})
    if tau0_guess is None:
        b0 = pb.b_tau(tau_p)
        mid = tau_p - 0.5 * z_p / b0
        t0 = tau_p - z_p / pb.b_tau(mid)
    else:
        t0 = np.asarray(tau0_guess, dtype=float).ravel().copy()
    zero = z_p == 0.0
    t0[zero] = tau_p[zero]

    def shoot(t0v):
        s_end = tau_p - t0v

        def f(u, y):
            return s_end * pb.rhs(t0v + u * s_end, y)

        try:
            res = dopri5(f, 0.0, np.zeros((2, tau_p.size)), 1.0, rtol=cfg.rtol, atol=cfg.atol)
        except StepSizeUnderflow as exc:
            raise ConstructionFailure(str(exc), {}) from exc
        return res.y

    y = shoot(t0)
    F = y[0] - z_p
    # first update: quasi-Newton with dF/dtau0 ~ -dz/ds at the end point
    dz_end, _, _ = pb.rhs_parts(tau_p, y[0], y[1])
    t_prev, F_prev = t0.copy(), F.copy()
    t0 = np.where(zero, t0, t0 + F / dz_end)
    # tau0 is only representable to ~eps |tau|, and dz/dtau0 is at most ~2 b_max
    tol = cfg.root_tol * np.maximum(1.0, np.abs(z_p)) + 8.0 * np.finfo(float).eps * np.abs(tau_p) * pb.adm.b_max
    for _ in range(cfg.max_root_iter):
        y = shoot(t0)
        F = y[0] - z_p
        if np.all(np.abs(F) <= tol):
            break
        dF = F - F_prev
        safe = (dF != 0.0) & ~zero
        step = np.zeros_like(t0)
        step[safe] = F[safe] * (t0[safe] - t_prev[safe]) / dF[safe]
        t_prev, F_prev = t0.copy(), F.copy()
        t0 = t0 - step
    else:
        t0 = t_prev
        worst = float(np.max(np.abs(F)))
        if worst > 1e3 * cfg.rtol * max(1.0, sp.theta_bar):
            i = int(np.argmax(np.abs(F)))
            raise InversionError(
                "secant refinement of starting times did not converge",
                {"tau": float(tau_p[i]), "z": float(z_p[i]), "residual": worst},
            )
    phi = np.where(zero, 0.0, y[1])
    big = np.abs(phi) > pb.budget
    if np.any(big):
        i = int(np.flatnonzero(big)[0])
        raise ConstructionFailure(
            "|Phi| exceeded the construction budget", {"tau": float(tau_p[i]), "z": float(z_p[i]), "phi": float(phi[i])}
        )
    return phi, t0


def _theta_along(tau, zs, sp, traj, cfg):
    phis = np.array([phi_at(tau, float(z), sp, traj, cfg) for z in np.atleast_1d(zs)])
    return theta_of_phi(phis, tau, np.atleast_1d(zs), sp, traj, cfg.q_form, cfg.gamma0).theta_val


def _theta_integral(tau: float, z: float, sp, traj, cfg) -> float:
    if z == 0.0:
        return 0.0
    val, _ = integrate.quad(
        lambda x: float(_theta_along(tau, x, sp, traj, cfg)[0]), 0.0, z, epsabs=1e-15, epsrel=1e-10, limit=50
    )
    return val


def phase_S(tau: float, z: float, sp: ScaleParams, traj: Trajectory, cfg: CharConfig | None = None) -> float:
    """S(tau, z) = -(1/zeta) int_0^z Theta(Phi(tau, z1)) dz1 (adaptive quadrature)."""
    cfg = cfg or CharConfig()
    return -_theta_integral(tau, z, sp, traj, cfg) / sp.zeta


def balancing_potential(
    tau: float, z: float, sp: ScaleParams, traj: Trajectory, cfg: CharConfig | None = None, q: float = 1.0
) -> float:
    """phi_b = (m c^2/q)(Phi - d/dtau int_0^z Theta + beta Theta), central difference in tau."""
    cfg = cfg or CharConfig()
    if z == 0.0:
        return 0.0
    h = sp.theta_bar * cfg.fd_step_factor
    d_int = (_theta_integral(tau + h, z, sp, traj, cfg) - _theta_integral(tau - h, z, sp, traj, cfg)) / (2.0 * h)
    phi = phi_at(tau, z, sp, traj, cfg)
    th = float(theta_of_phi(phi, tau, z, sp, traj, cfg.q_form, cfg.gamma0).theta_val)
    beta = float(traj.beta(sp.t_of(tau)))
    return sp.m * sp.c**2 / q * (phi - d_int + beta * th)


def accelerating_potential(
    t: float,
    y: float,
    traj: Trajectory,
    phi0: Callable = lambda t: 0.0,
    m: float = 1.0,
    q: float = 1.0,
    chi: float = 1.0,
    quad_rtol: float = 1e-12,
) -> dict:
    """phi_ac = phi0(t) + phi_ac' y with phi_ac' = -(m/q) d(gamma v)/dt, and the phase s(t)."""
    c = traj.c
    slope = -(m / q) * c * float(traj.d_gamma_beta(t))
    omega0 = m * c * c / chi

    def integrand(tt):
        return q * float(phi0(tt)) / chi + omega0 / float(traj.gamma(tt))

    s_phase, _ = integrate.quad(integrand, 0.0, t, epsabs=0.0, epsrel=quad_rtol, limit=200) if t != 0.0 else (0.0, 0.0)
    return {"phi_ac": float(phi0(t)) + slope * y, "phi_ac_slope": slope, "s_phase": s_phase}
