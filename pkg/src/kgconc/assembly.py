"""Gaussian-shape solution along a prescribed trajectory and its KG residual."""

from __future__ import annotations

import csv
import math
from dataclasses import dataclass, field
from typing import Callable

import numpy as np
from scipy import integrate

from .characteristics import (
    CharConfig,
    ScaleParams,
    _problem,
    kinematics,
    phi_points,
    theta_of_phi,
)
from .densities import FieldFrame, FrameKind, PhysParams
from .errors import ConfigError, ResolutionError
from .nonlinearity import Mode, Nonlinearity
from .trajectory import Trajectory

__all__ = [
    "MovingGrid",
    "AssembledSolution",
    "assemble_field",
    "kg_residual",
    "imag_q",
    "cumulative_from_zero",
    "d1_4",
    "d2_4",
    "write_solution_csv",
]


@dataclass(frozen=True)
class MovingGrid:
    """Uniform (tau, z) grid; z is symmetric about 0 and contains it."""

    tau_min: float
    tau_max: float
    n_tau: int
    points_per_unit: int = 64
    z_half_width: float | None = None

    def taus(self) -> np.ndarray:
        if self.n_tau < 1:
            raise ConfigError("n_tau must be positive")
        if self.n_tau == 1:
            return np.array([float(self.tau_min)])
        return np.linspace(self.tau_min, self.tau_max, self.n_tau)

    def zs(self, theta_bar: float) -> np.ndarray:
        half = theta_bar if self.z_half_width is None else min(self.z_half_width, theta_bar)
        n = int(math.ceil(half * self.points_per_unit))
        return (half / n) * np.arange(-n, n + 1)

    @classmethod
    def around(cls, tau_c: float, n_tau: int = 5, h_tau: float = 0.05, points_per_unit: int = 64, z_half_width=None):
        half = 0.5 * (n_tau - 1) * h_tau
        return cls(tau_c - half, tau_c + half, n_tau, points_per_unit, z_half_width)


@dataclass(frozen=True, eq=False)
class AssembledSolution:
    frame: FieldFrame
    sp: ScaleParams
    traj: Trajectory = field(repr=False)
    cfg: CharConfig
    taus: np.ndarray = field(repr=False)
    zs: np.ndarray = field(repr=False)
    Phi: np.ndarray = field(repr=False)
    theta: np.ndarray = field(repr=False)
    S: np.ndarray = field(repr=False)
    phi_b_tilde: np.ndarray = field(repr=False)
    sigma: np.ndarray = field(repr=False)
    s_phase: np.ndarray = field(repr=False)
    Psi: np.ndarray = field(repr=False)
    tau0: np.ndarray = field(repr=False)
    gamma0: float | None = None
    q: float = 1.0
    # 3D shape factor pi^{-1/2} a^{-1} exp(-(x1^2 + x2^2)/(2 a^2)), kept analytic
    transverse: str | None = "gaussian"

    @property
    def Z(self) -> np.ndarray:
        """zeta dS/dz."""
        return -self.theta

    @property
    def h_tau(self) -> float:
        return float(self.taus[1] - self.taus[0]) if self.taus.size > 1 else 0.0

    @property
    def h_z(self) -> float:
        return float(self.zs[1] - self.zs[0])

    @property
    def phi_b(self) -> np.ndarray:
        return self.sp.m * self.sp.c**2 / self.q * self.phi_b_tilde


# --------------------------------------------------------------------------
# stencils


def _lagrange_cell_weights(order: int = 6) -> np.ndarray:
    """w[k, j]: integral over [x_k, x_k + 1] of the j-th Lagrange basis on nodes 0..order-1."""
    nodes = np.arange(order, dtype=float)
    out = np.zeros((order - 1, order))
    for j in range(order):
        others = np.delete(nodes, j)
        poly = np.poly(others) / np.prod(nodes[j] - others)
        anti = np.polyint(poly)
        for k in range(order - 1):
            out[k, j] = np.polyval(anti, k + 1.0) - np.polyval(anti, float(k))
    return out


_CELL_W = _lagrange_cell_weights(6)


def _cumulative(f: np.ndarray, h: float) -> np.ndarray:
    """int_{x_0}^{x_i} f along the last axis, 6th order (needs >= 6 samples)."""
    n = f.shape[-1]
    if n < 6:
        raise ResolutionError("cumulative quadrature needs at least 6 samples")
    cells = np.empty(f.shape[:-1] + (n - 1,))
    for i in range(n - 1):
        start = min(max(i - 2, 0), n - 6)
        cells[..., i] = h * (f[..., start : start + 6] @ _CELL_W[i - start])
    out = np.zeros_like(f)
    out[..., 1:] = np.cumsum(cells, axis=-1)
    return out


def cumulative_from_zero(f: np.ndarray, zs: np.ndarray) -> np.ndarray:
    """int_0^z f(z1) dz1 on a uniform symmetric grid containing 0."""
    i0 = int(np.flatnonzero(zs == 0.0)[0])
    h = float(zs[1] - zs[0])
    full = _cumulative(f, h)
    return full - full[..., i0 : i0 + 1]


def d1_4(f: np.ndarray, h: float, axis: int) -> np.ndarray:
    """4th-order first derivative; one-sided 4th-order stencils at the two edge points."""
    f = np.moveaxis(f, axis, 0)
    n = f.shape[0]
    if n < 5:
        raise ResolutionError("4th-order stencil needs at least 5 samples")
    d = np.empty_like(f)
    d[2:-2] = (f[:-4] - 8.0 * f[1:-3] + 8.0 * f[3:-1] - f[4:]) / (12.0 * h)
    d[0] = (-25.0 * f[0] + 48.0 * f[1] - 36.0 * f[2] + 16.0 * f[3] - 3.0 * f[4]) / (12.0 * h)
    d[1] = (-3.0 * f[0] - 10.0 * f[1] + 18.0 * f[2] - 6.0 * f[3] + f[4]) / (12.0 * h)
    d[-1] = (25.0 * f[-1] - 48.0 * f[-2] + 36.0 * f[-3] - 16.0 * f[-4] + 3.0 * f[-5]) / (12.0 * h)
    d[-2] = (3.0 * f[-1] + 10.0 * f[-2] - 18.0 * f[-3] + 6.0 * f[-4] - f[-5]) / (12.0 * h)
    return np.moveaxis(d, 0, axis)


def d2_4(f: np.ndarray, h: float, axis: int) -> np.ndarray:
    """4th-order second derivative on interior points (two edge points per side are NaN)."""
    f = np.moveaxis(f, axis, 0)
    if f.shape[0] < 5:
        raise ResolutionError("4th-order stencil needs at least 5 samples")
    d = np.full_like(f, np.nan)
    d[2:-2] = (-f[:-4] + 16.0 * f[1:-3] - 30.0 * f[2:-2] + 16.0 * f[3:-1] - f[4:]) / (12.0 * h * h)
    return np.moveaxis(d, 0, axis)


# --------------------------------------------------------------------------
# assembly


def imag_q(tau, sp: ScaleParams, traj: Trajectory) -> np.ndarray:
    """Imaginary part of the Gaussian substitution: zeta (d gamma + 2 gamma d sigma)."""
    k = kinematics(tau, sp, traj)
    return sp.zeta * (k.dgamma + 2.0 * k.gamma * k.dsigma)


def _s_phase(ts: np.ndarray, traj: Trajectory, phi0: Callable, q: float, chi: float, omega0: float, rtol: float):
    """s(t) = int_0^t [q phi0/chi + omega0/gamma] dt' on sorted times."""

    def integrand(t):
        return q * float(phi0(t)) / chi + omega0 / float(traj.gamma(t))

    out = np.empty_like(ts)
    prev_t, acc = 0.0, 0.0
    order = np.argsort(np.abs(ts), kind="stable")
    # integrate outward from 0 in both directions, reusing partial sums
    for sign in (1.0, -1.0):
        prev_t, acc = 0.0, 0.0
        for i in order:
            t = ts[i]
            if (t >= 0.0) != (sign > 0):
                continue
            if t != prev_t:
                val, _ = integrate.quad(integrand, prev_t, t, epsabs=0.0, epsrel=rtol, limit=200)
                acc += val
                prev_t = t
            out[i] = acc
    return out


def assemble_field(
    traj: Trajectory,
    sp: ScaleParams,
    grid: MovingGrid,
    phi0: Callable | None = None,
    gamma0: float | None = None,
    cfg: CharConfig | None = None,
    q: float = 1.0,
    chunk: int = 4096,
) -> AssembledSolution:
    """psi_1D = a^{-1/2} Psi exp(i S_hat) and phi = phi_ac + phi_b on the moving grid.

    S_hat = omega0 c^-2 gamma v y - s(t) - S(tau, z), y = a z.  phi_b needs
    d/dtau of int Theta, taken by central differences on two extra tau
    sub-levels per level (step theta_bar * cfg.fd_step_factor).
    """
    cfg = cfg or CharConfig()
    if gamma0 is not None:
        if not gamma0 >= 1.0:
            raise ConfigError("gamma0 must be >= 1")
        if cfg.gamma0 != gamma0:
            cfg = CharConfig(**{**cfg.__dict__, "gamma0": gamma0})
    gamma0 = cfg.gamma0
    phi0 = phi0 or (lambda t: 0.0)
    _problem(sp, traj, cfg)  # validates admissibility up front
    taus = grid.taus()
    zs = grid.zs(sp.theta_bar)
    h_b = sp.theta_bar * cfg.fd_step_factor
    levels = np.concatenate([taus, taus - h_b, taus + h_b])
    T, Zg = np.meshgrid(levels, zs, indexing="ij")
    tau_p, z_p = T.ravel(), Zg.ravel()
    phi = np.empty_like(tau_p)
    t0 = np.empty_like(tau_p)
    # chunk whole levels together so each level shares one step sequence
    per = max(1, chunk // zs.size) * zs.size
    for lo in range(0, tau_p.size, per):
        phi[lo : lo + per], t0[lo : lo + per] = phi_points(tau_p[lo : lo + per], z_p[lo : lo + per], sp, traj, cfg)
    phi = phi.reshape(T.shape)
    t0 = t0.reshape(T.shape)
    th = theta_of_phi(phi, T, Zg, sp, traj, cfg.q_form, gamma0).theta_val
    integ = cumulative_from_zero(th, zs)
    n = taus.size
    Phi, theta, I0 = phi[:n], th[:n], integ[:n]
    d_int = (integ[2 * n :] - integ[n : 2 * n]) / (2.0 * h_b)
    k = kinematics(taus, sp, traj)
    beta = k.beta[:, None]
    phi_b_t = Phi - d_int + beta * theta
    S = -I0 / sp.zeta

    kap = 1.0 if gamma0 is None else gamma0**2
    sigma = k.sigma + (0.0 if gamma0 is None else 0.5 * math.log(gamma0))
    Psi = math.pi**-0.25 * np.exp(sigma[:, None] - 0.5 * kap * zs[None, :] ** 2)
    ts = sp.t_of(taus)
    pp = PhysParams(m=sp.m, c=sp.c, q=q, chi=sp.chi, a=sp.a)
    s_ph = _s_phase(ts, traj, phi0, q, sp.chi, sp.omega0, 1e-13)
    y = sp.a * zs[None, :]
    v = (sp.c * k.beta)[:, None]
    s_hat = sp.omega0 / sp.c**2 * k.gamma[:, None] * v * y - s_ph[:, None] - S
    psi = sp.a**-0.5 * Psi * np.exp(1j * s_hat)
    slope = -(sp.m / q) * sp.c * np.asarray(traj.d_gamma_beta(ts), dtype=float)
    phi0_v = np.array([float(phi0(t)) for t in ts])
    phi_tot = phi0_v[:, None] + slope[:, None] * y + sp.m * sp.c**2 / q * phi_b_t
    h_t = sp.a / sp.c * (float(taus[1] - taus[0]) if n > 1 else 1.0)
    frame = FieldFrame(
        psi=psi,
        phi=phi_tot,
        spacing=(h_t, sp.a * float(zs[1] - zs[0])),
        origin=(float(ts[0]), sp.a * float(zs[0])),
        params=pp,
        frame=FrameKind.MOVING,
    )
    return AssembledSolution(
        frame=frame,
        sp=sp,
        traj=traj,
        cfg=cfg,
        taus=taus,
        zs=zs,
        Phi=Phi,
        theta=theta,
        S=S,
        phi_b_tilde=phi_b_t,
        sigma=sigma,
        s_phase=s_ph,
        Psi=Psi,
        tau0=t0[:n],
        gamma0=gamma0,
        q=q,
        transverse="gaussian" if sp.mode is Mode.NONLINEAR else None,
    )


def _g1d_prime(nl: Nonlinearity, Psi2: np.ndarray) -> np.ndarray:
    if nl.mode is Mode.LINEAR:
        return np.zeros_like(Psi2)
    if not nl.log_shift:
        raise ConfigError("the Gaussian construction reduces to 1D only for the logarithmic nonlinearity")
    return -(np.log(math.sqrt(math.pi) * Psi2) + 1.0)


def kg_residual(
    sol: AssembledSolution, nl: Nonlinearity, ablate_balancing: bool = False, min_points_per_unit: int = 64
) -> dict:
    """Pointwise |R / Psi| of the rescaled moving-frame KG operator.

    The effective phases are rebuilt from the sampled fields,
    Phi_e = -zeta S_tau + beta zeta S_z + phi_b~ and Z_e = zeta S_z, and
    differentiated with 4th-order stencils; derivatives of ln Psi are exact.
    Norms are over levels and z nodes at least two samples from the edge.
    """
    if nl.mode is not sol.sp.mode:
        raise ConfigError("nonlinearity mode differs from the construction mode")
    if sol.taus.size < 5:
        raise ResolutionError("kg_residual needs at least 5 tau levels")
    if 1.0 / sol.h_z < min_points_per_unit * (1.0 - 1e-12):
        raise ResolutionError(f"z resolution {1.0 / sol.h_z:.1f} per unit is below {min_points_per_unit}")
    sp = sol.sp
    zeta = sp.zeta
    ht, hz = sol.h_tau, sol.h_z
    S = sol.S
    pbt = np.zeros_like(sol.phi_b_tilde) if ablate_balancing else sol.phi_b_tilde
    S_t = d1_4(S, ht, 0)
    S_z = d1_4(S, hz, 1)
    S_tt = d2_4(S, ht, 0)
    S_zz = d2_4(S, hz, 1)
    S_tz = d1_4(S_t, hz, 1)
    pb_t = d1_4(pbt, ht, 0)
    pb_z = d1_4(pbt, hz, 1)

    k = kinematics(sol.taus, sp, sol.traj)
    beta, dbeta = k.beta[:, None], k.dbeta[:, None]
    gamma, dgamma = k.gamma[:, None], k.dgamma[:, None]
    ds, d2s = k.dsigma[:, None], k.d2sigma[:, None]
    z = sol.zs[None, :]
    kap = 1.0 if sol.gamma0 is None else sol.gamma0**2

    Phi_e = -zeta * S_t + beta * zeta * S_z + pbt
    Z_e = zeta * S_z
    dPhi_tau = -zeta * S_tt + dbeta * zeta * S_z + beta * zeta * S_tz + pb_t
    dPhi_z = -zeta * S_tz + beta * zeta * S_zz + pb_z
    dZ_z = zeta * S_zz

    # time part: T = zeta (d_tau - beta d_z) + i (Phi_e - gamma)
    u = zeta * (ds + kap * beta * z) + 1j * (Phi_e - gamma)
    du = zeta * (d2s + kap * dbeta * z - kap * beta**2) + 1j * (dPhi_tau - beta * dPhi_z - dgamma)
    time_part = u * u + zeta * du
    # space part: P = zeta d_z + i (gamma beta - Z_e)
    e = -zeta * kap * z + 1j * (gamma * beta - Z_e)
    space_part = e * e + zeta * (-zeta * kap - 1j * dZ_z)
    g = _g1d_prime(nl, sol.Psi**2)
    r = -time_part + space_part - zeta**2 * g - 1.0
    inner = r[2:-2, 2:-2]
    absr = np.abs(inner)
    return {
        "linf": float(np.max(absr)),
        "l2": float(np.sqrt(np.mean(absr**2))),
        "linf_real": float(np.max(np.abs(inner.real))),
        "linf_imag": float(np.max(np.abs(inner.imag))),
        "floor": float(sol.cfg.rtol),
        "n_levels": int(inner.shape[0]),
        "ablated": bool(ablate_balancing),
    }


def write_solution_csv(path, sol: AssembledSolution) -> None:
    """Columns tau, z, re_psi, im_psi, phi, Phi, Z, S (physical psi and phi)."""
    with open(path, "w", newline="") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(["tau", "z", "re_psi", "im_psi", "phi", "Phi", "Z", "S"])
        psi, phi = sol.frame.psi, sol.frame.phi
        Z = sol.Z
        for i, tau in enumerate(sol.taus):
            for j, z in enumerate(sol.zs):
                w.writerow(
                    [
                        repr(float(tau)),
                        repr(float(z)),
                        repr(float(psi[i, j].real)),
                        repr(float(psi[i, j].imag)),
                        repr(float(phi[i, j])),
                        repr(float(sol.Phi[i, j])),
                        repr(float(Z[i, j])),
                        repr(float(sol.S[i, j])),
                    ]
                )
