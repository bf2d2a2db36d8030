"""Rectilinear trajectories along the y axis and their admissibility bounds."""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .errors import ConfigError, KinematicsError

__all__ = [
    "Trajectory",
    "ConstantBeta",
    "TanhBeta",
    "PolynomialBeta",
    "Admissibility",
    "check_admissible",
    "ConstantPotential",
    "make_trajectory",
]


class Trajectory:
    """beta(t) and its first three time derivatives; motion along y with y(0) = 0."""

    c: float = 1.0

    def beta(self, t):
        raise NotImplementedError

    def dbeta(self, t):
        raise NotImplementedError

    def d2beta(self, t):
        raise NotImplementedError

    def d3beta(self, t):
        raise NotImplementedError

    def position(self, t):
        raise NotImplementedError

    # derived kinematics ---------------------------------------------------
    def velocity(self, t):
        return self.c * self.beta(t)

    def gamma(self, t):
        b = np.asarray(self.beta(t), dtype=float)
        return 1.0 / np.sqrt(1.0 - b * b)

    def sigma(self, t):
        b = np.asarray(self.beta(t), dtype=float)
        return 0.25 * np.log1p(-b * b)

    def dsigma(self, t):
        b = np.asarray(self.beta(t), dtype=float)
        return -0.5 * b * self.dbeta(t) / (1.0 - b * b)

    def d2sigma(self, t):
        b = np.asarray(self.beta(t), dtype=float)
        g2 = 1.0 / (1.0 - b * b)
        db = self.dbeta(t)
        return -0.5 * (2.0 * g2 * g2 * b * b * db * db + g2 * db * db + g2 * b * self.d2beta(t))

    def dgamma(self, t):
        b = np.asarray(self.beta(t), dtype=float)
        return self.gamma(t) ** 3 * b * self.dbeta(t)

    def d_gamma_beta(self, t):
        """d(gamma beta)/dt = gamma^3 dbeta/dt."""
        return self.gamma(t) ** 3 * self.dbeta(t)

    def d2_gamma_beta(self, t):
        b = np.asarray(self.beta(t), dtype=float)
        g = self.gamma(t)
        db = self.dbeta(t)
        return 3.0 * g**5 * b * db * db + g**3 * self.d2beta(t)

    def b_fn(self, t):
        b = np.asarray(self.beta(t), dtype=float)
        return 1.0 / b - b


@dataclass(frozen=True)
class ConstantBeta(Trajectory):
    beta0: float
    c: float = 1.0

    def beta(self, t):
        return np.full_like(np.asarray(t, dtype=float), self.beta0)

    def dbeta(self, t):
        return np.zeros_like(np.asarray(t, dtype=float))

    d2beta = dbeta
    d3beta = dbeta

    def position(self, t):
        return self.c * self.beta0 * np.asarray(t, dtype=float)


@dataclass(frozen=True)
class TanhBeta(Trajectory):
    """beta(t) = beta0 + beta1 tanh(k t)."""

    beta0: float
    beta1: float
    k: float = 1.0
    c: float = 1.0

    def beta(self, t):
        return self.beta0 + self.beta1 * np.tanh(self.k * np.asarray(t, dtype=float))

    def dbeta(self, t):
        u = np.tanh(self.k * np.asarray(t, dtype=float))
        return self.beta1 * self.k * (1.0 - u * u)

    def d2beta(self, t):
        u = np.tanh(self.k * np.asarray(t, dtype=float))
        return -2.0 * self.beta1 * self.k**2 * u * (1.0 - u * u)

    def d3beta(self, t):
        u = np.tanh(self.k * np.asarray(t, dtype=float))
        return -2.0 * self.beta1 * self.k**3 * (1.0 - u * u) * (1.0 - 3.0 * u * u)

    def position(self, t):
        x = self.k * np.asarray(t, dtype=float)
        ax = np.abs(x)
        log_cosh = ax + np.log1p(np.exp(-2.0 * ax)) - math.log(2.0)
        return self.c * (self.beta0 * np.asarray(t, dtype=float) + self.beta1 / self.k * log_cosh)


@dataclass(frozen=True)
class PolynomialBeta(Trajectory):
    """beta(t) = sum_i coeffs[i] t^i."""

    coeffs: tuple[float, ...]
    c: float = 1.0

    def _eval(self, coeffs, t):
        t = np.asarray(t, dtype=float)
        out = np.zeros_like(t)
        for cf in reversed(coeffs):
            out = out * t + cf
        return out

    def _deriv(self, n):
        cf = list(self.coeffs)
        for _ in range(n):
            cf = [i * cf[i] for i in range(1, len(cf))] or [0.0]
        return cf

    def beta(self, t):
        return self._eval(self.coeffs, t)

    def dbeta(self, t):
        return self._eval(self._deriv(1), t)

    def d2beta(self, t):
        return self._eval(self._deriv(2), t)

    def d3beta(self, t):
        return self._eval(self._deriv(3), t)

    def position(self, t):
        integ = [0.0] + [cf / (i + 1) for i, cf in enumerate(self.coeffs)]
        return self.c * self._eval(integ, t)


@dataclass(frozen=True)
class Admissibility:
    eps1: float
    beta_check: float
    eps_hat: float
    derivative_bound: float
    b_min: float
    b_max: float


def check_admissible(traj: Trajectory, t_window: tuple[float, float], n: int = 4001) -> Admissibility:
    """Dense-sample the speed bounds; raise when beta reaches 0 or 1 in magnitude."""
    t = np.linspace(t_window[0], t_window[1], n)
    b = np.abs(np.asarray(traj.beta(t), dtype=float))
    eps1 = float(np.max(b))
    bmin = float(np.min(b))
    if not eps1 < 1.0:
        raise KinematicsError(f"max |beta| = {eps1} is not below 1")
    if not bmin > 0.0:
        raise KinematicsError("beta vanishes on the working interval")
    signs = np.sign(np.asarray(traj.beta(t), dtype=float))
    if np.any(signs != signs[0]):
        raise KinematicsError("beta changes sign on the working interval")
    c = traj.c
    dv = np.abs(c * np.asarray(traj.dbeta(t)))
    d2v = np.abs(c * np.asarray(traj.d2beta(t)))
    bound = float(np.max(c * b + dv + d2v))
    eps_hat = float(np.max(np.abs(traj.dbeta(t)) + np.abs(traj.d2beta(t)) + np.abs(traj.d3beta(t))))
    bf = 1.0 / b - b
    return Admissibility(eps1, bmin, eps_hat, bound, float(np.min(bf)), float(np.max(bf)))


@dataclass(frozen=True)
class ConstantPotential:
    """phi_0(t) = value; the y-independent part of the accelerating potential."""

    value: float = 0.0

    def __call__(self, t):
        return np.full_like(np.asarray(t, dtype=float), self.value)


def make_trajectory(kind: str, params: dict, c: float = 1.0) -> Trajectory:
    kind = kind.strip().lower()
    try:
        if kind in ("constant", "constant_beta"):
            return ConstantBeta(float(params["beta0"]), c=c)
        if kind in ("tanh", "tanh_beta"):
            return TanhBeta(float(params["beta0"]), float(params["beta1"]), float(params.get("k", 1.0)), c=c)
        if kind in ("polynomial", "polynomial_beta"):
            coeffs = params["coeffs"]
            if isinstance(coeffs, str):
                coeffs = [float(x) for x in coeffs.replace(",", " ").split()]
            return PolynomialBeta(tuple(float(x) for x in coeffs), c=c)
    except KeyError as exc:
        raise ConfigError(f"trajectory '{kind}' is missing parameter {exc}") from exc
    raise ConfigError(f"unknown trajectory kind '{kind}'")
