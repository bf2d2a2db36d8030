"""Uniformly moving charges obtained from rest states by a Lorentz boost."""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Callable

import numpy as np

from .densities import FieldFrame, FrameKind, PhysParams
from .errors import KinematicsError, ParameterDomainError
from .nonlinearity import GAUSS_CONST

__all__ = ["BoostSpec", "gausson_profile", "boosted_field", "free_observables", "lab_grid"]


def gausson_profile(r):
    """Unit-norm Gaussian radial profile of unit size."""
    r = np.asarray(r, dtype=float)
    return GAUSS_CONST * np.exp(-0.5 * r * r)


@dataclass(frozen=True)
class BoostSpec:
    v: tuple[float, float, float]
    omega: float
    profile: Callable[[np.ndarray], np.ndarray] = field(default=gausson_profile, repr=False)
    params: PhysParams = PhysParams()

    def __post_init__(self):
        if len(self.v) != 3:
            raise KinematicsError("velocity must be a 3-vector")
        if not self.omega > 0.0:
            raise ParameterDomainError("omega must be positive")
        if self.speed >= self.params.c:
            raise KinematicsError(f"|v| = {self.speed} must be below c = {self.params.c}")

    @property
    def speed(self) -> float:
        return math.sqrt(sum(x * x for x in self.v))

    @property
    def beta(self) -> float:
        return self.speed / self.params.c

    @property
    def gamma(self) -> float:
        return 1.0 / math.sqrt(1.0 - self.beta**2)

    @property
    def wavevector(self) -> np.ndarray:
        return self.gamma * self.omega * np.asarray(self.v, dtype=float) / self.params.c**2

    @property
    def charge_norm(self) -> float:
        """|psi|^2 mass omega_0/omega fixing the total charge to q."""
        return self.params.omega0 / self.omega


def lab_grid(spec: BoostSpec, half_width: float, points_per_a: int, times) -> dict:
    """Cubic lab grid centred at the origin with spacing a/points_per_a."""
    a = spec.params.a
    h = a / points_per_a
    n = 2 * int(round(half_width / h)) + 1
    times = np.asarray(times, dtype=float)
    h_t = float(times[1] - times[0]) if times.size > 1 else 1.0
    return {"n": n, "h": h, "origin": -h * (n // 2), "t0": float(times[0]), "h_t": h_t, "nt": times.size}


def boosted_field(spec: BoostSpec, grid: dict) -> FieldFrame:
    """psi(t,x) = exp(-i(gamma omega t - k.x)) psi_a(x') with phi = 0."""
    pp = spec.params
    a = pp.a
    n, h, o = grid["n"], grid["h"], grid["origin"]
    nt, t0, h_t = grid["nt"], grid["t0"], grid["h_t"]
    ax = o + h * np.arange(n)
    x, y, z = np.meshgrid(ax, ax, ax, indexing="ij", sparse=True)
    v = np.asarray(spec.v, dtype=float)
    g = spec.gamma
    k = spec.wavevector
    amp = math.sqrt(spec.charge_norm) * a**-1.5
    psi = np.empty((nt, n, n, n), dtype=complex)
    spatial_phase = np.exp(1j * (k[0] * x + k[1] * y + k[2] * z))
    speed = spec.speed
    for it in range(nt):
        t = t0 + h_t * it
        if speed > 0.0:
            vx = (v[0] * x + v[1] * y + v[2] * z) / speed**2
            xp = [x + (g - 1.0) * vx * v[0] - g * v[0] * t,
                  y + (g - 1.0) * vx * v[1] - g * v[1] * t,
                  z + (g - 1.0) * vx * v[2] - g * v[2] * t]
        else:
            xp = [x, y, z]
        r = np.sqrt(xp[0] ** 2 + xp[1] ** 2 + xp[2] ** 2) / a
        psi[it] = amp * spec.profile(r) * spatial_phase * np.exp(-1j * g * spec.omega * t)
    return FieldFrame(
        psi=psi,
        phi=np.zeros(psi.shape),
        spacing=(h_t, h, h, h),
        origin=(t0, o, o, o),
        params=pp,
        frame=FrameKind.LAB,
    )


def free_observables(spec: BoostSpec, theta: float) -> dict:
    if theta < 0.0:
        raise ParameterDomainError("theta must be non-negative")
    pp = spec.params
    g = spec.gamma
    mass = g * pp.m * (1.0 + theta)
    energy = mass * pp.c**2
    return {
        "energy": energy,
        "momentum": [mass * vi for vi in spec.v],
        "mass": mass,
        "rest_mass": pp.m * (1.0 + theta),
        "einstein_defect": energy - mass * pp.c**2,
    }
