"""Noether densities of the KG field (A = 0) and discrete conservation residuals."""

from __future__ import annotations

import csv
import enum
import math
from dataclasses import dataclass, field
from typing import Sequence

import numpy as np

from .errors import DomainError, InvalidFieldError, ParameterDomainError, ShapeError
from .nonlinearity import Mode, Nonlinearity, eval_g

__all__ = [
    "PhysParams",
    "FrameKind",
    "FieldFrame",
    "DensityGrid",
    "Ball",
    "densities",
    "conservation_residuals",
    "totals",
    "write_density_csv",
]


@dataclass(frozen=True)
class PhysParams:
    m: float = 1.0
    c: float = 1.0
    q: float = 1.0
    chi: float = 1.0
    a: float = 1.0

    def __post_init__(self):
        for name in ("m", "c", "q", "chi", "a"):
            val = getattr(self, name)
            if not (math.isfinite(val) and val > 0.0):
                raise ParameterDomainError(f"{name} must be positive and finite, got {val}")

    @property
    def a_C(self) -> float:
        return self.chi / (self.m * self.c)

    @property
    def kappa0(self) -> float:
        return self.m * self.c / self.chi

    @property
    def omega0(self) -> float:
        return self.m * self.c**2 / self.chi


class FrameKind(str, enum.Enum):
    LAB = "lab"
    MOVING = "moving"


@dataclass(frozen=True, eq=False)
class FieldFrame:
    """Samples of psi and phi on a uniform grid; axis 0 is time.

    ``spacing`` and ``origin`` list (t, x[, y, z]).  A single time slice is
    allowed for quantities without time derivatives.
    """

    psi: np.ndarray = field(repr=False)
    phi: np.ndarray = field(repr=False)
    spacing: tuple[float, ...]
    origin: tuple[float, ...]
    params: PhysParams = PhysParams()
    frame: FrameKind = FrameKind.LAB

    def __post_init__(self):
        if self.psi.shape != self.phi.shape:
            raise ShapeError(f"psi {self.psi.shape} and phi {self.phi.shape} differ")
        if self.psi.ndim not in (2, 4):
            raise ShapeError("frames are (nt, nx) or (nt, nx, ny, nz)")
        if len(self.spacing) != self.psi.ndim or len(self.origin) != self.psi.ndim:
            raise ShapeError("spacing/origin length must match array rank")
        if any(not (h > 0.0) for h in self.spacing):
            raise ParameterDomainError("grid spacings must be positive")

    @property
    def dim(self) -> int:
        return self.psi.ndim - 1

    def axis(self, k: int) -> np.ndarray:
        return self.origin[k] + self.spacing[k] * np.arange(self.psi.shape[k])

    def times(self) -> np.ndarray:
        return self.axis(0)

    def mesh(self) -> list[np.ndarray]:
        """Spatial coordinate arrays broadcastable against one time slice."""
        axes = [self.axis(k) for k in range(1, self.psi.ndim)]
        return list(np.meshgrid(*axes, indexing="ij", sparse=True))


@dataclass(frozen=True, eq=False)
class DensityGrid:
    rho: np.ndarray
    energy: np.ndarray
    lagrangian: np.ndarray
    current: np.ndarray
    momentum: np.ndarray
    force: np.ndarray
    spacing: tuple[float, ...]
    origin: tuple[float, ...]
    times: np.ndarray


@dataclass(frozen=True)
class Ball:
    center: tuple[float, ...]
    radius: float


def _grad(f, h, axis):
    return np.gradient(f, h, axis=axis, edge_order=2)


def _time_derivative(psi, h_t, index):
    nt = psi.shape[0]
    if index is None:
        return _grad(psi, h_t, 0)
    if nt < 3:
        raise ShapeError("time derivative needs at least 3 slices")
    if 0 < index < nt - 1:
        return (psi[index + 1] - psi[index - 1]) / (2.0 * h_t)
    if index == 0:
        return (-3.0 * psi[0] + 4.0 * psi[1] - psi[2]) / (2.0 * h_t)
    return (3.0 * psi[-1] - 4.0 * psi[-2] + psi[-3]) / (2.0 * h_t)


def _pieces(frame: FieldFrame, nl: Nonlinearity, index):
    pp = frame.params
    psi_all = frame.psi
    if not (np.all(np.isfinite(psi_all)) and np.all(np.isfinite(frame.phi))):
        raise InvalidFieldError("frame contains NaN or Inf")
    if index is None:
        psi = psi_all
        phi = frame.phi
        off = 1
    else:
        psi = psi_all[index]
        phi = frame.phi[index]
        off = 0
    for k in range(1, psi_all.ndim):
        if psi_all.shape[k] < 5:
            raise ShapeError("each differentiated axis needs at least 5 samples")
    dt = _time_derivative(psi_all, frame.spacing[0], index)
    cov_t = dt + 1j * (pp.q / pp.chi) * phi * psi
    grads = [_grad(psi, frame.spacing[k], k - 1 + off) for k in range(1, psi_all.ndim)]
    gphi = [_grad(phi, frame.spacing[k], k - 1 + off) for k in range(1, psi_all.ndim)] if np.any(phi) else None
    s = (psi * np.conj(psi)).real
    if nl.mode is Mode.LINEAR:
        g = np.zeros_like(s)
    else:
        g = eval_g(nl, s, pp.a).g
    return psi, phi, cov_t, grads, gphi, s, g


def densities(frame: FieldFrame, nl: Nonlinearity, time_index: int | None = None) -> DensityGrid:
    """rho, E, L1, J, P, F on every sample (or on one time slice).

    Derivatives are 2nd-order central with 2nd-order one-sided ends.
    """
    pp = frame.params
    m, c, q, chi = pp.m, pp.c, pp.q, pp.chi
    psi, phi, cov_t, grads, gphi, s, g = _pieces(frame, nl, time_index)
    pref = chi * chi / (2.0 * m)
    kin_t = (cov_t * np.conj(cov_t)).real / c**2
    kin_x = sum((d * np.conj(d)).real for d in grads)
    mass = pp.kappa0**2 * s
    rho = -(chi * q / (m * c * c)) * (np.conj(psi) * cov_t).imag
    current = np.stack([(chi * q / m) * (np.conj(psi) * d).imag for d in grads])
    momentum = np.stack([-(pref / c**2) * 2.0 * (cov_t * np.conj(d)).real for d in grads])
    if gphi is None:
        force = np.zeros_like(current)
    else:
        force = np.stack([-rho * gp for gp in gphi])
    times = frame.times() if time_index is None else frame.times()[time_index : time_index + 1]
    return DensityGrid(
        rho=rho,
        energy=pref * (kin_t + kin_x + g + mass),
        lagrangian=pref * (kin_t - kin_x - mass - g),
        current=current,
        momentum=momentum,
        force=force,
        spacing=frame.spacing,
        origin=frame.origin,
        times=times,
    )


def _interior(arr, margin, lead=0):
    sl = [slice(None)] * lead + [slice(margin, -margin)] * (arr.ndim - lead)
    return arr[tuple(sl)]


def conservation_residuals(frames: FieldFrame | Sequence[FieldFrame], nl: Nonlinearity, margin: int = 2) -> dict:
    """Max-norm of the discrete continuity, energy and momentum balances.

    ``frames`` is either one FieldFrame holding a time stack or a list of
    single-slice frames on identical spatial grids.
    """
    frame = _stack(frames)
    if frame.psi.shape[0] < 5:
        raise ShapeError("conservation residuals need at least 5 time slices")
    pp = frame.params
    h = frame.spacing
    dg = densities(frame, nl)
    nd = frame.dim
    cont = _grad(dg.rho, h[0], 0) + sum(_grad(dg.current[i], h[i + 1], i + 1) for i in range(nd))
    gphi = [_grad(frame.phi, h[i + 1], i + 1) for i in range(nd)]
    energy = (
        _grad(dg.energy, h[0], 0)
        + pp.c**2 * sum(_grad(dg.momentum[i], h[i + 1], i + 1) for i in range(nd))
        + sum(gphi[i] * dg.current[i] for i in range(nd))
    )
    pref = pp.chi**2 / (2.0 * pp.m)
    grads = [_grad(frame.psi, h[j + 1], j + 1) for j in range(nd)]
    mom = 0.0
    for i in range(nd):
        comp = _grad(dg.momentum[i], h[0], 0) - dg.force[i] + _grad(dg.lagrangian, h[i + 1], i + 1)
        for j in range(nd):
            flux = 2.0 * (grads[j] * np.conj(grads[i])).real
            comp = comp + pref * _grad(flux, h[j + 1], j + 1)
        mom = max(mom, float(np.max(np.abs(_interior(comp, margin)))))
    return {
        "continuity": float(np.max(np.abs(_interior(cont, margin)))),
        "energy": float(np.max(np.abs(_interior(energy, margin)))),
        "momentum": mom,
    }


def _stack(frames) -> FieldFrame:
    if isinstance(frames, FieldFrame):
        return frames
    frames = list(frames)
    if not frames:
        raise ShapeError("empty frame list")
    ref = frames[0]
    for fr in frames[1:]:
        if fr.psi.shape[1:] != ref.psi.shape[1:] or fr.spacing[1:] != ref.spacing[1:] or fr.origin[1:] != ref.origin[1:]:
            raise ShapeError("frames have mismatched spatial grids")
    times = np.concatenate([fr.times() for fr in frames])
    steps = np.diff(times)
    if steps.size and not np.allclose(steps, steps[0], rtol=1e-9, atol=0.0):
        raise ShapeError("time slices are not uniformly spaced")
    h_t = float(steps[0]) if steps.size else ref.spacing[0]
    return FieldFrame(
        psi=np.concatenate([fr.psi for fr in frames]),
        phi=np.concatenate([fr.phi for fr in frames]),
        spacing=(h_t,) + tuple(ref.spacing[1:]),
        origin=(float(times[0]),) + tuple(ref.origin[1:]),
        params=ref.params,
        frame=ref.frame,
    )


def _trap_weights(n, h):
    w = np.full(n, h)
    w[0] = w[-1] = 0.5 * h
    return w


def totals(dg: DensityGrid, domain: Ball | str = "all", time_index: int = 0) -> dict:
    """Trapezoidal integrals of one time slice; the energy is the plain integral of E."""
    spatial = dg.rho.shape[1:] if dg.rho.ndim == len(dg.spacing) else dg.rho.shape
    sliced = dg.rho.ndim == len(dg.spacing)
    nd = len(spatial)
    weights = np.ones(spatial)
    axes = []
    for k in range(nd):
        w = _trap_weights(spatial[k], dg.spacing[k + 1])
        shape = [1] * nd
        shape[k] = spatial[k]
        weights = weights * w.reshape(shape)
        axes.append((dg.origin[k + 1] + dg.spacing[k + 1] * np.arange(spatial[k])).reshape(shape))
    if isinstance(domain, Ball):
        if len(domain.center) != nd:
            raise DomainError("ball dimension mismatch")
        for k in range(nd):
            lo, hi = axes[k].min(), axes[k].max()
            if domain.center[k] - domain.radius < lo - 1e-12 or domain.center[k] + domain.radius > hi + 1e-12:
                raise DomainError("ball exceeds the grid")
        r2 = sum((axes[k] - domain.center[k]) ** 2 for k in range(nd))
        weights = weights * (r2 <= domain.radius**2)
    elif domain != "all":
        raise DomainError(f"unknown domain {domain!r}")

    def pick(arr, lead=0):
        if sliced:
            return arr[(slice(None),) * lead + (time_index,)]
        return arr

    def integ(f):
        return float(np.sum(f * weights))

    return {
        "charge": integ(pick(dg.rho)),
        "energy": integ(pick(dg.energy)),
        "momentum": [integ(pick(dg.momentum[i])) for i in range(nd)],
        "current": [integ(pick(dg.current[i])) for i in range(nd)],
    }


def write_density_csv(path, frame: FieldFrame, dg: DensityGrid, time_index: int = 0) -> None:
    """One row per grid point of one time slice; schema in FORMATS.md."""
    nd = frame.dim
    names = ["x", "y", "z"][:nd]
    sliced = dg.rho.ndim == frame.psi.ndim
    sel = (lambda a: a[time_index]) if sliced else (lambda a: a)
    coords = np.meshgrid(*[frame.axis(k) for k in range(1, nd + 1)], indexing="ij")
    cols = [np.full(coords[0].size, float(frame.times()[time_index]))]
    cols += [c.ravel() for c in coords]
    cols += [sel(dg.rho).ravel(), sel(dg.energy).ravel()]
    for vec in (dg.current, dg.momentum, dg.force):
        cols += [(vec[i][time_index] if sliced else vec[i]).ravel() for i in range(nd)]
    header = ["t", *names, "rho", "energy"]
    header += [f"J_{n}" for n in names] + [f"P_{n}" for n in names] + [f"F_{n}" for n in names]
    data = np.column_stack(cols)
    with open(path, "w", newline="") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(header)
        for row in data:
            w.writerow([repr(float(v)) for v in row])
