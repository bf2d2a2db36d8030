"""Ground-state form factors and the nonlinearities they induce.

A positive, strictly decreasing radial profile psi(r) determines a nonlinearity
through the equilibrium relation lap(psi) = G'(psi^2) psi, i.e.

    G'(s) = lap(psi)(r) / psi(r)   with r = r(s) the inverse of s = psi(r)^2.

Three families are supported (power law, exponential, Gaussian).  The Gaussian
profile yields the logarithmic nonlinearity, which is also provided in closed
form because the rest-state solver and the moving-frame construction use it
in hot loops.
"""

from __future__ import annotations

import enum
import math
import warnings
from dataclasses import dataclass, field
from typing import Callable

import numpy as np
from scipy import integrate, special
from scipy.interpolate import PchipInterpolator

from .errors import ConsistencyError, ParameterDomainError

__all__ = [
    "Family",
    "Mode",
    "GroundState",
    "Nonlinearity",
    "GEval",
    "make_ground_state",
    "nonlinearity_from_ground_state",
    "logarithmic_nonlinearity",
    "linear_nonlinearity",
    "closed_form_gprime",
    "eval_g",
    "equilibrium_residual",
    "holder_sup",
    "GAUSS_CONST",
]

GAUSS_CONST = math.pi ** -0.75
# ln(psi^2) below this is treated as the end of the inversion table; it is
# under the smallest subnormal double, so every positive s is covered.
_LN_FLOOR = -760.0


class Family(str, enum.Enum):
    POWER_LAW = "power_law"
    EXPONENTIAL = "exponential"
    GAUSSIAN = "gaussian"


class Mode(str, enum.Enum):
    NONLINEAR = "nonlinear"
    LINEAR = "linear"


@dataclass(frozen=True)
class GroundState:
    """Radial form factor psi_1(r) of unit size parameter.

    ``norm_const`` is c_pw, c_e or C_g depending on ``kind``; ``nu`` is the
    target L2 norm.  Besides psi and its first two derivatives the class
    exposes the logarithmic ratios psi'/(r psi) and psi''/psi, which stay
    finite where psi itself underflows.
    """

    kind: Family
    p: float
    norm_const: float
    nu: float = 1.0

    def _w(self, r):
        return 1.0 + np.square(r)

    def ln_psi2(self, r):
        r = np.asarray(r, dtype=float)
        lc2 = 2.0 * math.log(self.norm_const)
        if self.kind is Family.GAUSSIAN:
            return lc2 - np.square(r)
        if self.kind is Family.POWER_LAW:
            return lc2 - 2.0 * self.p * np.log1p(np.square(r))
        return lc2 - 2.0 * self._w(r) ** self.p

    def psi(self, r):
        return np.exp(0.5 * self.ln_psi2(r))

    def dlog_over_r(self, r):
        """psi'(r) / (r psi(r)); finite at r = 0."""
        r = np.asarray(r, dtype=float)
        if self.kind is Family.GAUSSIAN:
            return np.full_like(r, -1.0)
        w = self._w(r)
        if self.kind is Family.POWER_LAW:
            return -2.0 * self.p / w
        return -2.0 * self.p * w ** (self.p - 1.0)

    def d2log(self, r):
        """psi''(r) / psi(r)."""
        r = np.asarray(r, dtype=float)
        r2 = np.square(r)
        p = self.p
        if self.kind is Family.GAUSSIAN:
            return r2 - 1.0
        w = self._w(r)
        if self.kind is Family.POWER_LAW:
            return -2.0 * p / w + 4.0 * p * (p + 1.0) * r2 / w**2
        q = w ** (p - 1.0)
        return 4.0 * p * p * r2 * q * q - 2.0 * p * q - 4.0 * p * (p - 1.0) * r2 * w ** (p - 2.0)

    def laplacian_ratio(self, r):
        """lap(psi)/psi with lap the 3D radial Laplacian."""
        return self.d2log(r) + 2.0 * self.dlog_over_r(r)

    def dpsi(self, r):
        r = np.asarray(r, dtype=float)
        return self.psi(r) * r * self.dlog_over_r(r)

    def dpsi_over_r(self, r):
        return self.psi(r) * self.dlog_over_r(r)

    def d2psi(self, r):
        return self.psi(r) * self.d2log(r)

    @property
    def psi2_origin(self) -> float:
        return float(np.exp(self.ln_psi2(0.0)))


def _exponential_norm(p: float) -> float:
    val, _ = integrate.quad(
        lambda r: math.exp(-2.0 * (1.0 + r * r) ** p) * 4.0 * math.pi * r * r,
        0.0,
        np.inf,
        epsabs=0.0,
        epsrel=1e-13,
        limit=400,
    )
    return val


def make_ground_state(kind: Family | str, p: float | None = None, nu: float = 1.0) -> GroundState:
    kind = Family(kind)
    if not (nu > 0.0 and math.isfinite(nu)):
        raise ParameterDomainError(f"norm target must be positive, got {nu}")
    if kind is Family.GAUSSIAN:
        return GroundState(kind, 0.0, nu * GAUSS_CONST, nu)
    if p is None or not math.isfinite(p):
        raise ParameterDomainError(f"{kind.value} family needs a finite exponent p")
    if kind is Family.POWER_LAW:
        if p <= 0.75:
            raise ParameterDomainError(f"power-law exponent must exceed 3/4, got {p}")
        # int c^2 (1+r^2)^(-2p) 4 pi r^2 dr = 2 pi c^2 B(3/2, 2p - 3/2)
        c2 = nu * nu / (2.0 * math.pi * special.beta(1.5, 2.0 * p - 1.5))
        return GroundState(kind, float(p), math.sqrt(c2), nu)
    if p <= 0.0:
        raise ParameterDomainError(f"exponential exponent must be positive, got {p}")
    c2 = nu * nu / _exponential_norm(float(p))
    return GroundState(kind, float(p), math.sqrt(c2), nu)


def closed_form_gprime(gs: GroundState, s):
    """G'(s) written directly in s for each family (no inversion).

    Valid on 0 < s <= psi^2(0); the Gaussian and power-law expressions are
    also the extension used above psi^2(0).
    """
    s = np.asarray(s, dtype=float)
    c = gs.norm_const
    p = gs.p
    if gs.kind is Family.GAUSSIAN:
        return -np.log(s / (c * c)) - 3.0
    if gs.kind is Family.POWER_LAW:
        inv_w = (np.sqrt(s) / c) ** (1.0 / p)
        return (4.0 * p * p - 2.0 * p) * inv_w - 4.0 * p * (p + 1.0) * inv_w**2
    w = (0.5 * np.log(c * c / s)) ** (1.0 / p)
    return (
        4.0 * p * p * w ** (2.0 * p - 1.0)
        - 4.0 * p * p * w ** (2.0 * p - 2.0)
        - (4.0 * p * p + 2.0 * p) * w ** (p - 1.0)
        + 4.0 * p * (p - 1.0) * w ** (p - 2.0)
    )


def _exponential_gprime_slope(gs: GroundState, s: float) -> float:
    """dG'/ds of the exponential family, from the closed form in w."""
    p = gs.p
    c = gs.norm_const
    L = 0.5 * math.log(c * c / s)
    w = L ** (1.0 / p)
    dg_dw = (
        4.0 * p * p * (2.0 * p - 1.0) * w ** (2.0 * p - 2.0)
        - 4.0 * p * p * (2.0 * p - 2.0) * w ** (2.0 * p - 3.0)
        - (4.0 * p * p + 2.0 * p) * (p - 1.0) * w ** (p - 2.0)
        + 4.0 * p * (p - 1.0) * (p - 2.0) * w ** (p - 3.0)
    )
    dw_dL = (1.0 / p) * L ** (1.0 / p - 1.0)
    return dg_dw * dw_dL * (-0.5 / s)


class _RadialInverse:
    """r(s) for s = psi(r)^2 via PCHIP on a log-spaced table plus Newton.

    Works in rho = r^2 and ln psi^2, both smooth at the origin.
    """

    def __init__(self, gs: GroundState, n_nodes: int = 2048):
        self.gs = gs
        r_hi = 1.0
        while gs.ln_psi2(r_hi) > _LN_FLOOR:
            r_hi *= 2.0
            if r_hi > 1e300:
                raise ConsistencyError("profile does not decay; cannot build inversion table")
        r = np.concatenate([[0.0], np.geomspace(1e-4, r_hi, n_nodes - 1)])
        rho = r * r
        depth = gs.ln_psi2(0.0) - gs.ln_psi2(r)
        if np.any(np.diff(depth) <= 0.0):
            raise ConsistencyError("psi^2 samples are not strictly decreasing; inversion undefined")
        self._ln0 = float(gs.ln_psi2(0.0))
        self._depth = depth
        self._rho = rho
        self._interp = PchipInterpolator(depth, rho)

    def rho(self, s):
        s = np.atleast_1d(np.asarray(s, dtype=float))
        target = self._ln0 - np.log(s)
        target = np.clip(target, 0.0, self._depth[-1])
        idx = np.clip(np.searchsorted(self._depth, target), 1, self._depth.size - 1)
        lo = self._rho[idx - 1].copy()
        hi = self._rho[idx].copy()
        x = np.clip(self._interp(target), lo, hi)
        ln_s = self._ln0 - target
        for _ in range(60):
            f = self.gs.ln_psi2(np.sqrt(x)) - ln_s
            fp = self.gs.dlog_over_r(np.sqrt(x))
            lo = np.where(f > 0.0, x, lo)
            hi = np.where(f < 0.0, x, hi)
            nxt = np.where(f == 0.0, x, x - f / fp)
            bad = (nxt < lo) | (nxt > hi)
            nxt = np.where(bad, 0.5 * (lo + hi), nxt)
            done = np.abs(nxt - x) <= 4e-16 * np.maximum(x, 1e-300)
            x = nxt
            if np.all(done | (f == 0.0)):
                break
        return x


@dataclass(frozen=True)
class Nonlinearity:
    """G'_1 and G_1 for unit size parameter.

    ``log_shift`` marks the logarithmic family, for which rescaling psi by
    lambda shifts G' by the constant -ln(lambda^2).
    """

    label: str
    gprime_fn: Callable[[np.ndarray], np.ndarray] = field(repr=False)
    g_fn: Callable[[np.ndarray], np.ndarray] = field(repr=False)
    holder_alpha: float = 0.9
    extension_breakpoints: tuple[float, float] | None = None
    mode: Mode = Mode.NONLINEAR
    log_shift: bool = False

    def g1prime(self, s):
        s = np.asarray(s, dtype=float)
        if self.mode is Mode.LINEAR:
            return np.zeros_like(s)
        return self.gprime_fn(s)

    def g1(self, s):
        s = np.asarray(s, dtype=float)
        if self.mode is Mode.LINEAR:
            return np.zeros_like(s)
        return self.g_fn(s)


def _check_alpha(alpha: float) -> float:
    if not 0.0 < alpha < 1.0:
        raise ParameterDomainError(f"Hoelder exponent must lie in (0, 1), got {alpha}")
    return float(alpha)


def _log_gprime(s):
    s = np.asarray(s, dtype=float)
    with np.errstate(divide="ignore"):
        return -np.log(s) - 1.5 * math.log(math.pi) - 3.0


def _log_g(s):
    s = np.asarray(s, dtype=float)
    with np.errstate(divide="ignore", invalid="ignore"):
        out = -s * (np.log(s) + 1.5 * math.log(math.pi) + 2.0)
    return np.where(s > 0.0, out, 0.0)


def logarithmic_nonlinearity(alpha: float = 0.9) -> Nonlinearity:
    """Closed-form nonlinearity of the Gaussian ground state."""
    return Nonlinearity(
        label="logarithmic",
        gprime_fn=_log_gprime,
        g_fn=_log_g,
        holder_alpha=_check_alpha(alpha),
        log_shift=True,
    )


def linear_nonlinearity() -> Nonlinearity:
    zero = lambda s: np.zeros_like(np.asarray(s, dtype=float))  # noqa: E731
    return Nonlinearity(label="linear", gprime_fn=zero, g_fn=zero, mode=Mode.LINEAR)


def _hermite(t, y0, m0, y1, m1, h):
    t2 = t * t
    t3 = t2 * t
    return (
        (2 * t3 - 3 * t2 + 1) * y0
        + (t3 - 2 * t2 + t) * h * m0
        + (-2 * t3 + 3 * t2) * y1
        + (t3 - t2) * h * m1
    )


def nonlinearity_from_ground_state(
    gs: GroundState, alpha: float = 0.9, n_nodes: int = 2048, quad_rtol: float = 1e-11
) -> Nonlinearity:
    """Reverse-engineer G' from the equilibrium relation by inverting s = psi^2(r)."""
    alpha = _check_alpha(alpha)
    inv = _RadialInverse(gs, n_nodes=n_nodes)
    s0 = gs.psi2_origin

    def inverted(s):
        rho = inv.rho(s)
        return gs.laplacian_ratio(np.sqrt(rho))

    breakpoints = None
    if gs.kind is Family.EXPONENTIAL:
        y0 = float(inverted(np.array([s0]))[0])
        m0 = _exponential_gprime_slope(gs, s0)
        breakpoints = (s0, 2.0 * s0)

        def extension(s):
            t = np.clip((s - s0) / s0, 0.0, 1.0)
            return _hermite(t, y0, m0, y0, 0.0, s0)

    else:

        def extension(s):
            return closed_form_gprime(gs, s)

    def gprime(s):
        s = np.asarray(s, dtype=float)
        flat = np.atleast_1d(s).ravel()
        out = np.empty_like(flat)
        tiny = np.nextafter(0.0, 1.0)
        low = flat <= s0
        if np.any(low):
            out[low] = inverted(np.maximum(flat[low], tiny))
        if np.any(~low):
            out[~low] = extension(flat[~low])
        return out.reshape(s.shape) if s.ndim else out[0]

    def g(s):
        # with u = psi^2(r): G(s) = psi'(r_s)^2 - 4 int_{r_s}^inf psi'(r)^2 / r dr,
        # so only the lower limit needs the inversion
        s = np.asarray(s, dtype=float)
        flat = np.atleast_1d(s).ravel()
        out = np.zeros_like(flat)
        pos = np.flatnonzero(flat > 0.0)
        r_s = np.sqrt(inv.rho(np.minimum(flat[pos], s0)))
        for i, r0 in zip(pos, r_s):
            with warnings.catch_warnings():
                # far tails underflow to 0 and quad reports it; the value is still exact
                warnings.simplefilter("ignore", integrate.IntegrationWarning)
                tail, _ = integrate.quad(
                    lambda r: r * float(gs.dpsi_over_r(r)) ** 2, r0, np.inf, epsabs=0.0, epsrel=quad_rtol, limit=400
                )
            out[i] = float(gs.dpsi(r0)) ** 2 - 4.0 * tail
            if flat[i] > s0:
                pts = [2.0 * s0] if breakpoints is not None and flat[i] > 2.0 * s0 else None
                ext, _ = integrate.quad(
                    lambda u: float(extension(np.array([u]))[0]), s0, flat[i], points=pts, epsabs=0.0, epsrel=quad_rtol
                )
                out[i] += ext
        return out.reshape(s.shape) if s.ndim else out[0]

    return Nonlinearity(
        label=f"derived:{gs.kind.value}",
        gprime_fn=gprime,
        g_fn=g,
        holder_alpha=alpha,
        extension_breakpoints=breakpoints,
        log_shift=gs.kind is Family.GAUSSIAN,
    )


@dataclass(frozen=True)
class GEval:
    gprime: np.ndarray | float
    g: np.ndarray | float


def eval_g(nl: Nonlinearity, s, a: float) -> GEval:
    """G'_a(s) = a^-2 G'_1(a^3 s) and G_a(s) = a^-5 G_1(a^3 s); G_a(0) = 0."""
    if not a > 0.0:
        raise ParameterDomainError(f"size parameter must be positive, got {a}")
    s = np.asarray(s, dtype=float)
    if np.any(s < 0.0):
        raise ParameterDomainError("s must be non-negative")
    if nl.mode is Mode.LINEAR:
        z = np.zeros_like(s)
        return GEval(z if z.ndim else 0.0, z if z.ndim else 0.0)
    arg = a**3 * s
    gp = a**-2 * nl.g1prime(arg)
    g = a**-5 * nl.g1(arg)
    if s.ndim == 0:
        return GEval(float(gp), float(g))
    return GEval(gp, g)


def equilibrium_residual(gs: GroundState, nl: Nonlinearity, r_grid, xi: float = 0.0) -> float:
    """max |lap(psi) - (G'(psi^2) - xi) psi| over ``r_grid`` (a = 1)."""
    r = np.asarray(r_grid, dtype=float)
    psi = gs.psi(r)
    lap = gs.d2psi(r) + 2.0 * gs.dpsi_over_r(r)
    res = lap - (nl.g1prime(psi * psi) - xi) * psi
    return float(np.max(np.abs(res)))


def holder_sup(nl: Nonlinearity, alpha: float | None = None, n: int = 4000, amp_max: float = 1.0):
    """Sampled suprema of |G(|psi|^2)|/|psi|^(1+alpha) and |G'(|psi|^2)||psi|/|psi|^alpha."""
    alpha = nl.holder_alpha if alpha is None else alpha
    amp = np.geomspace(1e-12, amp_max, n)
    s = amp * amp
    g = np.abs(nl.g1(s)) / amp ** (1.0 + alpha)
    gp = np.abs(nl.g1prime(s)) * amp / amp**alpha
    return float(np.max(g)), float(np.max(gp))
