"""Radial rest states: psi'' + (2/r) psi' = (G'(psi^2) - xi) psi with unit norm."""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np
from scipy import integrate, optimize

from .errors import DomainTooSmall, EigenvalueNotFound, FrequencySolveError, ParameterDomainError
from .nonlinearity import Mode, Nonlinearity

__all__ = [
    "RestState",
    "ShootingConfig",
    "solve_rest_state",
    "solve_rest_spectrum",
    "rest_observables",
    "omega_ratio_from_xi",
    "xi_of_omega_ratio",
    "standing_wave_energy",
]


@dataclass(frozen=True)
class ShootingConfig:
    r_max: float = 12.0
    n_grid: int = 4096
    r0: float = 1e-6
    rtol: float = 1e-12
    atol: float = 1e-15
    amp_lo: float = 1e-2
    amp_hi: float = 1e2
    n_scan: int = 24
    bisect_rel: float = 4e-16
    max_bisect: int = 80
    # relative size of |psi| at the truncation radius above which the grid is
    # declared too small
    tail_tol: float = 1e-4


@dataclass(frozen=True, eq=False)
class RestState:
    xi: float
    r: np.ndarray = field(repr=False)
    profile: np.ndarray = field(repr=False)
    dprofile: np.ndarray = field(repr=False)
    node_count: int
    l2_norm: float
    energy_coeff: float
    amplitude: float
    truncation_radius: float

    def sign_changes(self) -> int:
        nz = self.profile[np.abs(self.profile) > 1e-14 * np.max(np.abs(self.profile))]
        return int(np.count_nonzero(np.diff(np.sign(nz)) != 0))

    def evaluate(self, r):
        """Profile at arbitrary radii (cubic Hermite between grid nodes, Gaussian beyond)."""
        from scipy.interpolate import CubicHermiteSpline

        spline = CubicHermiteSpline(self.r, self.profile, self.dprofile)
        r = np.abs(np.asarray(r, dtype=float))
        out = np.zeros_like(r)
        inside = r <= self.r[-1]
        out[inside] = spline(r[inside])
        return out


def _scalar_gprime(nl: Nonlinearity):
    if nl.label == "logarithmic":
        shift = 1.5 * math.log(math.pi) + 3.0
        return lambda s: -math.log(s) - shift
    return lambda s: float(nl.g1prime(s))


def _rhs_factory(nl: Nonlinearity, xi: float):
    gp = _scalar_gprime(nl)

    def rhs(r, y):
        psi, dpsi = y
        s = psi * psi
        force = (gp(s) - xi) * psi if s > 0.0 else 0.0
        return [dpsi, force - 2.0 * dpsi / r]

    return rhs


def _shoot(nl: Nonlinearity, amp: float, xi: float, cfg: ShootingConfig, grid=None):
    """Integrate from the series start and classify the solution.

    Returns (nodes, turn_index, r, psi, dpsi, turned) where ``nodes`` counts
    sign changes before the first interior minimum of |psi| (the point where
    the solution leaves the decaying branch).  Without ``grid`` the solver's
    own step points are used, which is enough for classification.
    """
    g0 = float(nl.g1prime(amp * amp)) - xi
    r0 = cfg.r0
    y0 = [amp + g0 * amp * r0 * r0 / 6.0, g0 * amp * r0 / 3.0]

    def blow_up(r, y):
        return abs(y[0]) - 8.0 * amp

    blow_up.terminal = True
    sol = integrate.solve_ivp(
        _rhs_factory(nl, xi),
        (r0, cfg.r_max),
        y0,
        method="DOP853",
        t_eval=grid,
        rtol=cfg.rtol,
        atol=cfg.atol * amp,
        events=blow_up,
    )
    psi = sol.y[0]
    dpsi = sol.y[1]
    n = psi.size
    flux = psi * dpsi
    sgn = np.sign(psi)
    same = (sgn[:-1] == sgn[1:]) & (sgn[:-1] != 0)
    turn = np.nonzero(same & (flux[:-1] < 0.0) & (flux[1:] >= 0.0))[0]
    turn_idx = int(turn[0]) if turn.size else n - 1
    head = sgn[: turn_idx + 1]
    head = head[head != 0]
    nodes = int(np.count_nonzero(np.diff(head) != 0))
    return nodes, turn_idx, sol.t, psi, dpsi, bool(turn.size)


def _scan(nl: Nonlinearity, xi: float, cfg: ShootingConfig):
    amps = np.geomspace(cfg.amp_lo, cfg.amp_hi, cfg.n_scan)
    return amps, [_shoot(nl, float(a), xi, cfg)[0] for a in amps]


def _eigen_amplitude(nl: Nonlinearity, node_count: int, xi: float, cfg: ShootingConfig, scan=None):
    amps, counts = scan if scan is not None else _scan(nl, xi, cfg)
    lo = hi = None
    for a0, a1, c0, c1 in zip(amps[:-1], amps[1:], counts[:-1], counts[1:]):
        if c0 <= node_count < c1:
            lo, hi = float(a0), float(a1)
            break
    if lo is None:
        raise EigenvalueNotFound(
            f"no amplitude bracket for {node_count} nodes at xi={xi}; scanned counts {sorted(set(counts))}"
        )
    for _ in range(cfg.max_bisect):
        mid = 0.5 * (lo + hi)
        if mid in (lo, hi) or hi - lo <= cfg.bisect_rel * hi:
            break
        if _shoot(nl, mid, xi, cfg)[0] <= node_count:
            lo = mid
        else:
            hi = mid
    return lo


def _profile_at(nl, amp, xi, node_count, cfg, grid):
    nodes, turn_idx, _, psi, dpsi, turned = _shoot(nl, amp, xi, cfg, grid)
    if nodes != node_count:
        raise EigenvalueNotFound(f"bisection endpoint has {nodes} nodes, expected {node_count}")
    psi = psi.copy()
    dpsi = dpsi.copy()
    peak = float(np.max(np.abs(psi)))
    if turned:
        rc = grid[turn_idx]
        if abs(psi[turn_idx]) > cfg.tail_tol * peak:
            raise DomainTooSmall(
                f"tail does not decay: |psi({rc:.3g})|/max = {abs(psi[turn_idx]) / peak:.3g}"
            )
        # continue the decaying branch as a Gaussian tail
        tail = grid[turn_idx:]
        psi[turn_idx:] = psi[turn_idx] * np.exp(-0.5 * (tail * tail - rc * rc))
        dpsi[turn_idx:] = -tail * psi[turn_idx:]
    else:
        rc = float(grid[-1])
        if abs(psi[-1]) > cfg.tail_tol * peak:
            raise DomainTooSmall(f"solution has not decayed by r_max={grid[-1]}")
    return psi, dpsi, float(rc)


def _radial_norm2(r, f):
    return float(integrate.simpson(f * f * 4.0 * math.pi * r * r, x=r))


def solve_rest_state(
    nl: Nonlinearity,
    node_count: int,
    config: ShootingConfig | None = None,
    xi_bracket=(-20.0, 20.0),
    _scan_cache=None,
) -> RestState:
    """Radial shooting on the central amplitude with bisection on the node count.

    Logarithmic family: shoot at xi = 0 and recover xi = ln(norm^2) from the
    rescaling identity.  Other families: for each trial xi find the eigen
    amplitude, then root-find xi so the norm equals one.
    """
    if nl.mode is Mode.LINEAR:
        raise ParameterDomainError("rest states need a nonlinear mode")
    if node_count not in (0, 1, 2):
        raise ParameterDomainError(f"node_count must be 0, 1 or 2, got {node_count}")
    cfg = config or ShootingConfig()
    grid = np.linspace(cfg.r0, cfg.r_max, cfg.n_grid)

    if nl.log_shift:
        amp = _eigen_amplitude(nl, node_count, 0.0, cfg, _scan_cache)
        psi, dpsi, rc = _profile_at(nl, amp, 0.0, node_count, cfg, grid)
        norm2 = _radial_norm2(grid, psi)
        xi = math.log(norm2)
    else:

        def defect(x):
            a = _eigen_amplitude(nl, node_count, x, cfg)
            p, _, _ = _profile_at(nl, a, x, node_count, cfg, grid)
            return _radial_norm2(grid, p) - 1.0

        try:
            xi = optimize.brentq(defect, *xi_bracket, xtol=1e-12, rtol=1e-12)
        except ValueError as exc:
            raise EigenvalueNotFound(f"norm condition not bracketed on xi in {xi_bracket}") from exc
        amp = _eigen_amplitude(nl, node_count, xi, cfg)
        psi, dpsi, rc = _profile_at(nl, amp, xi, node_count, cfg, grid)
        norm2 = _radial_norm2(grid, psi)

    scale = 1.0 / math.sqrt(norm2)
    psi = psi * scale
    dpsi = dpsi * scale
    theta0 = float(integrate.simpson(dpsi * dpsi * 4.0 * math.pi * grid * grid, x=grid)) / 3.0
    return RestState(
        xi=float(xi),
        r=grid,
        profile=psi,
        dprofile=dpsi,
        node_count=node_count,
        l2_norm=math.sqrt(_radial_norm2(grid, psi)),
        energy_coeff=theta0,
        amplitude=float(psi[0]),
        truncation_radius=rc,
    )


def solve_rest_spectrum(
    nl: Nonlinearity, node_counts=(0, 1, 2), config: ShootingConfig | None = None
) -> list[RestState]:
    """Several rest states; the logarithmic family shares one amplitude scan."""
    cfg = config or ShootingConfig()
    cache = _scan(nl, 0.0, cfg) if nl.log_shift and nl.mode is Mode.NONLINEAR else None
    return [solve_rest_state(nl, n, cfg, _scan_cache=cache) for n in node_counts]


def xi_of_omega_ratio(x, k: float):
    """xi as a function of x = omega^2/omega_0^2 for k = a^2/a_C^2."""
    x = np.asarray(x, dtype=float)
    return k * (x - 1.0) - 0.5 * np.log(x)


def omega_ratio_from_xi(xi: float, a: float, a_C: float, xi_tol: float = 1e-9) -> float:
    """Smallest root x >= 1 of xi = k (x - 1) - ln(x)/2, returned as omega/omega_0.

    |xi| <= xi_tol counts as the ground-state value xi = 0 (shooting noise).
    """
    k = (a / a_C) ** 2
    if abs(xi) <= xi_tol:
        return 1.0

    def f(x):
        return float(xi_of_omega_ratio(x, k)) - xi

    lo = 1.0
    if k < 0.5:
        # f dips to a minimum at x = 1/(2k) before increasing
        x_min = 0.5 / k
        if xi < 0.0:
            if f(x_min) > 0.0:
                raise FrequencySolveError(f"xi={xi} has no root with omega >= omega_0 (k={k:.4g})")
            return math.sqrt(optimize.brentq(f, 1.0, x_min, xtol=1e-15, rtol=1e-15))
        lo = x_min
    elif xi < 0.0:
        raise FrequencySolveError(f"xi={xi} < 0 has no root with omega >= omega_0 (k={k:.4g})")
    hi = 2.0 * lo
    while f(hi) < 0.0:
        hi *= 2.0
        if hi > 1e300:
            raise FrequencySolveError("frequency root not bracketed")
    return math.sqrt(optimize.brentq(f, lo, hi, xtol=1e-15, rtol=1e-15))


def rest_observables(rs: RestState, a: float, a_C: float, chi: float, m: float, c: float) -> dict:
    for name, val in (("a", a), ("a_C", a_C), ("chi", chi), ("m", m), ("c", c)):
        if not val > 0.0:
            raise ParameterDomainError(f"{name} must be positive")
    if not math.isclose(a_C, chi / (m * c), rel_tol=1e-12):
        raise ParameterDomainError("a_C must equal chi/(m c)")
    omega0 = m * c * c / chi
    ratio = omega_ratio_from_xi(rs.xi, a, a_C)
    omega = omega0 * ratio
    theta = rs.energy_coeff * (a_C / a) ** 2 / ratio**2
    return {
        "omega": omega,
        "omega0": omega0,
        "theta": theta,
        "energy": chi * omega * (1.0 + theta),
        "xi_check": float(xi_of_omega_ratio(ratio**2, (a / a_C) ** 2)),
        "charge_norm": 1.0 / ratio,
    }


def standing_wave_energy(rs: RestState, nl: Nonlinearity, a: float, chi: float, m: float, c: float) -> float:
    """Energy of e^{-i omega t} psi(x) from the energy density by radial quadrature.

    Uses the density (chi^2/2m)[omega^2 |psi|^2/c^2 + |grad psi|^2 + G_a + kappa0^2 |psi|^2]
    with |psi|^2 normalised to omega0/omega.
    """
    a_C = chi / (m * c)
    omega0 = m * c * c / chi
    ratio = omega_ratio_from_xi(rs.xi, a, a_C)
    omega = omega0 * ratio
    mu2 = 1.0 / ratio
    r1 = rs.r
    r = a * r1
    psi = math.sqrt(mu2) * a**-1.5 * rs.profile
    dpsi = math.sqrt(mu2) * a**-2.5 * rs.dprofile
    s = psi * psi
    g = a**-5 * nl.g1(a**3 * s)
    kappa2 = (m * c / chi) ** 2
    dens = (chi * chi / (2.0 * m)) * (omega**2 / c**2 * s + dpsi * dpsi + g + kappa2 * s)
    return float(integrate.simpson(dens * 4.0 * math.pi * r * r, x=r))
