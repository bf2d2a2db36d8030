"""INI run configuration: parsing, defaults and up-front validation.

Every tolerance the numerics use is surfaced here.  ``load_config`` runs all
domain checks (exponent ordering, zeta range, trajectory admissibility on
the time window, grid sizes) before any computation starts, so a bad file
fails with ConfigError and the CLI can map it to its own exit code.
"""

from __future__ import annotations

import configparser
import math
from dataclasses import asdict, dataclass, field
from pathlib import Path

from .characteristics import CharConfig, _check_exponents
from .errors import ConfigError, KGError
from .nonlinearity import (
    Family,
    Mode,
    Nonlinearity,
    linear_nonlinearity,
    logarithmic_nonlinearity,
    make_ground_state,
    nonlinearity_from_ground_state,
)
from .trajectory import ConstantPotential, Trajectory, check_admissible, make_trajectory

__all__ = [
    "PhysicsConfig",
    "NonlinearityConfig",
    "TrajectoryConfig",
    "ScaleConfig",
    "ToleranceConfig",
    "ConstructionConfig",
    "RestStateConfig",
    "BoostConfig",
    "VerifyConfig",
    "FamilyConfig",
    "OutputConfig",
    "Thresholds",
    "RunConfig",
    "load_config",
    "parse_config",
]

_FORMATS = ("csv", "json", "both")


def _floats(text: str) -> tuple[float, ...]:
    return tuple(float(x) for x in text.replace(",", " ").split())


def _ints(text: str) -> tuple[int, ...]:
    return tuple(int(x) for x in text.replace(",", " ").split())


@dataclass(frozen=True)
class PhysicsConfig:
    m: float = 1.0
    c: float = 1.0
    q: float = 1.0


@dataclass(frozen=True)
class NonlinearityConfig:
    family: str = "logarithmic"
    p: float | None = None
    nu: float = 1.0
    alpha: float = 0.9


@dataclass(frozen=True)
class TrajectoryConfig:
    kind: str = "tanh"
    beta0: float = 0.4
    beta1: float = 0.1
    k: float = 1.0
    coeffs: tuple[float, ...] = ()
    phi0: float = 0.0


@dataclass(frozen=True)
class ScaleConfig:
    zeta: tuple[float, ...] = (1e-2, 3e-3, 1e-3)
    one_plus: float = 1.1
    two_plus: float = 2.1
    delta: float = 0.003


@dataclass(frozen=True)
class ToleranceConfig:
    ode_rtol: float = 1e-10
    ode_atol: float = 1e-14
    event_tol: float = 1e-12
    root_tol: float = 1e-13
    max_root_iter: int = 40
    fd_step_factor: float = 1e-3
    quad_rtol: float = 1e-12


@dataclass(frozen=True)
class ConstructionConfig:
    mode: str = "nonlinear"
    q_form: str = "derived"
    gamma0: float | None = None
    t_min: float = -2.0
    t_max: float = 2.0
    t0: float | None = None
    n_t: int = 81
    z_points_per_unit: int = 32
    fan_size: int = 64
    residual_times: tuple[float, ...] = (0.0,)
    residual_points_per_unit: int = 64
    residual_h_tau: float = 0.05
    residual_n_tau: int = 5


@dataclass(frozen=True)
class RestStateConfig:
    node_counts: tuple[int, ...] = (0, 1, 2)
    r_max: float = 12.0
    n_grid: int = 4096
    tail_tol: float = 1e-4
    size_a: float = 1.0


@dataclass(frozen=True)
class BoostConfig:
    beta: float = 0.6
    direction: tuple[float, float, float] = (1.0, 0.0, 0.0)
    size_a: float = 1.0
    chi: float = 1.0
    omega: float | None = None
    theta: float = 0.5
    points_per_a: int = 16
    half_width: float = 5.0
    totals_h_t: float = 1e-3
    conservation_points_per_a: int = 8
    conservation_half_width: float = 2.5
    n_times: int = 5
    export_field: bool = False


@dataclass(frozen=True)
class VerifyConfig:
    field: str | None = None
    margin: int = 2


@dataclass(frozen=True)
class FamilyConfig:
    profile: str = "gaussian"
    N: float = 8.0
    alpha: float = 0.9
    a_list: tuple[float, ...] = (1e-2, 1e-3, 1e-4, 1e-5, 1e-6)
    zeta: float = 0.5
    beta: float = 0.5
    theta_power: float = 0.25
    growth_factor: float = 2.0


@dataclass(frozen=True)
class OutputConfig:
    out_dir: str = "out"
    format: str = "both"


@dataclass(frozen=True)
class Thresholds:
    """Limits applied by ``--assert``; defaults follow the acceptance targets."""

    xi_expected: tuple[float, ...] = (0.0, 2.17, 3.41)
    xi_tol: tuple[float, ...] = (1e-4, 0.05, 0.05)
    boost_rel_tol: float = 0.01
    residual_factor: float = 100.0
    ablation_factor: float = 10.0
    slope_phi: tuple[float, float] = (1.85, 2.1)
    slope_phi_b: tuple[float, float] = (1.8, 2.1)
    energy_gap_rel: float = 0.02
    m0_rel_std: float = 1e-2
    conservation_abs: float | None = None


@dataclass(frozen=True)
class RunConfig:
    physics: PhysicsConfig = PhysicsConfig()
    nonlinearity: NonlinearityConfig = NonlinearityConfig()
    trajectory: TrajectoryConfig = TrajectoryConfig()
    scale: ScaleConfig = ScaleConfig()
    tolerances: ToleranceConfig = ToleranceConfig()
    construction: ConstructionConfig = ConstructionConfig()
    rest_state: RestStateConfig = RestStateConfig()
    boost: BoostConfig = BoostConfig()
    verify: VerifyConfig = VerifyConfig()
    family: FamilyConfig = FamilyConfig()
    output: OutputConfig = OutputConfig()
    thresholds: Thresholds = Thresholds()
    source: str | None = field(default=None, compare=False)

    # builders ------------------------------------------------------------
    @property
    def mode(self) -> Mode:
        return Mode(self.construction.mode)

    def build_trajectory(self) -> Trajectory:
        tc = self.trajectory
        params = {"beta0": tc.beta0, "beta1": tc.beta1, "k": tc.k, "coeffs": tc.coeffs}
        return make_trajectory(tc.kind, params, c=self.physics.c)

    def build_phi0(self) -> ConstantPotential:
        return ConstantPotential(self.trajectory.phi0)

    def build_nonlinearity(self, mode: Mode | None = None) -> Nonlinearity:
        mode = self.mode if mode is None else mode
        if mode is Mode.LINEAR:
            return linear_nonlinearity()
        nc = self.nonlinearity
        if nc.family == "logarithmic":
            return logarithmic_nonlinearity(nc.alpha)
        return nonlinearity_from_ground_state(make_ground_state(nc.family, nc.p, nc.nu), alpha=nc.alpha)

    def char_config(self) -> CharConfig:
        tol, cc = self.tolerances, self.construction
        return CharConfig(
            rtol=tol.ode_rtol,
            atol=tol.ode_atol,
            event_tol=tol.event_tol,
            q_form=cc.q_form,
            gamma0=cc.gamma0,
            root_tol=tol.root_tol,
            max_root_iter=tol.max_root_iter,
            t_window=(cc.t_min, cc.t_max),
            fd_step_factor=tol.fd_step_factor,
        )

    def to_dict(self) -> dict:
        d = asdict(self)
        d.pop("source", None)
        return d


# --------------------------------------------------------------------------
# parsing

_SECTIONS = {
    "physics": PhysicsConfig,
    "nonlinearity": NonlinearityConfig,
    "trajectory": TrajectoryConfig,
    "scale": ScaleConfig,
    "tolerances": ToleranceConfig,
    "construction": ConstructionConfig,
    "rest_state": RestStateConfig,
    "boost": BoostConfig,
    "verify": VerifyConfig,
    "family": FamilyConfig,
    "output": OutputConfig,
    "thresholds": Thresholds,
}


def _convert(cls, name: str, raw: str):
    default = cls.__dataclass_fields__[name].default
    ann = str(cls.__dataclass_fields__[name].type)
    raw = raw.strip()
    if "None" in ann and raw.lower() in ("", "none"):
        return None
    if ann.startswith("tuple[int"):
        return _ints(raw)
    if ann.startswith("tuple[float"):
        return _floats(raw)
    if ann.startswith("bool"):
        low = raw.lower()
        if low in ("1", "true", "yes", "on"):
            return True
        if low in ("0", "false", "no", "off"):
            return False
        raise ValueError(f"not a boolean: {raw!r}")
    if ann.startswith("int"):
        return int(raw)
    if ann.startswith("float"):
        return float(raw)
    if ann.startswith("str"):
        return raw
    raise ValueError(f"unsupported field type {ann} (default {default!r})")


def parse_config(text: str, source: str | None = None) -> RunConfig:
    """Parse INI text into a validated RunConfig."""
    cp = configparser.ConfigParser(inline_comment_prefixes=("#", ";"), interpolation=None)
    cp.optionxform = str
    try:
        cp.read_string(text, source=source or "<config>")
    except configparser.Error as exc:
        raise ConfigError(f"cannot parse config: {exc}") from exc
    parts = {}
    for sec in cp.sections():
        if sec not in _SECTIONS:
            raise ConfigError(f"unknown section [{sec}]")
        cls = _SECTIONS[sec]
        kwargs = {}
        for key, raw in cp.items(sec):
            if key not in cls.__dataclass_fields__:
                raise ConfigError(f"unknown key '{key}' in [{sec}]")
            try:
                kwargs[key] = _convert(cls, key, raw)
            except ValueError as exc:
                raise ConfigError(f"[{sec}] {key}: {exc}") from exc
        parts[sec] = cls(**kwargs)
    cfg = RunConfig(**parts, source=source)
    validate(cfg)
    return cfg


def load_config(path: str | Path | None) -> RunConfig:
    if path is None:
        cfg = RunConfig()
        validate(cfg)
        return cfg
    p = Path(path)
    try:
        text = p.read_text()
    except OSError as exc:
        raise ConfigError(f"cannot read config {p}: {exc}") from exc
    return parse_config(text, source=str(p))


def _positive(name: str, val) -> None:
    if val is None or not (math.isfinite(val) and val > 0.0):
        raise ConfigError(f"{name} must be positive and finite, got {val}")


def validate(cfg: RunConfig) -> None:
    """All domain checks; raises ConfigError on the first violation."""
    ph = cfg.physics
    for name in ("m", "c", "q"):
        _positive(f"physics.{name}", getattr(ph, name))

    nc = cfg.nonlinearity
    if nc.family != "logarithmic":
        try:
            Family(nc.family)
        except ValueError as exc:
            raise ConfigError(f"unknown nonlinearity family '{nc.family}'") from exc
    if not 0.0 < nc.alpha < 1.0:
        raise ConfigError(f"nonlinearity.alpha must lie in (0, 1), got {nc.alpha}")

    cc = cfg.construction
    try:
        Mode(cc.mode)
    except ValueError as exc:
        raise ConfigError(f"construction.mode must be nonlinear or linear, got '{cc.mode}'") from exc
    if cc.q_form not in ("derived", "printed"):
        raise ConfigError(f"construction.q_form must be derived or printed, got '{cc.q_form}'")
    if cc.q_form == "printed" and cc.gamma0 is not None:
        raise ConfigError("the printed Q form has no gamma0 variant")
    if cc.gamma0 is not None and not cc.gamma0 >= 1.0:
        raise ConfigError(f"construction.gamma0 must be >= 1, got {cc.gamma0}")
    if not cc.t_min < cc.t_max:
        raise ConfigError("construction.t_min must be below t_max")
    if cc.t0 is not None and not cc.t_min <= cc.t0 <= cc.t_max:
        raise ConfigError("construction.t0 must lie in the time window")
    if cc.n_t < 5:
        raise ConfigError("construction.n_t must be at least 5")
    if cc.residual_n_tau < 5:
        raise ConfigError("construction.residual_n_tau must be at least 5")
    for name in ("z_points_per_unit", "residual_points_per_unit", "fan_size"):
        if getattr(cc, name) < 1:
            raise ConfigError(f"construction.{name} must be positive")
    _positive("construction.residual_h_tau", cc.residual_h_tau)
    if any(not cc.t_min <= t <= cc.t_max for t in cc.residual_times):
        raise ConfigError("construction.residual_times must lie in the time window")

    sc = cfg.scale
    _check_exponents(sc.one_plus, sc.two_plus, sc.delta)
    if not sc.zeta:
        raise ConfigError("scale.zeta needs at least one value")
    for z in sc.zeta:
        if not 0.0 < z < 1.0:
            raise ConfigError(f"scale.zeta entries must lie in (0, 1), got {z}")
    if any(b >= a for a, b in zip(sc.zeta, sc.zeta[1:])):
        raise ConfigError("scale.zeta must be strictly decreasing")

    tol = cfg.tolerances
    for name in ("ode_rtol", "ode_atol", "event_tol", "root_tol", "fd_step_factor", "quad_rtol"):
        _positive(f"tolerances.{name}", getattr(tol, name))
    if tol.max_root_iter < 1:
        raise ConfigError("tolerances.max_root_iter must be positive")

    tc = cfg.trajectory
    try:
        traj = cfg.build_trajectory()
        check_admissible(traj, (cc.t_min, cc.t_max))
    except KGError as exc:
        raise ConfigError(f"trajectory: {exc}") from exc
    if not math.isfinite(tc.phi0):
        raise ConfigError("trajectory.phi0 must be finite")

    rs = cfg.rest_state
    if any(n not in (0, 1, 2) for n in rs.node_counts) or not rs.node_counts:
        raise ConfigError("rest_state.node_counts must be drawn from 0, 1, 2")
    _positive("rest_state.r_max", rs.r_max)
    _positive("rest_state.size_a", rs.size_a)
    if rs.n_grid < 16:
        raise ConfigError("rest_state.n_grid must be at least 16")

    bc = cfg.boost
    if not 0.0 <= bc.beta < 1.0:
        raise ConfigError(f"boost.beta must lie in [0, 1), got {bc.beta}")
    if len(bc.direction) != 3 or not any(bc.direction):
        raise ConfigError("boost.direction must be a non-zero 3-vector")
    for name in ("size_a", "chi", "half_width"):
        _positive(f"boost.{name}", getattr(bc, name))
    if bc.omega is not None:
        _positive("boost.omega", bc.omega)
    _positive("boost.totals_h_t", bc.totals_h_t)
    _positive("boost.conservation_half_width", bc.conservation_half_width)
    if bc.theta < 0.0:
        raise ConfigError("boost.theta must be non-negative")
    if bc.points_per_a < 2 or bc.conservation_points_per_a < 2:
        raise ConfigError("boost grids need at least 2 points per a")
    if bc.n_times != 0 and bc.n_times < 5:
        raise ConfigError("boost.n_times must be 0 (skip conservation) or at least 5")

    if cfg.verify.margin < 1:
        raise ConfigError("verify.margin must be positive")

    fc = cfg.family
    if fc.profile not in ("gaussian", "power"):
        raise ConfigError(f"family.profile must be gaussian or power, got '{fc.profile}'")
    if len(fc.a_list) < 2 or any(not 0.0 < a < 1.0 for a in fc.a_list):
        raise ConfigError("family.a_list needs at least two sizes in (0, 1)")
    if any(b >= a for a, b in zip(fc.a_list, fc.a_list[1:])):
        raise ConfigError("family.a_list must be strictly decreasing")
    _positive("family.N", fc.N)
    _positive("family.growth_factor", fc.growth_factor)

    if cfg.output.format not in _FORMATS:
        raise ConfigError(f"output.format must be one of {_FORMATS}")

    th = cfg.thresholds
    if len(th.xi_expected) != len(th.xi_tol):
        raise ConfigError("thresholds.xi_expected and xi_tol differ in length")
    for name in ("slope_phi", "slope_phi_b"):
        lo_hi = getattr(th, name)
        if len(lo_hi) != 2 or not lo_hi[0] < lo_hi[1]:
            raise ConfigError(f"thresholds.{name} must be an increasing pair")
