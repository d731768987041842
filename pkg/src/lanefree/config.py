"""Simulation configuration: defaults, file parsing (JSON or key=value text),
and dotted-key overrides."""

from __future__ import annotations

import dataclasses
import json
import math
import warnings
from dataclasses import dataclass, field
from pathlib import Path

from .controller import ControllerParams
from .dynamics import RoadSpec
from .errors import ConfigError
from .geometry import estimate_m, safety_distance
from .potentials import BoundaryPotentialParams, GainShaping, VehiclePotentialParams

__all__ = ["InitialConditions", "SimConfig", "load_config", "apply_overrides"]


@dataclass
class InitialConditions:
    """Initial-fleet sampling parameters.

    Two placement modes: "platoon" lines vehicles up in driving order with
    random longitudinal gaps in [gap_lo, gap_hi], while "uniform" rejection-
    samples positions over a box of length x_span keeping pairwise elliptic
    distances above the safety distance plus separation_margin.
    """

    mode: str = "platoon"
    gap_lo: float = 26.0
    gap_hi: float = 34.0
    separation_margin: float = 2.0
    lateral_margin: float = 3.2
    speed_lo: float = 29.0
    speed_hi: float = 31.0
    theta_lo: float = -0.03
    theta_hi: float = 0.03
    x_span: float = 150.0


@dataclass
class SimConfig:
    """Full run configuration with the default road/controller parameter set
    (4-lane-equivalent road, 35 m/s limit, 30 m/s set-point)."""

    n: int = 10
    dt: float = 2e-3
    t_end: float = 340.0
    seed: int = 6
    record_stride: int = 100
    hold_inputs: bool = False

    a: float = 7.2
    v_max: float = 35.0
    v_star: float = 30.0
    phi: float = 0.25

    mu1: float = 0.5
    mu2: float = 0.1
    A: float = 1.0
    eps: float = 0.2
    q: float = 3e-3
    c: float = 1.5
    lam: float = 25.0
    p: float = 5.11
    sigma: float = 5.0
    L: float | None = None
    m: int | None = None

    v_threshold: float = 0.1
    theta_threshold: float = 0.01

    ic: InitialConditions = field(default_factory=InitialConditions)

    def resolved_L(self) -> float:
        closed_form = safety_distance(self.sigma, self.phi, self.p)
        if self.L is None:
            return closed_form
        if self.L < closed_form:
            warnings.warn(
                f"configured safety distance L={self.L} is below the "
                f"collision-geometry floor {closed_form:.4f} m", stacklevel=2)
        return self.L

    def resolved_m(self) -> int:
        if self.m is not None:
            return self.m
        return estimate_m(self.resolved_L(), self.lam, self.p)

    def road(self) -> RoadSpec:
        return RoadSpec(a=self.a, v_max=self.v_max, v_star=self.v_star, phi=self.phi)

    def controller_params(self) -> ControllerParams:
        return ControllerParams(
            mu1=self.mu1, mu2=self.mu2, A=self.A,
            v_star=self.v_star, v_max=self.v_max, phi=self.phi,
            p=self.p, sigma=self.sigma, m=self.resolved_m(),
            vehicle=VehiclePotentialParams(q=self.q, L=self.resolved_L(),
                                           lam=self.lam),
            boundary=BoundaryPotentialParams(a=self.a, c=self.c),
            gain=GainShaping(eps=self.eps),
        )

    def validate(self) -> None:
        if self.n < 1:
            raise ConfigError("n: need at least one vehicle")
        if self.dt <= 0.0:
            raise ConfigError("dt: step must be positive")
        if self.t_end < 0.0:
            raise ConfigError("t_end: horizon must be nonnegative")
        if self.record_stride < 1:
            raise ConfigError("record_stride: must be at least 1")
        if math.cos(self.phi) < self.v_star / self.v_max:
            raise ConfigError(
                f"phi: cos(phi)={math.cos(self.phi):.6f} must be at least "
                f"v_star/v_max={self.v_star / self.v_max:.6f}")
        if not (0.0 < self.ic.speed_lo <= self.ic.speed_hi < self.v_max):
            raise ConfigError("ic.speed_lo/speed_hi: range must sit inside (0, v_max)")
        if not (-self.phi < self.ic.theta_lo <= self.ic.theta_hi < self.phi):
            raise ConfigError("ic.theta_lo/theta_hi: range must sit inside (-phi, phi)")
        if self.ic.lateral_margin >= self.a:
            raise ConfigError("ic.lateral_margin: leaves no lateral room")
        if self.ic.mode not in ("platoon", "uniform"):
            raise ConfigError("ic.mode: must be 'platoon' or 'uniform'")
        if not (0.0 < self.ic.gap_lo <= self.ic.gap_hi):
            raise ConfigError("ic.gap_lo/gap_hi: need 0 < gap_lo <= gap_hi")
        try:
            self.road()
            self.controller_params()
        except ValueError as exc:
            raise ConfigError(str(exc)) from exc

    def to_dict(self) -> dict:
        d = dataclasses.asdict(self)
        return d


def _schema() -> dict[str, type]:
    out: dict[str, type] = {}
    for f in dataclasses.fields(SimConfig):
        if f.name == "ic":
            for g in dataclasses.fields(InitialConditions):
                out[f"ic.{g.name}"] = str if g.name == "mode" else float
        else:
            out[f.name] = {"n": int, "seed": int, "record_stride": int,
                           "hold_inputs": bool, "m": int}.get(f.name, float)
    return out


_SCHEMA = _schema()
_OPTIONAL = {"L", "m"}


def _coerce(key: str, raw, target: type):
    if raw is None or (isinstance(raw, str) and raw.lower() in ("none", "null")):
        if key in _OPTIONAL:
            return None
        raise ConfigError(f"{key}: value may not be null")
    if target is str:
        return str(raw)
    if target is bool:
        if isinstance(raw, bool):
            return raw
        if isinstance(raw, str) and raw.lower() in ("true", "false"):
            return raw.lower() == "true"
        raise ConfigError(f"{key}: expected true/false, got {raw!r}")
    try:
        if target is int:
            if isinstance(raw, float) and raw != int(raw):
                raise ValueError
            return int(raw)
        return float(raw)
    except (TypeError, ValueError):
        raise ConfigError(f"{key}: expected {target.__name__}, got {raw!r}") from None


def _set_key(cfg: SimConfig, key: str, raw) -> None:
    if key not in _SCHEMA:
        raise ConfigError(f"{key}: unknown configuration key")
    value = _coerce(key, raw, _SCHEMA[key])
    if key.startswith("ic."):
        setattr(cfg.ic, key[3:], value)
    else:
        setattr(cfg, key, value)


def _flatten(prefix: str, obj: dict, out: dict) -> None:
    for k, v in obj.items():
        dotted = f"{prefix}{k}"
        if isinstance(v, dict):
            _flatten(f"{dotted}.", v, out)
        else:
            out[dotted] = v


def load_config(path: str | Path | None) -> SimConfig:
    """Load a configuration file (JSON or `key = value` lines with dotted
    keys); None yields the defaults."""
    cfg = SimConfig()
    if path is None:
        return cfg
    text = Path(path).read_text()
    stripped = text.lstrip()
    flat: dict[str, object] = {}
    if stripped.startswith("{"):
        try:
            data = json.loads(text)
        except json.JSONDecodeError as exc:
            raise ConfigError(f"{path}: line {exc.lineno}: {exc.msg}") from exc
        if not isinstance(data, dict):
            raise ConfigError(f"{path}: top level must be an object")
        _flatten("", data, flat)
    else:
        for lineno, line in enumerate(text.splitlines(), start=1):
            line = line.split("#", 1)[0].strip()
            if not line:
                continue
            if "=" not in line:
                raise ConfigError(f"{path}: line {lineno}: expected key = value")
            key, _, raw = line.partition("=")
            flat[key.strip()] = raw.strip()
    for key, raw in flat.items():
        try:
            _set_key(cfg, key, raw)
        except ConfigError as exc:
            raise ConfigError(f"{path}: {exc}") from None
    return cfg


def apply_overrides(cfg: SimConfig, overrides: list[str]) -> SimConfig:
    """Apply dotted-key=value overrides in place; values are type-checked
    against the schema before any run."""
    for item in overrides:
        if "=" not in item:
            raise ConfigError(f"override {item!r}: expected key=value")
        key, _, raw = item.partition("=")
        _set_key(cfg, key.strip(), raw.strip())
    return cfg
