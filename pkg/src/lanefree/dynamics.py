"""Kinematic bicycle model right-hand side and state-space membership."""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import NamedTuple, Sequence

from .controller import ControlCommand, VehicleState, fleet_arrays
from . import _kernels

__all__ = [
    "FleetState",
    "RoadSpec",
    "OmegaVerdict",
    "state_derivative",
    "in_omega",
]


@dataclass(frozen=True)
class RoadSpec:
    """Road half-width, speed limits, and orientation bound."""

    a: float
    v_max: float
    v_star: float
    phi: float

    def __post_init__(self):
        if self.a <= 0.0:
            raise ValueError("road half-width must be positive")
        if not (0.0 < self.v_star < self.v_max):
            raise ValueError("need 0 < v_star < v_max")
        if not (0.0 < self.phi < math.pi / 2):
            raise ValueError("orientation bound must lie in (0, pi/2)")
        if math.cos(self.phi) < self.v_star / self.v_max:
            raise ValueError("cos(phi) must be at least v_star/v_max")


@dataclass
class FleetState:
    """Ordered vehicle states at a simulation time; indices are stable."""

    vehicles: list[VehicleState]
    t: float = 0.0

    def __len__(self) -> int:
        return len(self.vehicles)


class OmegaVerdict(NamedTuple):
    ok: bool
    violation: str | None
    i: int | None
    j: int | None
    d_min: float


_OMEGA_CODES = {1: "lateral", 2: "orientation", 3: "speed", 4: "separation"}


def _vehicles(fleet) -> Sequence[VehicleState]:
    return fleet.vehicles if isinstance(fleet, FleetState) else fleet


def state_derivative(fleet: FleetState | Sequence[VehicleState],
                     commands: Sequence[ControlCommand]) -> list[VehicleState]:
    """Time derivative of each vehicle state under the given commands,
    returned in the same (x, y, theta, v) layout."""
    vehicles = _vehicles(fleet)
    if len(commands) != len(vehicles):
        raise ValueError("commands must align with fleet indices")
    out = []
    for s, cmd in zip(vehicles, commands):
        cth = math.cos(s.theta)
        sth = math.sin(s.theta)
        out.append(VehicleState(x=s.v * cth, y=s.v * sth, theta=cmd.u, v=cmd.F))
    return out


def in_omega(fleet: FleetState | Sequence[VehicleState], road: RoadSpec,
             L: float, p: float) -> OmegaVerdict:
    """Strict membership check of the open state space; reports the first
    violated constraint (per-vehicle bounds in ascending index, then pairwise
    separation) and the minimum pairwise elliptic distance."""
    x, y, th, v = fleet_arrays(_vehicles(fleet))
    code, i, j, d_min = _kernels.omega_check(x, y, th, v, road.a, road.phi,
                                             road.v_max, L, p)
    if code == 0:
        return OmegaVerdict(True, None, None, None, float(d_min))
    return OmegaVerdict(False, _OMEGA_CODES[code], int(i), int(j), float(d_min))
