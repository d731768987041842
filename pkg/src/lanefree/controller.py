"""Decentralized feedback laws: repulsion sums, state-dependent gain,
acceleration, turning rate, and steering-angle recovery."""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import NamedTuple, Sequence

import numpy as np

from . import _kernels
from .errors import IntegrityError
from .potentials import (
    BoundaryPotentialParams,
    GainShaping,
    VehiclePotentialParams,
)

__all__ = [
    "VehicleState",
    "ControlCommand",
    "ControllerParams",
    "repulsion_sums",
    "gain_k",
    "longitudinal_accel",
    "turning_rate",
    "steering_angle",
    "control_step",
]


class VehicleState(NamedTuple):
    x: float
    y: float
    theta: float
    v: float


class ControlCommand(NamedTuple):
    u: float
    F: float
    delta: float


@dataclass(frozen=True)
class ControllerParams:
    """Full parameter set of the decentralized controller."""

    mu1: float
    mu2: float
    A: float
    v_star: float
    v_max: float
    phi: float
    p: float
    sigma: float
    m: int
    vehicle: VehiclePotentialParams
    boundary: BoundaryPotentialParams
    gain: GainShaping = field(default_factory=lambda: GainShaping(eps=0.2))

    def __post_init__(self):
        if min(self.mu1, self.mu2, self.A) <= 0.0:
            raise ValueError("gains mu1, mu2 and barrier weight A must be positive")
        if not (0.0 < self.v_star < self.v_max):
            raise ValueError("need 0 < v_star < v_max")
        if not (0.0 < self.phi < math.pi / 2):
            raise ValueError("orientation bound must lie in (0, pi/2)")
        if math.cos(self.phi) < self.v_star / self.v_max:
            raise ValueError(
                f"orientation bound too wide: cos(phi)={math.cos(self.phi):.6f} "
                f"< v_star/v_max={self.v_star / self.v_max:.6f}")
        if not (self.p >= 1.0):
            raise ValueError("eccentricity weight must satisfy p >= 1")
        if self.sigma <= 0.0:
            raise ValueError("vehicle length must be positive")
        if self.m < 2:
            raise ValueError("neighbor-count bound must be at least 2")

    @property
    def cos_phi(self) -> float:
        return math.cos(self.phi)

    def kernel_args(self) -> tuple:
        """Positional parameter pack shared by all fleet kernels."""
        b = self.boundary
        return (self.p, self.vehicle.q, self.vehicle.L, self.vehicle.lam,
                b.a, b.c, b.y_flat, self.gain.eps,
                self.mu1, self.mu2, self.A, self.v_star, self.v_max,
                self.cos_phi)


def fleet_arrays(fleet: Sequence[VehicleState]):
    """Stack a fleet into (x, y, theta, v) float64 arrays."""
    n = len(fleet)
    x = np.empty(n)
    y = np.empty(n)
    th = np.empty(n)
    v = np.empty(n)
    for i, s in enumerate(fleet):
        x[i] = s.x
        y[i] = s.y
        th[i] = s.theta
        v[i] = s.v
    return x, y, th, v


def repulsion_sums(i: int, fleet: Sequence[VehicleState],
                   params: ControllerParams) -> tuple[float, float]:
    """Repulsion-force components on vehicle i, accumulated in ascending
    neighbor index.  Neighbors beyond the sensing radius contribute exactly 0."""
    xi, yi = fleet[i].x, fleet[i].y
    q, L, lam = params.vehicle.q, params.vehicle.L, params.vehicle.lam
    p = params.p
    Sx = 0.0
    Sy = 0.0
    for j, other in enumerate(fleet):
        if j == i:
            continue
        ddx = xi - other.x
        ddy = yi - other.y
        d = math.sqrt(ddx * ddx + p * ddy * ddy)
        if d <= L:
            raise IntegrityError("separation", i, j, f"d={d} <= L={L}")
        if d < lam:
            _, dV = _kernels.v_pair(d, q, L, lam)
            Sx += dV * ddx / d
            Sy += dV * ddy / d
    return Sx, Sy


def gain_k(i: int, fleet: Sequence[VehicleState], params: ControllerParams) -> float:
    """State-dependent longitudinal gain of vehicle i."""
    Sx, _ = repulsion_sums(i, fleet, params)
    return _gain_from_sums(fleet[i], Sx, params)


def _gain_from_sums(state: VehicleState, Sx: float, params: ControllerParams) -> float:
    cth = math.cos(state.theta)
    gden = params.v_max * cth - params.v_star
    if gden <= 0.0:
        raise IntegrityError("gain-denominator",
                             detail=f"v_max*cos(theta)={params.v_max * cth} <= v_star")
    fi, _ = _kernels.f_gain(-Sx, params.gain.eps)
    return params.mu2 + Sx / params.v_star \
        + params.v_max * cth / (params.v_star * gden) * fi


def longitudinal_accel(i: int, fleet: Sequence[VehicleState],
                       params: ControllerParams) -> float:
    """Acceleration command for vehicle i."""
    Sx, _ = repulsion_sums(i, fleet, params)
    state = fleet[i]
    k = _gain_from_sums(state, Sx, params)
    cth = math.cos(state.theta)
    return -(k / cth) * (state.v * cth - params.v_star) - Sx / cth


def turning_rate(i: int, fleet: Sequence[VehicleState], params: ControllerParams,
                 F: float) -> float:
    """Turning-rate command for vehicle i; F must be the acceleration computed
    for the same fleet state."""
    _, Sy = repulsion_sums(i, fleet, params)
    state = fleet[i]
    if state.v <= 0.0:
        raise IntegrityError("speed", i, detail=f"v={state.v} <= 0")
    cth = math.cos(state.theta)
    sth = math.sin(state.theta)
    dcos = cth - params.cos_phi
    if dcos <= 0.0:
        raise IntegrityError("orientation", i,
                             detail=f"|theta|={abs(state.theta)} >= phi={params.phi}")
    _, dU = _kernels.u_boundary(state.y, params.boundary.a, params.boundary.c,
                                params.boundary.y_flat)
    return -(params.mu1 * state.v * sth + dU + params.p * Sy + sth * F) \
        / (params.v_star + params.A / (state.v * dcos * dcos))


def steering_angle(u: float, v: float, sigma: float) -> float:
    """Recover the steering angle from the turning rate and current speed."""
    if v <= 0.0:
        raise ValueError(f"speed must be positive to recover steering, got {v}")
    return math.atan(sigma * u / v)


def control_step(fleet: Sequence[VehicleState],
                 params: ControllerParams) -> list[ControlCommand]:
    """Fleet-wide command evaluation: repulsion sums, then gain, acceleration,
    turning rate and steering per vehicle, all from the same frozen state."""
    x, y, th, v = fleet_arrays(fleet)
    n = len(fleet)
    dx = np.empty(n); dy = np.empty(n); dth = np.empty(n); dv = np.empty(n)
    u = np.empty(n); F = np.empty(n); k = np.empty(n)
    Sx = np.empty(n); Sy = np.empty(n)
    st, i, j, _ = _kernels.fleet_rhs(x, y, th, v, *params.kernel_args(),
                                     dx, dy, dth, dv, u, F, k, Sx, Sy)
    _raise_for_status(st, i, j)
    return [ControlCommand(u=float(u[i]), F=float(F[i]),
                           delta=steering_angle(float(u[i]), float(v[i]),
                                                params.sigma))
            for i in range(n)]


_STATUS_CONSTRAINT = {
    1: "separation",
    2: "gain-denominator",
    3: "speed",
    4: "lateral",
    5: "orientation",
}


def _raise_for_status(status: int, i: int, j: int) -> None:
    if status == 0:
        return
    constraint = _STATUS_CONSTRAINT.get(status, f"status {status}")
    raise IntegrityError(constraint, int(i), int(j))
