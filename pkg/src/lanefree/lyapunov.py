"""Energy/barrier function, its dissipation identity, the certified gain
bound, and runtime monitors for the closed-loop guarantees."""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Sequence

from . import _kernels
from .controller import (
    ControlCommand,
    ControllerParams,
    VehicleState,
    fleet_arrays,
    gain_k,
    _raise_for_status,
)
from .potentials import (
    barrier_kappa,
    barrier_omega,
    barrier_rho,
    bound_b1,
    bound_b2,
    gain_shaping,
)

__all__ = [
    "EnergyReport",
    "MonitorVerdict",
    "RunMonitor",
    "energy_H",
    "dissipation_rate",
    "gain_bound_R",
    "turning_rate_bound",
]


@dataclass(frozen=True)
class EnergyReport:
    """Total energy, its five summands, and the analytic dissipation rate."""

    H: float
    kinetic_long: float
    kinetic_lat: float
    boundary_pot: float
    pairwise_pot: float
    orientation_barrier: float
    dissipation_analytic: float

    def as_dict(self) -> dict:
        return {
            "H": self.H,
            "kinetic_long": self.kinetic_long,
            "kinetic_lat": self.kinetic_lat,
            "boundary_pot": self.boundary_pot,
            "pairwise_pot": self.pairwise_pot,
            "orientation_barrier": self.orientation_barrier,
            "dissipation_analytic": self.dissipation_analytic,
        }


def energy_H(fleet: Sequence[VehicleState], params: ControllerParams) -> EnergyReport:
    """Total energy of the fleet: relative kinetic terms, boundary and
    pairwise potentials, and the orientation barrier."""
    x, y, th, v = fleet_arrays(fleet)
    st, kin_long, kin_lat, bpot, ppot, obar, diss = _kernels.energy_kernel(
        x, y, th, v, *params.kernel_args())
    _raise_for_status(st, -1, -1)
    H = kin_long + kin_lat + bpot + ppot + obar
    return EnergyReport(H=H, kinetic_long=kin_long, kinetic_lat=kin_lat,
                        boundary_pot=bpot, pairwise_pot=ppot,
                        orientation_barrier=obar, dissipation_analytic=diss)


def dissipation_rate(fleet: Sequence[VehicleState],
                     commands: Sequence[ControlCommand],
                     params: ControllerParams) -> float:
    """Exact time derivative of the energy along the closed loop:
    -sum k_i (v_i cos(theta_i) - v*)^2 - mu1 sum v_i^2 sin^2(theta_i)."""
    if len(commands) != len(fleet):
        raise ValueError("commands must align with fleet indices")
    total = 0.0
    for i, s in enumerate(fleet):
        k = gain_k(i, fleet, params)
        dev = s.v * math.cos(s.theta) - params.v_star
        total -= k * dev * dev
        sth = math.sin(s.theta)
        total -= params.mu1 * s.v * s.v * sth * sth
    return total


def gain_bound_R(s: float, params: ControllerParams, m: int | None = None) -> float:
    """Certified upper bound on the state-dependent gain at energy level s;
    non-decreasing in s, with floor mu2."""
    if s < 0.0:
        raise ValueError("energy level must be nonnegative")
    if m is None:
        m = params.m
    rho = barrier_rho(s, params.vehicle)
    b1 = bound_b1(rho, params.vehicle) if rho < params.vehicle.lam else 0.0
    cphi = params.cos_phi
    # the shaping function is non-decreasing, so its max over |z| <= B is f(B)
    fmax, _ = gain_shaping(m * b1, params.gain.eps)
    num = params.v_max * (params.A + s * cphi * (1.0 - cphi)) * fmax
    den = params.A * params.v_star * (params.v_max - params.v_star) \
        + params.v_star * (params.v_max * cphi - params.v_star) * (1.0 - cphi) * s
    return params.mu2 + (m / params.v_star) * b1 + num / den


def turning_rate_bound(s: float, params: ControllerParams,
                       m: int | None = None) -> float:
    """Certified upper bound on |u| at energy level s."""
    if m is None:
        m = params.m
    R = gain_bound_R(s, params, m)
    rho = barrier_rho(s, params.vehicle)
    b1 = bound_b1(rho, params.vehicle) if rho < params.vehicle.lam else 0.0
    b2 = bound_b2(barrier_kappa(s, params.boundary), params.boundary)
    return ((params.mu1 + R) * params.v_max + b2
            + m * math.sqrt(params.p) * b1) / params.v_star


@dataclass
class MonitorVerdict:
    """Pass/fail flags with the timestamps and magnitudes of the worst
    offenders; convergence times are per-vehicle."""

    h_nonincreasing: bool
    worst_h_increase: float
    worst_h_increase_t: float | None
    h_below_initial: bool
    separation_ok: bool
    speed_ok: bool
    theta_ok: bool
    lateral_ok: bool
    F_bound_ok: bool
    u_bound_ok: bool
    k_bound_ok: bool
    barrier_theta_ok: bool
    barrier_lateral_ok: bool
    barrier_separation_ok: bool
    convergence_v: list[float | None]
    convergence_theta: list[float | None]

    @property
    def all_ok(self) -> bool:
        return (self.h_nonincreasing and self.h_below_initial
                and self.separation_ok and self.speed_ok and self.theta_ok
                and self.lateral_ok and self.F_bound_ok and self.u_bound_ok
                and self.k_bound_ok and self.barrier_theta_ok
                and self.barrier_lateral_ok and self.barrier_separation_ok)

    def as_dict(self) -> dict:
        return {
            "all_ok": self.all_ok,
            "h_nonincreasing": self.h_nonincreasing,
            "worst_h_increase": self.worst_h_increase,
            "worst_h_increase_t": self.worst_h_increase_t,
            "h_below_initial": self.h_below_initial,
            "separation_ok": self.separation_ok,
            "speed_ok": self.speed_ok,
            "theta_ok": self.theta_ok,
            "lateral_ok": self.lateral_ok,
            "F_bound_ok": self.F_bound_ok,
            "u_bound_ok": self.u_bound_ok,
            "k_bound_ok": self.k_bound_ok,
            "barrier_theta_ok": self.barrier_theta_ok,
            "barrier_lateral_ok": self.barrier_lateral_ok,
            "barrier_separation_ok": self.barrier_separation_ok,
            "convergence_v": self.convergence_v,
            "convergence_theta": self.convergence_theta,
        }


@dataclass
class RunMonitor:
    """Observational runtime monitor for one simulation.

    Checks every step against the certified bounds evaluated at the initial
    energy; never affects the control.  The per-step energy tolerance absorbs
    integrator roundoff only, not model error.
    """

    params: ControllerParams
    H0: float
    n: int
    dt: float
    v_threshold: float = 0.1
    theta_threshold: float = 0.01
    h_step_tol_scale: float = 1e-8

    def __post_init__(self):
        p = self.params
        self.R0 = gain_bound_R(self.H0, p)
        self.F_bound = self.R0 * p.v_max
        self.u_bound = turning_rate_bound(self.H0, p)
        self.omega0 = barrier_omega(self.H0, p.A, p.phi)
        self.kappa0 = barrier_kappa(self.H0, p.boundary)
        self.rho0 = barrier_rho(self.H0, p.vehicle)
        self.step_tol = self.h_step_tol_scale * (1.0 + self.H0)
        self.prev_H = self.H0
        self.steps = 0
        self.worst_increase = 0.0
        self.worst_increase_t: float | None = None
        self.h_nonincreasing = True
        self.h_below_initial = True
        self.separation_ok = True
        self.speed_ok = True
        self.theta_ok = True
        self.lateral_ok = True
        self.F_ok = True
        self.u_ok = True
        self.k_ok = True
        self.b_theta_ok = True
        self.b_lat_ok = True
        self.b_sep_ok = True
        # last time each vehicle violated its convergence threshold
        self._v_last_bad = [None] * self.n
        self._th_last_bad = [None] * self.n

    def step(self, t: float, x, y, th, v, u, F, k, H: float,
             d_min: float) -> None:
        """Record one accepted step (arrays are per-vehicle)."""
        p = self.params
        self.steps += 1
        inc = H - self.prev_H
        if inc > self.step_tol:
            self.h_nonincreasing = False
        if inc > self.worst_increase:
            self.worst_increase = inc
            self.worst_increase_t = t
        if H > self.H0 * (1.0 + self.h_step_tol_scale * self.steps):
            self.h_below_initial = False
        self.prev_H = H
        if d_min <= p.vehicle.L:
            self.separation_ok = False
        if d_min < self.rho0:
            self.b_sep_ok = False
        for i in range(self.n):
            if not (0.0 < v[i] < p.v_max):
                self.speed_ok = False
            if abs(th[i]) >= p.phi:
                self.theta_ok = False
            if abs(y[i]) >= p.boundary.a:
                self.lateral_ok = False
            if abs(th[i]) > self.omega0:
                self.b_theta_ok = False
            if abs(y[i]) > self.kappa0:
                self.b_lat_ok = False
            if abs(F[i]) > self.F_bound:
                self.F_ok = False
            if abs(u[i]) > self.u_bound:
                self.u_ok = False
            if not (p.mu2 <= k[i] <= self.R0):
                self.k_ok = False
            if abs(v[i] - p.v_star) >= self.v_threshold:
                self._v_last_bad[i] = t
            if abs(th[i]) >= self.theta_threshold:
                self._th_last_bad[i] = t

    def verdict(self) -> MonitorVerdict:
        conv_v = [0.0 if last is None else last + self.dt
                  for last in self._v_last_bad]
        conv_th = [0.0 if last is None else last + self.dt
                   for last in self._th_last_bad]
        return MonitorVerdict(
            h_nonincreasing=self.h_nonincreasing,
            worst_h_increase=self.worst_increase,
            worst_h_increase_t=self.worst_increase_t,
            h_below_initial=self.h_below_initial,
            separation_ok=self.separation_ok,
            speed_ok=self.speed_ok,
            theta_ok=self.theta_ok,
            lateral_ok=self.lateral_ok,
            F_bound_ok=self.F_ok,
            u_bound_ok=self.u_ok,
            k_bound_ok=self.k_ok,
            barrier_theta_ok=self.b_theta_ok,
            barrier_lateral_ok=self.b_lat_ok,
            barrier_separation_ok=self.b_sep_ok,
            convergence_v=conv_v,
            convergence_theta=conv_th,
        )
