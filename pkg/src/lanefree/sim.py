"""Fixed-step closed-loop integration with state-space guarding, scenario
generation, the run loop, and metric extraction."""

from __future__ import annotations

import math
from typing import Sequence

import numpy as np

from . import _kernels
from .config import SimConfig
from .controller import (
    ControllerParams,
    ControlCommand,
    VehicleState,
    fleet_arrays,
    steering_angle,
    _raise_for_status,
)
from .dynamics import FleetState
from .errors import InfeasibleScenarioError, IntegrityError
from .lyapunov import EnergyReport, RunMonitor, energy_H
from .potentials import barrier_kappa, barrier_omega, barrier_rho
from .trace import SimTrace

__all__ = [
    "rk4_step",
    "generate_scenario",
    "run_simulation",
    "compute_metrics",
    "CODE_VERSION",
]

CODE_VERSION = "0.1.0"
MAX_HALVINGS = 20
_MAX_IC_ATTEMPTS = 1_000_000

_OMEGA_CODES = {1: "lateral", 2: "orientation", 3: "speed", 4: "separation"}


def _omega_args(params: ControllerParams) -> tuple:
    return (params.boundary.a, params.phi, params.v_max, params.vehicle.L,
            params.p)


def _guarded_step(x, y, th, v, dt, params: ControllerParams, hold: bool,
                  depth: int = 0):
    """One guarded RK4 advance by dt.

    If the proposed state leaves the admissible set (or a stage evaluation
    hits a singular region), the interval is split into two guarded half
    steps, up to MAX_HALVINGS levels deep.  Returns
    (x, y, th, v, u0, F0, k0, halvings, d_min) where u0/F0/k0 are the
    commands at the interval's start state and d_min is the minimum pairwise
    distance of the accepted end state.
    """
    n = x.shape[0]
    xo = np.empty(n); yo = np.empty(n); tho = np.empty(n); vo = np.empty(n)
    u0 = np.empty(n); F0 = np.empty(n); k0 = np.empty(n)
    st, i, j = _kernels.rk4_step_kernel(x, y, th, v, dt, *params.kernel_args(),
                                        hold, xo, yo, tho, vo, u0, F0, k0)
    if st == 0:
        code, ci, cj, d_min = _kernels.omega_check(xo, yo, tho, vo,
                                                   *_omega_args(params))
        if code == 0:
            return xo, yo, tho, vo, u0, F0, k0, 0, float(d_min)
        constraint, vi, vj = _OMEGA_CODES[code], int(ci), int(cj)
    else:
        constraint, vi, vj = {1: "separation", 2: "gain-denominator",
                              3: "speed", 4: "lateral",
                              5: "orientation"}[st], int(i), int(j)
    if depth >= MAX_HALVINGS:
        raise IntegrityError(
            constraint, vi, vj,
            f"integrator left the admissible set even at dt/2^{depth}; "
            "the step size or scenario configuration needs revisiting")
    xa, ya, tha, va, u0, F0, k0, h1, _ = _guarded_step(
        x, y, th, v, 0.5 * dt, params, hold, depth + 1)
    xb, yb, thb, vb, _, _, _, h2, d_min = _guarded_step(
        xa, ya, tha, va, 0.5 * dt, params, hold, depth + 1)
    return xb, yb, thb, vb, u0, F0, k0, 1 + h1 + h2, d_min


def rk4_step(fleet: FleetState, params: ControllerParams, dt: float,
             hold_inputs: bool = False) -> tuple[FleetState, int]:
    """Advance a fleet by one guarded RK4 step; returns the next state and
    the number of interval halvings that were needed."""
    x, y, th, v = fleet_arrays(fleet.vehicles)
    code, ci, cj, _ = _kernels.omega_check(x, y, th, v, *_omega_args(params))
    if code != 0:
        raise IntegrityError(_OMEGA_CODES[code], int(ci), int(cj),
                             "initial state outside the admissible set")
    xo, yo, tho, vo, _, _, _, halvings, _ = _guarded_step(
        x, y, th, v, dt, params, hold_inputs)
    vehicles = [VehicleState(float(xo[i]), float(yo[i]), float(tho[i]),
                             float(vo[i])) for i in range(len(fleet.vehicles))]
    return FleetState(vehicles=vehicles, t=fleet.t + dt), halvings


def generate_scenario(config: SimConfig) -> FleetState:
    """Rejection-sample an admissible initial fleet, deterministically for a
    fixed seed (counter-based Philox generator)."""
    rng = np.random.Generator(np.random.Philox(config.seed))
    ic = config.ic
    L = config.resolved_L()
    p = config.p
    sep = L + ic.separation_margin
    y_max = config.a - ic.lateral_margin
    if y_max <= 0.0:
        raise InfeasibleScenarioError("lateral margin leaves no road")
    if ic.mode == "platoon":
        placed = []
        x = 0.0
        for _ in range(config.n):
            x += float(rng.uniform(ic.gap_lo, ic.gap_hi))
            placed.append(VehicleState(
                x=x,
                y=float(rng.uniform(-y_max, y_max)),
                theta=float(rng.uniform(ic.theta_lo, ic.theta_hi)),
                v=float(rng.uniform(ic.speed_lo, ic.speed_hi)),
            ))
        return FleetState(vehicles=placed, t=0.0)
    placed: list[VehicleState] = []
    attempts = 0
    while len(placed) < config.n:
        if attempts >= _MAX_IC_ATTEMPTS:
            density = config.n * sep / max(ic.x_span, 1e-9)
            raise InfeasibleScenarioError(
                f"placed {len(placed)}/{config.n} vehicles after {attempts} "
                f"attempts; longitudinal packing ratio ~{density:.2f} "
                "(shrink margins or grow ic.x_span)")
        attempts += 1
        x = float(rng.uniform(0.0, ic.x_span))
        y = float(rng.uniform(-y_max, y_max))
        theta = float(rng.uniform(ic.theta_lo, ic.theta_hi))
        v = float(rng.uniform(ic.speed_lo, ic.speed_hi))
        ok = True
        for other in placed:
            dx = x - other.x
            dy = y - other.y
            if math.sqrt(dx * dx + p * dy * dy) < sep:
                ok = False
                break
        if ok:
            placed.append(VehicleState(x=x, y=y, theta=theta, v=v))
    return FleetState(vehicles=placed, t=0.0)


def _vehicle_records(x, y, th, v, u, F, k, sigma) -> list[dict]:
    out = []
    for i in range(x.shape[0]):
        out.append({
            "x": float(x[i]), "y": float(y[i]), "theta": float(th[i]),
            "v": float(v[i]), "u": float(u[i]), "F": float(F[i]),
            "delta": steering_angle(float(u[i]), float(v[i]), sigma),
            "k": float(k[i]),
        })
    return out


def run_simulation(config: SimConfig,
                   initial: FleetState | None = None) -> SimTrace:
    """Integrate the closed loop over the configured horizon.

    Every accepted step is checked for state-space membership and against the
    certified energy-level bounds; per-step extrema are accumulated so the
    summary reflects the full step resolution, not just the recorded stride.
    """
    config.validate()
    params = config.controller_params()
    fleet0 = initial if initial is not None else generate_scenario(config)
    n = len(fleet0.vehicles)
    x, y, th, v = fleet_arrays(fleet0.vehicles)

    code, ci, cj, d_min0 = _kernels.omega_check(x, y, th, v,
                                                *_omega_args(params))
    if code != 0:
        raise IntegrityError(_OMEGA_CODES[code], int(ci), int(cj),
                             "initial fleet outside the admissible set")

    rep0 = energy_H(fleet0.vehicles, params)
    H0 = rep0.H
    monitor = RunMonitor(params=params, H0=H0, n=n, dt=config.dt,
                         v_threshold=config.v_threshold,
                         theta_threshold=config.theta_threshold)

    header = {
        "code_version": CODE_VERSION,
        "config": config.to_dict(),
        "n": n,
        "L": params.vehicle.L,
        "m": params.m,
        "H0": H0,
        "R_H0": monitor.R0,
        "F_bound": monitor.F_bound,
        "u_bound": monitor.u_bound,
        "theta_bound": monitor.omega0,
        "lateral_bound": monitor.kappa0,
        "separation_bound": monitor.rho0,
    }
    trace = SimTrace(header=header)

    steps = round(config.t_end / config.dt)
    kargs = params.kernel_args()
    hold = config.hold_inputs
    stride = config.record_stride

    max_abs_F = np.zeros(max(steps, 1))
    max_abs_u = np.zeros(max(steps, 1))
    d_min_global = float(d_min0)
    halvings_total = 0
    H_prev_rep = rep0
    status_error: IntegrityError | None = None

    def snapshot_record(t, xs, ys, ths, vs, us, Fs, ks, rep, d_min):
        verdict = monitor.verdict()
        trace.records.append({
            "t": t,
            "d_min": d_min if math.isfinite(d_min) else None,
            "vehicles": _vehicle_records(xs, ys, ths, vs, us, Fs, ks,
                                         params.sigma),
            "energy": rep.as_dict(),
            "monitor": verdict.as_dict(),
        })

    step_idx = 0
    try:
        for step_idx in range(steps):
            xn, yn, thn, vn, u0, F0, k0, halv, d_min = _guarded_step(
                x, y, th, v, config.dt, params, hold)
            halvings_total += halv
            if step_idx % stride == 0:
                snapshot_record(step_idx * config.dt, x, y, th, v, u0, F0, k0,
                                H_prev_rep,
                                d_min_global if step_idx == 0 else last_d_min)
            x, y, th, v = xn, yn, thn, vn
            last_d_min = float(d_min)
            if last_d_min < d_min_global:
                d_min_global = last_d_min
            max_abs_F[step_idx] = np.abs(F0).max()
            max_abs_u[step_idx] = np.abs(u0).max()
            t_next = (step_idx + 1) * config.dt
            st, kin_long, kin_lat, bpot, ppot, obar, diss = \
                _kernels.energy_kernel(x, y, th, v, *kargs)
            _raise_for_status(st, -1, -1)
            H_prev_rep = EnergyReport(
                H=kin_long + kin_lat + bpot + ppot + obar,
                kinetic_long=kin_long, kinetic_lat=kin_lat, boundary_pot=bpot,
                pairwise_pot=ppot, orientation_barrier=obar,
                dissipation_analytic=diss)
            monitor.step(t_next, x, y, th, v, u0, F0, k0, H_prev_rep.H,
                         last_d_min)
    except IntegrityError as exc:
        status_error = exc

    # final record needs the commands at the terminal state
    if status_error is None:
        dx = np.empty(n); dy = np.empty(n); dth = np.empty(n); dv = np.empty(n)
        uf = np.empty(n); Ff = np.empty(n); kf = np.empty(n)
        Sx = np.empty(n); Sy = np.empty(n)
        st, i, j, d_min_f = _kernels.fleet_rhs(x, y, th, v, *kargs,
                                               dx, dy, dth, dv, uf, Ff, kf,
                                               Sx, Sy)
        _raise_for_status(st, i, j)
        d_min_final = float(d_min_f) if n > 1 else math.inf
        snapshot_record(steps * config.dt, x, y, th, v, uf, Ff, kf,
                        H_prev_rep, d_min_final)

    verdict = monitor.verdict()
    done_steps = step_idx + 1 if status_error is None and steps > 0 else step_idx
    tail = max(1, int(math.ceil(0.1 * steps))) if steps > 0 else 1
    run_max_F = float(max_abs_F[:steps].max()) if steps > 0 else 0.0
    run_max_u = float(max_abs_u[:steps].max()) if steps > 0 else 0.0
    tail_max_F = float(max_abs_F[steps - tail:steps].max()) if steps > 0 else 0.0
    tail_max_u = float(max_abs_u[steps - tail:steps].max()) if steps > 0 else 0.0

    trace.summary = {
        "completed": status_error is None,
        "abort_reason": str(status_error) if status_error is not None else None,
        "t_final": done_steps * config.dt,
        "steps": steps,
        "halvings": halvings_total,
        "d_min_global": d_min_global if n > 1 else None,
        "H_final": H_prev_rep.H,
        "max_abs_F": run_max_F,
        "max_abs_u": run_max_u,
        "tail_max_abs_F": tail_max_F,
        "tail_max_abs_u": tail_max_u,
        "final_speeds": [float(s) for s in v],
        "final_thetas": [float(s) for s in th],
        "final_lateral": [float(s) for s in y],
        "monitor": verdict.as_dict(),
    }
    if status_error is not None:
        raise_partial = IntegrityError(status_error.constraint,
                                       status_error.i, status_error.j,
                                       "run aborted; partial trace attached")
        raise_partial.trace = trace
        raise raise_partial
    return trace


def compute_metrics(trace: SimTrace) -> dict:
    """Extract run metrics from a trace: minimum-distance series, sustained
    convergence times, command extrema, and final poses."""
    if not trace.records:
        raise ValueError("trace has no records")
    ts = [rec["t"] for rec in trace.records]
    d_series = [rec.get("d_min") for rec in trace.records]
    have_d = [d for d in d_series if d is not None]
    summary = trace.summary or {}
    v_star = trace.header["config"]["v_star"]
    v_thresh = trace.header["config"]["v_threshold"]
    th_thresh = trace.header["config"]["theta_threshold"]

    n = trace.header["n"]
    conv_v = [0.0] * n
    conv_th = [0.0] * n
    for rec in trace.records:
        for i, veh in enumerate(rec["vehicles"]):
            if abs(veh["v"] - v_star) >= v_thresh:
                conv_v[i] = rec["t"]
            if abs(veh["theta"]) >= th_thresh:
                conv_th[i] = rec["t"]

    last = trace.records[-1]
    return {
        "t": ts,
        "d_min_series": d_series,
        "d_min_global": summary.get("d_min_global",
                                    min(have_d) if have_d else None),
        "convergence_time_v": conv_v,
        "convergence_time_theta": conv_th,
        "max_abs_F": summary.get("max_abs_F"),
        "max_abs_u": summary.get("max_abs_u"),
        "final_lateral": [veh["y"] for veh in last["vehicles"]],
        "final_max_abs_theta": max(abs(veh["theta"]) for veh in last["vehicles"]),
    }
