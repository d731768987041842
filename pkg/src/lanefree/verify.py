"""Self-check suites: finite-difference gradients, the energy dissipation
identity, the collision-distance oracle, barrier inverses, and the pointwise
command bounds.  Each suite returns (name, passed, detail) tuples."""

from __future__ import annotations

import math

import numpy as np

from .config import SimConfig
from .controller import VehicleState, control_step, gain_k
from .geometry import max_collision_distance_bruteforce, safety_distance
from .lyapunov import energy_H, gain_bound_R, turning_rate_bound
from .potentials import (
    barrier_kappa,
    barrier_omega,
    barrier_rho,
    boundary_potential,
    gain_shaping,
    vehicle_potential,
)
from .sim import run_simulation

Check = tuple[str, bool, str]

_FD_STEP = 1e-6
_FD_RTOL = 1e-6


def _fd_relerr(fn, x: float, analytic: float, h: float = _FD_STEP) -> float:
    fd = (fn(x + h) - fn(x - h)) / (2.0 * h)
    scale = max(abs(analytic), 1e-9)
    return abs(fd - analytic) / scale


def suite_gradients(config: SimConfig | None = None, points: int = 1000) -> list[Check]:
    cfg = config or SimConfig()
    params = cfg.controller_params()
    vp, bp = params.vehicle, params.boundary
    rng = np.random.Generator(np.random.Philox(1234))
    checks: list[Check] = []

    span = vp.lam - vp.L
    worst = 0.0
    for _ in range(points):
        d = vp.L + span * float(rng.uniform(0.02, 0.98))
        _, dV = vehicle_potential(d, vp)
        worst = max(worst, _fd_relerr(lambda z: vehicle_potential(z, vp)[0], d, dV))
    checks.append(("vehicle potential gradient", worst < _FD_RTOL,
                   f"max rel err {worst:.3e}"))

    worst = 0.0
    for _ in range(points):
        yv = float(rng.uniform(-0.98, 0.98)) * bp.a
        _, dU = boundary_potential(yv, bp)
        worst = max(worst, _fd_relerr(lambda z: boundary_potential(z, bp)[0], yv, dU))
    checks.append(("boundary potential gradient", worst < _FD_RTOL,
                   f"max rel err {worst:.3e}"))

    worst = 0.0
    eps = params.gain.eps
    for _ in range(points):
        xv = float(rng.uniform(-3.0 * eps, 5.0))
        _, df = gain_shaping(xv, eps)
        worst = max(worst, _fd_relerr(lambda z: gain_shaping(z, eps)[0], xv, df))
    checks.append(("gain shaping gradient", worst < _FD_RTOL,
                   f"max rel err {worst:.3e}"))
    return checks


def suite_collision(config: SimConfig | None = None, grid: int = 801) -> list[Check]:
    cfg = config or SimConfig()
    checks: list[Check] = []
    cases = [(cfg.sigma, cfg.phi, cfg.p)]
    rng = np.random.Generator(np.random.Philox(99))
    for _ in range(20):
        phi = float(rng.uniform(0.05, 1.2))
        p = float(rng.uniform(1.0, 10.0))
        cases.append((5.0, phi, p))
    ok = True
    worst_hi = 0.0
    worst_lo = 1.0
    for sigma, phi, p in cases:
        L = safety_distance(sigma, phi, p)
        d = max_collision_distance_bruteforce(sigma, phi, p, grid=grid)
        worst_hi = max(worst_hi, d / L - 1.0)
        worst_lo = min(worst_lo, d / L)
        if not (L * (1.0 - 1e-3) <= d <= L * (1.0 + 1e-9)):
            ok = False
    checks.append(("collision-distance oracle brackets the closed form", ok,
                   f"ratio in [{worst_lo:.6f}, 1 + {worst_hi:.2e}] over "
                   f"{len(cases)} cases at grid {grid}"))
    return checks


def suite_dissipation(config: SimConfig | None = None) -> list[Check]:
    """Central-difference check of dH/dt against the analytic rate on a short
    five-vehicle trajectory; the mismatch must shrink at second order."""
    run_cfg = SimConfig(n=5, dt=2.5e-4, t_end=6.0, seed=11, record_stride=1)
    run_cfg.ic.x_span = 120.0
    trace = run_simulation(run_cfg)
    ts = [rec["t"] for rec in trace.records]
    Hs = [rec["energy"]["H"] for rec in trace.records]
    diss = [rec["energy"]["dissipation_analytic"] for rec in trace.records]
    dt = run_cfg.dt

    def mismatch(h: float) -> float:
        stride = round(h / dt)
        worst = 0.0
        for idx in range(stride, len(ts) - stride):
            fd = (Hs[idx + stride] - Hs[idx - stride]) / (2.0 * stride * dt)
            worst = max(worst, abs(fd - diss[idx]))
        return worst

    errs = [mismatch(h) for h in (1e-2, 5e-3, 2.5e-3)]
    order_ok = errs[0] > 2.5 * errs[1] > 2.5 * 2.5 * errs[2]
    checks = [
        ("dissipation identity mismatch decays at second order", order_ok,
         f"errors {errs[0]:.3e} / {errs[1]:.3e} / {errs[2]:.3e}"),
        ("dissipation identity tight at h=2.5e-3", errs[2] < 1e-6,
         f"max |fd - analytic| = {errs[2]:.3e}"),
    ]
    return checks


def suite_barriers(config: SimConfig | None = None) -> list[Check]:
    cfg = config or SimConfig()
    params = cfg.controller_params()
    vp, bp = params.vehicle, params.boundary
    checks: list[Check] = []

    worst = 0.0
    for s in np.logspace(-6, 6, 61):
        rho = barrier_rho(float(s), vp)
        V, _ = vehicle_potential(rho, vp)
        worst = max(worst, abs(V - s) / s)
    checks.append(("separation barrier inverse round-trips", worst < 1e-9,
                   f"max rel err {worst:.3e}"))

    worst = 0.0
    for s in np.logspace(-6, 6, 61):
        kappa = barrier_kappa(float(s), bp)
        U, _ = boundary_potential(kappa, bp)
        worst = max(worst, abs(U - s) / s)
    checks.append(("lateral barrier inverse round-trips", worst < 1e-9,
                   f"max rel err {worst:.3e}"))

    omegas = [barrier_omega(float(s), params.A, params.phi)
              for s in np.logspace(-3, 9, 40)]
    mono = all(b >= a for a, b in zip(omegas, omegas[1:]))
    below = all(w < params.phi for w in omegas)
    checks.append(("orientation barrier bound is monotone and below phi",
                   mono and below,
                   f"max omega {max(omegas):.6f} < phi {params.phi}"))
    return checks


def _random_admissible_fleet(rng, params, n: int = 5) -> list[VehicleState]:
    L, lam = params.vehicle.L, params.vehicle.lam
    a, phi = params.boundary.a, params.phi
    placed: list[VehicleState] = []
    while len(placed) < n:
        x = float(rng.uniform(0.0, 30.0 * n))
        y = float(rng.uniform(-0.95 * a, 0.95 * a))
        th = float(rng.uniform(-0.95 * phi, 0.95 * phi))
        v = float(rng.uniform(0.05 * params.v_max, 0.95 * params.v_max))
        ok = all(math.sqrt((x - o.x) ** 2 + params.p * (y - o.y) ** 2) > 1.02 * L
                 for o in placed)
        if ok:
            placed.append(VehicleState(x, y, th, v))
    return placed


def suite_bounds(config: SimConfig | None = None, states: int = 2000) -> list[Check]:
    cfg = config or SimConfig()
    params = cfg.controller_params()
    rng = np.random.Generator(np.random.Philox(2024))
    floor_ok = sandwich_ok = cap_ok = u_ok = True
    for _ in range(states):
        fleet = _random_admissible_fleet(rng, params)
        H = energy_H(fleet, params).H
        R = gain_bound_R(H, params)
        ub = turning_rate_bound(H, params)
        cmds = control_step(fleet, params)
        for i, s in enumerate(fleet):
            k = gain_k(i, fleet, params)
            if k < params.mu2 * (1.0 - 1e-12):
                floor_ok = False
            if k > R * (1.0 + 1e-9):
                cap_ok = False
            F = cmds[i].F
            if not (-k * s.v - 1e-9 <= F <= k * (params.v_max - s.v) + 1e-9):
                sandwich_ok = False
            if abs(cmds[i].u) > ub * (1.0 + 1e-9):
                u_ok = False
    return [
        ("gain floor k >= mu2", floor_ok, f"{states} random admissible fleets"),
        ("gain cap k <= R(H)", cap_ok, f"{states} random admissible fleets"),
        ("acceleration sandwich -k v <= F <= k (v_max - v)", sandwich_ok,
         f"{states} random admissible fleets"),
        ("turning-rate bound", u_ok, f"{states} random admissible fleets"),
    ]


SUITES = {
    "gradients": suite_gradients,
    "dissipation": suite_dissipation,
    "collision": suite_collision,
    "barriers": suite_barriers,
    "bounds": suite_bounds,
}


def run_suite(name: str, config: SimConfig | None = None) -> list[Check]:
    if name == "all":
        out: list[Check] = []
        for key in SUITES:
            out.extend(SUITES[key](config))
        return out
    if name not in SUITES:
        raise ValueError(f"unknown suite {name!r}; choose from "
                         f"{', '.join([*SUITES, 'all'])}")
    return SUITES[name](config)
