import math

import numpy as np
import pytest

from lanefree.controller import VehicleState, control_step, gain_k
from lanefree.errors import IntegrityError
from lanefree.lyapunov import (
    RunMonitor,
    dissipation_rate,
    energy_H,
    gain_bound_R,
    turning_rate_bound,
)
from lanefree.potentials import vehicle_potential

K_BASELINE = 0.12333333333333334
V_AT_15 = 0.3189343215832826


def equilibrium_fleet(n=3):
    return [VehicleState(30.0 * i, 0.0, 0.0, 30.0) for i in range(n)]


def test_energy_zero_at_equilibrium(params):
    rep = energy_H(equilibrium_fleet(), params)
    assert rep.H == 0.0
    assert rep.dissipation_analytic == 0.0


def test_energy_single_fast_vehicle(params):
    rep = energy_H([VehicleState(0.0, 0.0, 0.0, 31.0)], params)
    assert rep.H == pytest.approx(0.5, rel=1e-12)
    assert rep.kinetic_long == pytest.approx(0.5, rel=1e-12)
    assert rep.kinetic_lat == 0.0
    assert rep.boundary_pot == 0.0
    assert rep.pairwise_pot == 0.0
    assert rep.orientation_barrier == 0.0


def test_energy_counts_each_pair_once(params):
    fleet = [VehicleState(0.0, 0.0, 0.0, 30.0),
             VehicleState(15.0, 0.0, 0.0, 30.0)]
    rep = energy_H(fleet, params)
    assert rep.pairwise_pot == pytest.approx(V_AT_15, rel=1e-12)
    assert rep.H == pytest.approx(V_AT_15, rel=1e-12)


def test_energy_summands_nonnegative_and_sum(params):
    rng = np.random.Generator(np.random.Philox(61))
    for _ in range(200):
        fleet = [VehicleState(40.0 * i + float(rng.uniform(0, 5)),
                              float(rng.uniform(-6.5, 6.5)),
                              float(rng.uniform(-0.24, 0.24)),
                              float(rng.uniform(1.0, 34.0)))
                 for i in range(4)]
        rep = energy_H(fleet, params)
        parts = (rep.kinetic_long, rep.kinetic_lat, rep.boundary_pot,
                 rep.pairwise_pot, rep.orientation_barrier)
        assert all(p >= 0.0 for p in parts)
        assert rep.H == pytest.approx(sum(parts), rel=1e-12)
        assert rep.dissipation_analytic <= 0.0


def test_energy_rejects_inadmissible_state(params):
    with pytest.raises(IntegrityError):
        energy_H([VehicleState(0.0, 8.0, 0.0, 30.0)], params)
    with pytest.raises(IntegrityError):
        energy_H([VehicleState(0.0, 0.0, 0.0, 30.0),
                  VehicleState(1.0, 0.0, 0.0, 30.0)], params)


def test_dissipation_rate_values(params):
    fleet = equilibrium_fleet()
    assert dissipation_rate(fleet, control_step(fleet, params), params) == 0.0
    single = [VehicleState(0.0, 0.0, 0.0, 31.0)]
    rate = dissipation_rate(single, control_step(single, params), params)
    assert rate == pytest.approx(-K_BASELINE, rel=1e-12)


def test_dissipation_rate_matches_kernel_report(params):
    rng = np.random.Generator(np.random.Philox(67))
    for _ in range(50):
        fleet = [VehicleState(40.0 * i + float(rng.uniform(0, 5)),
                              float(rng.uniform(-6.5, 6.5)),
                              float(rng.uniform(-0.24, 0.24)),
                              float(rng.uniform(1.0, 34.0)))
                 for i in range(4)]
        rep = energy_H(fleet, params)
        rate = dissipation_rate(fleet, control_step(fleet, params), params)
        assert rate == pytest.approx(rep.dissipation_analytic, rel=1e-12,
                                     abs=1e-15)
        assert rate <= 0.0


def test_gain_bound_reference_value(params):
    assert gain_bound_R(0.0, params) == pytest.approx(K_BASELINE, rel=1e-12)


def test_gain_bound_is_nondecreasing_with_floor(params):
    levels = [0.0] + list(np.logspace(-3, 3, 40))
    values = [gain_bound_R(float(s), params) for s in levels]
    assert all(v >= params.mu2 for v in values)
    assert all(b >= a for a, b in zip(values, values[1:]))
    with pytest.raises(ValueError):
        gain_bound_R(-1.0, params)


def test_gain_bound_dominates_gain_on_random_states(params):
    rng = np.random.Generator(np.random.Philox(71))
    for _ in range(200):
        fleet = [VehicleState(14.0 * i + float(rng.uniform(0, 4)),
                              float(rng.uniform(-5.0, 5.0)),
                              float(rng.uniform(-0.2, 0.2)),
                              float(rng.uniform(5.0, 34.0)))
                 for i in range(4)]
        try:
            H = energy_H(fleet, params).H
        except IntegrityError:
            continue
        R = gain_bound_R(H, params)
        for i in range(len(fleet)):
            assert gain_k(i, fleet, params) <= R * (1.0 + 1e-9)


def test_turning_rate_bound_dominates_commands(params):
    rng = np.random.Generator(np.random.Philox(73))
    for _ in range(200):
        fleet = [VehicleState(14.0 * i + float(rng.uniform(0, 4)),
                              float(rng.uniform(-5.0, 5.0)),
                              float(rng.uniform(-0.2, 0.2)),
                              float(rng.uniform(5.0, 34.0)))
                 for i in range(4)]
        try:
            H = energy_H(fleet, params).H
            commands = control_step(fleet, params)
        except IntegrityError:
            continue
        bound = turning_rate_bound(H, params)
        assert bound > 0.0
        for cmd in commands:
            assert abs(cmd.u) <= bound * (1.0 + 1e-9)


def monitor_arrays(fleet):
    n = len(fleet)
    x = np.array([s.x for s in fleet])
    y = np.array([s.y for s in fleet])
    th = np.array([s.theta for s in fleet])
    v = np.array([s.v for s in fleet])
    zero = np.zeros(n)
    k = np.full(n, K_BASELINE)
    return x, y, th, v, zero, zero, k


def test_monitor_clean_equilibrium_trajectory(params):
    fleet = equilibrium_fleet()
    monitor = RunMonitor(params=params, H0=0.0, n=len(fleet), dt=0.01)
    x, y, th, v, zero, _, k = monitor_arrays(fleet)
    for step in range(10):
        monitor.step((step + 1) * 0.01, x, y, th, v, zero, zero, k,
                     0.0, 30.0)
    verdict = monitor.verdict()
    assert verdict.all_ok
    assert verdict.convergence_v == [0.0] * len(fleet)
    assert verdict.convergence_theta == [0.0] * len(fleet)


def test_monitor_flags_injected_energy_increase(params):
    fleet = equilibrium_fleet()
    monitor = RunMonitor(params=params, H0=1.0, n=len(fleet), dt=0.01)
    x, y, th, v, zero, _, k = monitor_arrays(fleet)
    monitor.step(0.01, x, y, th, v, zero, zero, k, 1.0, 30.0)
    monitor.step(0.02, x, y, th, v, zero, zero, k, 1.0 + 1e-3, 30.0)
    verdict = monitor.verdict()
    assert not verdict.h_nonincreasing
    assert verdict.worst_h_increase == pytest.approx(1e-3)
    assert verdict.worst_h_increase_t == pytest.approx(0.02)


def test_monitor_tracks_convergence_stopwatches(params):
    monitor = RunMonitor(params=params, H0=10.0, n=1, dt=0.5)
    x = np.zeros(1); y = np.zeros(1); zero = np.zeros(1)
    k = np.full(1, K_BASELINE)
    # off set-point until t=1.0, converged afterwards
    monitor.step(0.5, x, y, np.array([0.05]), np.array([31.0]), zero, zero,
                 k, 5.0, 30.0)
    monitor.step(1.0, x, y, np.array([0.02]), np.array([30.5]), zero, zero,
                 k, 4.0, 30.0)
    monitor.step(1.5, x, y, np.array([0.001]), np.array([30.01]), zero, zero,
                 k, 3.0, 30.0)
    verdict = monitor.verdict()
    assert verdict.convergence_v == [1.5]
    assert verdict.convergence_theta == [1.5]
