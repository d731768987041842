"""End-to-end acceptance gate.

Each test prints one [PASS]/[FAIL] line for its criterion (written straight to
the real stdout so the lines survive pytest's capture), then asserts.
"""

import sys
import time

import numpy as np
import pytest

from lanefree.config import SimConfig
from lanefree.controller import VehicleState
from lanefree.dynamics import FleetState
from lanefree.geometry import (
    lateral_capacity,
    max_collision_distance_bruteforce,
    optimal_eccentricity,
    safety_distance,
)
from lanefree.sim import run_simulation
from lanefree.verify import suite_dissipation, suite_gradients

Y_STRIP = 4.157


@pytest.fixture
def report(capfd):
    def _report(criterion: str, ok: bool, detail: str) -> None:
        with capfd.disabled():
            print(f"[{'PASS' if ok else 'FAIL'}] {criterion}: {detail}",
                  file=sys.stdout, flush=True)
    return _report


@pytest.fixture(scope="module")
def timed_baseline():
    start = time.perf_counter()
    trace = run_simulation(SimConfig())
    return trace, time.perf_counter() - start


def tail_mean_d_min(trace) -> float:
    series = [rec["d_min"] for rec in trace.records if rec["d_min"] is not None]
    k = max(1, len(series) // 10)
    return sum(series[-k:]) / k


def test_criterion_1_safety_geometry_numbers(report):
    optimal_eccentricity(0.25)  # warm-up
    start = time.perf_counter()
    p = optimal_eccentricity(0.25)
    L = safety_distance(5.0, 0.25, 5.11)
    N = lateral_capacity(7.2, 5.11, 5.59)
    elapsed = time.perf_counter() - start
    ok = (abs(p - 5.11) < 0.01 and abs(L - 5.59) < 0.01
          and abs(N - 5.8) < 0.05 and elapsed < 1e-3)
    report("criterion 1 (geometry numbers)", ok,
           f"p={p:.4f}, L={L:.4f} m, N={N:.4f}, {elapsed * 1e6:.0f} us")
    assert ok


def test_criterion_2_collision_distance_oracle(report):
    start = time.perf_counter()
    cases = [(5.0, 0.25, 5.11)]
    rng = np.random.Generator(np.random.Philox(99))
    for _ in range(20):
        cases.append((5.0, float(rng.uniform(0.05, 1.2)),
                      float(rng.uniform(1.0, 10.0))))
    ok = True
    worst = 0.0
    for sigma, phi, p in cases:
        L = safety_distance(sigma, phi, p)
        d = max_collision_distance_bruteforce(sigma, phi, p, grid=801)
        worst = max(worst, abs(d / L - 1.0))
        if not (L * (1.0 - 1e-3) <= d <= L * (1.0 + 1e-9)):
            ok = False
    elapsed = time.perf_counter() - start
    ok = ok and elapsed < 10.0
    report("criterion 2 (collision-distance oracle)", ok,
           f"{len(cases)} cases, worst |d/L - 1| = {worst:.2e}, {elapsed:.2f} s")
    assert ok


def test_criterion_3_gradient_suite(report):
    start = time.perf_counter()
    checks = suite_gradients(points=1000)
    elapsed = time.perf_counter() - start
    ok = all(passed for _, passed, _ in checks) and elapsed < 1.0
    detail = "; ".join(d for _, _, d in checks)
    report("criterion 3 (analytic gradients)", ok, f"{detail}, {elapsed:.2f} s")
    assert ok


def test_criterion_4_dissipation_identity(report):
    start = time.perf_counter()
    checks = suite_dissipation()
    elapsed = time.perf_counter() - start
    ok = all(passed for _, passed, _ in checks) and elapsed < 30.0
    detail = "; ".join(d for _, _, d in checks)
    report("criterion 4 (dissipation identity)", ok,
           f"{detail}, {elapsed:.2f} s")
    assert ok


def test_criterion_5_reference_scenario(timed_baseline, report):
    trace, elapsed = timed_baseline
    s = trace.summary
    mon = s["monitor"]
    sep_ok = s["d_min_global"] > 5.59 and mon["separation_ok"]
    range_ok = mon["speed_ok"] and mon["theta_ok"]
    v_final = max(abs(v - 30.0) for v in s["final_speeds"])
    th_final = max(abs(t) for t in s["final_thetas"])
    tail_F = s["tail_max_abs_F"] / s["max_abs_F"]
    tail_u = s["tail_max_abs_u"] / s["max_abs_u"]
    y_final = max(abs(y) for y in s["final_lateral"])
    ok = (s["completed"] and sep_ok and range_ok and v_final < 0.1
          and th_final < 0.01 and tail_F < 1e-3 and tail_u < 1e-3
          and y_final <= Y_STRIP + 0.05 and elapsed < 60.0)
    report("criterion 5 (reference scenario)", ok,
           f"d_min={s['d_min_global']:.3f} m, |v-30|={v_final:.2e}, "
           f"|theta|={th_final:.2e}, tail F/u ratios {tail_F:.1e}/{tail_u:.1e}, "
           f"max final |y|={y_final:.3f} m, {elapsed:.1f} s")
    assert ok


def test_criterion_6_certified_bounds(timed_baseline, report):
    trace, _ = timed_baseline
    mon = trace.summary["monitor"]
    ok = (mon["h_below_initial"] and mon["h_nonincreasing"]
          and mon["k_bound_ok"] and mon["F_bound_ok"] and mon["u_bound_ok"])
    report("criterion 6 (certified bounds)", ok,
           f"H0={trace.header['H0']:.4f}, R(H0)={trace.header['R_H0']:.4f}, "
           f"|F|<= {trace.header['F_bound']:.2f}, |u|<= "
           f"{trace.header['u_bound']:.2f}, zero violations={ok}")
    assert ok


def test_criterion_7_barrier_bounds(timed_baseline, report):
    trace, _ = timed_baseline
    mon = trace.summary["monitor"]
    ok = (mon["barrier_theta_ok"] and mon["barrier_lateral_ok"]
          and mon["barrier_separation_ok"])
    report("criterion 7 (barrier-level bounds)", ok,
           f"theta<= {trace.header['theta_bound']:.4f} rad, "
           f"|y|<= {trace.header['lateral_bound']:.4f} m, "
           f"d>= {trace.header['separation_bound']:.4f} m, "
           f"zero violations={ok}")
    assert ok


def test_criterion_8_sensing_radius_sensitivity(timed_baseline, report):
    trace25, elapsed25 = timed_baseline
    start = time.perf_counter()
    trace40 = run_simulation(SimConfig(lam=40.0))
    elapsed = elapsed25 + time.perf_counter() - start
    v25 = [v["x"] for v in trace25.records[0]["vehicles"]]
    v40 = [v["x"] for v in trace40.records[0]["vehicles"]]
    same_start = v25 == v40
    m25 = tail_mean_d_min(trace25)
    m40 = tail_mean_d_min(trace40)
    ok = same_start and m40 > m25 and elapsed < 120.0
    report("criterion 8 (sensing-radius sensitivity)", ok,
           f"converged d_min {m25:.2f} m (25 m range) vs {m40:.2f} m "
           f"(40 m range), identical initial fleet={same_start}, "
           f"{elapsed:.1f} s")
    assert ok


def test_criterion_9_nudging_sign(report):
    initial = FleetState(vehicles=[VehicleState(0.0, 0.0, 0.0, 33.0),
                                   VehicleState(20.0, 0.0, 0.0, 30.0)],
                         t=0.0)
    cfg = SimConfig(n=2, t_end=10.0, record_stride=10)
    trace = run_simulation(cfg, initial=initial)
    windows = 0
    for rec in trace.records:
        rear, front = rec["vehicles"]
        if front["F"] > 0.0 and rear["F"] < 0.0:
            windows += 1
    ok = windows > 0
    report("criterion 9 (nudging sign)", ok,
           f"front pushed forward / rear braked in {windows} of "
           f"{len(trace.records)} recorded states during approach")
    assert ok


def test_criterion_10_byte_identical_traces(timed_baseline, tmp_path, report):
    trace_a, _ = timed_baseline
    trace_b = run_simulation(SimConfig())
    pa, pb = tmp_path / "a.jsonl", tmp_path / "b.jsonl"
    trace_a.write_jsonl(pa)
    trace_b.write_jsonl(pb)
    ok = pa.read_bytes() == pb.read_bytes()
    report("criterion 10 (determinism)", ok,
           f"repeated reference run: {pa.stat().st_size} bytes, "
           f"byte-identical={ok}")
    assert ok
