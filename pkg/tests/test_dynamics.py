import math

import numpy as np
import pytest

from lanefree.controller import ControlCommand, VehicleState
from lanefree.dynamics import FleetState, RoadSpec, in_omega, state_derivative

DX_AT_025 = 29.067372651319344  # 30*cos(0.25)
DY_AT_025 = 7.422118777635688   # 30*sin(0.25)


@pytest.fixture
def road() -> RoadSpec:
    return RoadSpec(a=7.2, v_max=35.0, v_star=30.0, phi=0.25)


def cmd(u=0.0, F=0.0):
    return ControlCommand(u=u, F=F, delta=0.0)


def test_state_derivative_straight_cruise():
    fleet = FleetState(vehicles=[VehicleState(0.0, 0.0, 0.0, 30.0)], t=0.0)
    (dx, dy, dth, dv), = state_derivative(fleet, [cmd()])
    assert (dx, dy, dth, dv) == (30.0, 0.0, 0.0, 0.0)


def test_state_derivative_heading_decomposition():
    fleet = FleetState(vehicles=[VehicleState(0.0, 0.0, 0.25, 30.0)], t=0.0)
    (dx, dy, dth, dv), = state_derivative(fleet, [cmd(u=0.1, F=-0.5)])
    assert dx == pytest.approx(DX_AT_025, rel=1e-12)
    assert dy == pytest.approx(DY_AT_025, rel=1e-12)
    assert dth == 0.1
    assert dv == -0.5


def test_state_derivative_linear_in_commands():
    fleet = FleetState(vehicles=[VehicleState(1.0, -2.0, 0.1, 20.0)], t=0.0)
    one = state_derivative(fleet, [cmd(u=0.05, F=0.3)])[0]
    two = state_derivative(fleet, [cmd(u=0.1, F=0.6)])[0]
    assert two[2] == 2.0 * one[2]
    assert two[3] == 2.0 * one[3]


def test_state_derivative_requires_aligned_commands():
    fleet = FleetState(vehicles=[VehicleState(0.0, 0.0, 0.0, 30.0)], t=0.0)
    with pytest.raises(ValueError):
        state_derivative(fleet, [cmd(), cmd()])


def test_forward_speed_bounded_inside_state_space(road, params):
    rng = np.random.Generator(np.random.Philox(53))
    for _ in range(500):
        s = VehicleState(0.0,
                         float(rng.uniform(-7.1, 7.1)),
                         float(rng.uniform(-0.249, 0.249)),
                         float(rng.uniform(1e-6, 34.999)))
        fleet = FleetState(vehicles=[s], t=0.0)
        assert in_omega(fleet, road, params.vehicle.L, params.p).ok
        (dx, _, _, _), = state_derivative(fleet, [cmd()])
        assert 0.0 <= dx <= road.v_max


def equilibrium_fleet(n=3):
    return FleetState(vehicles=[VehicleState(30.0 * i, 0.0, 0.0, 30.0)
                                for i in range(n)], t=0.0)


def test_in_omega_accepts_equilibrium(road, params):
    verdict = in_omega(equilibrium_fleet(), road, params.vehicle.L, params.p)
    assert verdict.ok
    assert verdict.violation is None


@pytest.mark.parametrize("vehicle,expected", [
    (VehicleState(0.0, 0.0, 0.0, 35.0), "speed"),
    (VehicleState(0.0, 0.0, 0.0, 0.0), "speed"),
    (VehicleState(0.0, 7.2, 0.0, 30.0), "lateral"),
    (VehicleState(0.0, 0.0, 0.25, 30.0), "orientation"),
    (VehicleState(0.0, 0.0, -0.3, 30.0), "orientation"),
])
def test_in_omega_reports_first_violation(road, params, vehicle, expected):
    fleet = FleetState(vehicles=[vehicle], t=0.0)
    verdict = in_omega(fleet, road, params.vehicle.L, params.p)
    assert not verdict.ok
    assert verdict.violation == expected
    assert verdict.i == 0


def test_in_omega_separation_boundary_is_strict(road, params):
    L = params.vehicle.L
    fleet = FleetState(vehicles=[VehicleState(0.0, 0.0, 0.0, 30.0),
                                 VehicleState(L, 0.0, 0.0, 30.0)], t=0.0)
    verdict = in_omega(fleet, road, L, params.p)
    assert not verdict.ok
    assert verdict.violation == "separation"
    assert {verdict.i, verdict.j} == {0, 1}
    apart = FleetState(vehicles=[VehicleState(0.0, 0.0, 0.0, 30.0),
                                 VehicleState(L + 1e-9, 0.0, 0.0, 30.0)],
                       t=0.0)
    assert in_omega(apart, road, L, params.p).ok


def test_in_omega_monotone_under_shrinking(road, params):
    rng = np.random.Generator(np.random.Philox(59))
    for _ in range(200):
        s = VehicleState(0.0,
                         float(rng.uniform(-9.0, 9.0)),
                         float(rng.uniform(-0.4, 0.4)),
                         float(rng.uniform(-1.0, 40.0)))
        inside = in_omega(FleetState(vehicles=[s], t=0.0), road,
                          params.vehicle.L, params.p).ok
        shrunk = VehicleState(s.x, 0.5 * s.y, 0.5 * s.theta,
                              0.5 * (s.v + 30.0) if 0 < s.v < 35 else s.v)
        if inside:
            assert in_omega(FleetState(vehicles=[shrunk], t=0.0), road,
                            params.vehicle.L, params.p).ok


def test_road_spec_validation():
    with pytest.raises(ValueError):
        RoadSpec(a=0.0, v_max=35.0, v_star=30.0, phi=0.25)
    with pytest.raises(ValueError):
        RoadSpec(a=7.2, v_max=30.0, v_star=30.0, phi=0.25)
    with pytest.raises(ValueError):
        RoadSpec(a=7.2, v_max=35.0, v_star=30.0, phi=0.6)
