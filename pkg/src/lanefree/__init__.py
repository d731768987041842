"""Deterministic simulator and verification harness for decentralized
two-dimensional cruise control of autonomous vehicles on lane-free roads."""

from .config import InitialConditions, SimConfig, apply_overrides, load_config
from .controller import (
    ControlCommand,
    ControllerParams,
    VehicleState,
    control_step,
    gain_k,
    longitudinal_accel,
    repulsion_sums,
    steering_angle,
    turning_rate,
)
from .dynamics import FleetState, OmegaVerdict, RoadSpec, in_omega, state_derivative
from .errors import ConfigError, InfeasibleScenarioError, IntegrityError
from .geometry import (
    EllipseMetricSpec,
    Point2,
    SafetyGeometry,
    elliptic_distance,
    estimate_m,
    lateral_capacity,
    max_collision_distance_bruteforce,
    optimal_eccentricity,
    safety_distance,
    segments_intersect,
)
from .lyapunov import (
    EnergyReport,
    MonitorVerdict,
    RunMonitor,
    dissipation_rate,
    energy_H,
    gain_bound_R,
    turning_rate_bound,
)
from .potentials import (
    BoundaryPotentialParams,
    GainShaping,
    VehiclePotentialParams,
    barrier_kappa,
    barrier_omega,
    barrier_rho,
    bound_b1,
    bound_b2,
    boundary_potential,
    gain_shaping,
    vehicle_potential,
)
from .sim import compute_metrics, generate_scenario, rk4_step, run_simulation
from .trace import SimTrace, dumps_json

__version__ = "0.1.0"
