"""Elliptic safety geometry.

Closed-form safety distance, optimal lateral eccentricity and road capacity,
plus an independent brute-force oracle (exact segment intersection and grid
maximization of the two-segment collision distance) used to validate the
closed forms.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import NamedTuple

import numpy as np

__all__ = [
    "Point2",
    "EllipseMetricSpec",
    "SafetyGeometry",
    "elliptic_distance",
    "safety_distance",
    "optimal_eccentricity",
    "lateral_capacity",
    "segments_intersect",
    "max_collision_distance_bruteforce",
    "estimate_m",
]

# quantum for the exact integer-scaled intersection predicates (meters)
_SNAP = 1e-9


class Point2(NamedTuple):
    x: float
    y: float


@dataclass(frozen=True)
class EllipseMetricSpec:
    """Weight of the lateral coordinate in the elliptic metric."""

    p: float

    def __post_init__(self):
        if not (self.p >= 1.0):
            raise ValueError(f"eccentricity weight must satisfy p >= 1, got {self.p}")


@dataclass(frozen=True)
class SafetyGeometry:
    """Consistent bundle of vehicle length, orientation bound, metric weight,
    the implied safety distance and the sensing radius."""

    sigma: float
    phi: float
    p: float
    L: float
    lam: float

    def __post_init__(self):
        if self.sigma <= 0.0:
            raise ValueError("vehicle length must be positive")
        if not (0.0 < self.phi < math.pi / 2):
            raise ValueError("orientation bound must lie in (0, pi/2)")
        if not (self.p >= 1.0):
            raise ValueError("eccentricity weight must satisfy p >= 1")
        if not (self.lam > self.L):
            raise ValueError("sensing radius must exceed the safety distance")

    @classmethod
    def build(cls, sigma: float, phi: float, lam: float, p: float | None = None,
              L: float | None = None) -> "SafetyGeometry":
        """Fill in the optimal weight and/or the closed-form safety distance."""
        if p is None:
            p = optimal_eccentricity(phi)
        if L is None:
            L = safety_distance(sigma, phi, p)
        return cls(sigma=sigma, phi=phi, p=p, L=L, lam=lam)


def elliptic_distance(a: Point2, b: Point2, p: float) -> float:
    """Elliptically weighted distance sqrt(dx^2 + p*dy^2)."""
    if not (p >= 1.0):
        raise ValueError(f"eccentricity weight must satisfy p >= 1, got {p}")
    dx = a[0] - b[0]
    dy = a[1] - b[1]
    return math.sqrt(dx * dx + p * dy * dy)


def safety_distance(sigma: float, phi: float, p: float) -> float:
    """Largest elliptic distance at which two length-sigma vehicles with
    orientations bounded by phi can still touch."""
    if sigma <= 0.0:
        raise ValueError("vehicle length must be positive")
    if not (0.0 < phi < math.pi / 2):
        raise ValueError(f"orientation bound must lie in (0, pi/2), got {phi}")
    if not (p >= 1.0):
        raise ValueError(f"eccentricity weight must satisfy p >= 1, got {p}")
    s = math.sin(phi)
    return sigma * max(2.0 * math.sqrt(p) * s, math.sqrt(1.0 + (p - 1.0) * s * s))


def optimal_eccentricity(phi: float) -> float:
    """Metric weight minimizing the lateral footprint L/sqrt(p)."""
    if not (0.0 < phi < math.pi / 2):
        raise ValueError(f"orientation bound must lie in (0, pi/2), got {phi}")
    if phi <= math.pi / 6:
        t = math.tan(phi)
        return 1.0 / (3.0 * t * t)
    return 1.0


def lateral_capacity(a: float, p: float, L: float) -> float:
    """Fractional number of vehicles that fit side by side: 2a*sqrt(p)/L."""
    if a <= 0.0 or L <= 0.0:
        raise ValueError("half-width and safety distance must be positive")
    if not (p >= 1.0):
        raise ValueError(f"eccentricity weight must satisfy p >= 1, got {p}")
    return 2.0 * a * math.sqrt(p) / L


def _snap(v: float) -> int:
    return round(v / _SNAP)


def _orient(ax, ay, bx, by, cx, cy) -> int:
    """Sign of the cross product (b-a) x (c-a) in exact integer arithmetic."""
    d = (bx - ax) * (cy - ay) - (by - ay) * (cx - ax)
    return (d > 0) - (d < 0)


def _on_segment(ax, ay, bx, by, px, py) -> bool:
    """Point p on the closed segment a-b, assuming collinearity."""
    return min(ax, bx) <= px <= max(ax, bx) and min(ay, by) <= py <= max(ay, by)


def segments_intersect(A1: Point2, A2: Point2, B1: Point2, B2: Point2) -> bool:
    """Closed-segment intersection with exact integer-scaled predicates.

    Coordinates are snapped to a 1e-9 m quantum; all orientation tests are
    then exact, so collinear overlap and endpoint touching are decided without
    any epsilon.
    """
    ax, ay = _snap(A1[0]), _snap(A1[1])
    bx, by = _snap(A2[0]), _snap(A2[1])
    cx, cy = _snap(B1[0]), _snap(B1[1])
    dx, dy = _snap(B2[0]), _snap(B2[1])

    o1 = _orient(ax, ay, bx, by, cx, cy)
    o2 = _orient(ax, ay, bx, by, dx, dy)
    o3 = _orient(cx, cy, dx, dy, ax, ay)
    o4 = _orient(cx, cy, dx, dy, bx, by)

    if o1 != o2 and o3 != o4:
        return True
    if o1 == 0 and _on_segment(ax, ay, bx, by, cx, cy):
        return True
    if o2 == 0 and _on_segment(ax, ay, bx, by, dx, dy):
        return True
    if o3 == 0 and _on_segment(cx, cy, dx, dy, ax, ay):
        return True
    if o4 == 0 and _on_segment(cx, cy, dx, dy, bx, by):
        return True
    return False


def max_collision_distance_bruteforce(sigma: float, phi: float, p: float,
                                      grid: int = 201) -> float:
    """Grid maximization of the two-segment collision distance.

    Sweeps both orientations over a uniform grid on [-phi, phi] and restricts
    the segment parameters to their corner values {0, 1}: the squared distance
    is convex in the parameter pair, so its maximum over the unit square is
    attained at a corner.  The equal-orientation case is covered by the
    diagonal of the orientation grid.
    """
    if grid < 32:
        raise ValueError("grid must have at least 32 points per angular axis")
    if not (0.0 < phi < math.pi / 2):
        raise ValueError(f"orientation bound must lie in (0, pi/2), got {phi}")
    if not (p >= 1.0):
        raise ValueError(f"eccentricity weight must satisfy p >= 1, got {p}")
    t = np.linspace(-phi, phi, grid)
    ct = np.cos(t)
    st = np.sin(t)
    # corner (1,1): both segment endpoints engaged
    f11 = (ct[:, None] - ct[None, :]) ** 2 + p * (st[:, None] - st[None, :]) ** 2
    # corners (1,0)/(0,1): a single unit segment against the other's base point
    f10 = ct ** 2 + p * st ** 2
    best = max(float(f11.max()), float(f10.max()))
    return sigma * math.sqrt(best)


def estimate_m(L: float, lam: float, p: float) -> int:
    """Conservative upper bound on the number of neighbors inside the sensing
    annulus with pairwise elliptic separation at least L.

    Area argument: each point owns a disjoint half-separation ellipse
    (semi-axes L/2 and L/(2 sqrt(p))) contained in the annulus dilated by L/2;
    dividing the dilated annulus area by the exclusion-ellipse area bounds the
    count.  The sqrt(p) factors cancel, leaving a p-independent ratio.  Exact
    packing is intractable, so callers may override this value in config.
    """
    if not (lam > L > 0.0):
        raise ValueError("need sensing radius > safety distance > 0")
    if not (p >= 1.0):
        raise ValueError(f"eccentricity weight must satisfy p >= 1, got {p}")
    outer = (lam + 0.5 * L) ** 2
    inner = (0.5 * L) ** 2
    ratio = (outer - inner) / (0.25 * L * L)
    return max(2, math.ceil(ratio))
