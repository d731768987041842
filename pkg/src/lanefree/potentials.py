"""Repulsive potentials, gain shaping, and the derived bound/inverse functions.

The concrete vehicle and boundary potentials are strictly monotone where it
matters, so the barrier-level inverses (minimum separation, maximum lateral
excursion) are computed as exact inverses by bisection instead of going
through any smoothed lower envelope.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

from . import _kernels
from .errors import IntegrityError

__all__ = [
    "VehiclePotentialParams",
    "BoundaryPotentialParams",
    "GainShaping",
    "vehicle_potential",
    "boundary_potential",
    "gain_shaping",
    "bound_b1",
    "bound_b2",
    "barrier_omega",
    "barrier_rho",
    "barrier_kappa",
]

_BISECT_RTOL = 1e-12


@dataclass(frozen=True)
class VehiclePotentialParams:
    """Scale, safety distance and sensing radius of the pairwise potential."""

    q: float
    L: float
    lam: float

    def __post_init__(self):
        if self.q <= 0.0:
            raise ValueError("repulsion scale q must be positive")
        if not (self.lam > self.L > 0.0):
            raise ValueError("need sensing radius > safety distance > 0")


@dataclass(frozen=True)
class BoundaryPotentialParams:
    """Road half-width and flat-strip parameter of the boundary potential."""

    a: float
    c: float

    def __post_init__(self):
        if self.a <= 0.0:
            raise ValueError("road half-width must be positive")
        if self.c < 1.0:
            raise ValueError("flat-strip parameter must satisfy c >= 1")

    @property
    def y_flat(self) -> float:
        """Half-width of the central strip where the potential vanishes."""
        return self.a * math.sqrt((self.c - 1.0) / self.c)


@dataclass(frozen=True)
class GainShaping:
    eps: float

    def __post_init__(self):
        if self.eps <= 0.0:
            raise ValueError("smoothing parameter must be positive")


def vehicle_potential(d: float, params: VehiclePotentialParams) -> tuple[float, float]:
    """Pairwise potential and derivative at elliptic distance d (requires d > L)."""
    if d <= params.L:
        raise IntegrityError("separation", detail=f"d={d} <= L={params.L}")
    V, dV = _kernels.v_pair(d, params.q, params.L, params.lam)
    return V, dV


def boundary_potential(y: float, params: BoundaryPotentialParams) -> tuple[float, float]:
    """Boundary potential and derivative at lateral position y (requires |y| < a)."""
    if abs(y) >= params.a:
        raise IntegrityError("lateral", detail=f"|y|={abs(y)} >= a={params.a}")
    U, dU = _kernels.u_boundary(y, params.a, params.c, params.y_flat)
    return U, dU


def gain_shaping(x: float, eps: float) -> tuple[float, float]:
    """C^1 shaping function dominating max(x, 0), and its derivative."""
    if eps <= 0.0:
        raise ValueError("smoothing parameter must be positive")
    return _kernels.f_gain(x, eps)


def _abs_dv(d: float, params: VehiclePotentialParams) -> float:
    _, dV = _kernels.v_pair(d, params.q, params.L, params.lam)
    return abs(dV)


def bound_b1(s: float, params: VehiclePotentialParams, samples: int = 2048) -> float:
    """Maximum repulsion-force magnitude over separations in [s, lam].

    Dense sampling followed by golden-section refinement around the best
    bracket; monotonicity of |V'| is not assumed.
    """
    L, lam = params.L, params.lam
    if s <= L:
        raise ValueError(f"lower separation must exceed the safety distance, got {s}")
    if s >= lam:
        return 0.0
    step = (lam - s) / (samples - 1)
    best_i = 0
    best = -1.0
    for i in range(samples):
        val = _abs_dv(s + i * step, params)
        if val > best:
            best = val
            best_i = i
    lo = s + max(best_i - 1, 0) * step
    hi = s + min(best_i + 1, samples - 1) * step
    # golden-section maximization on the bracketing interval
    invphi = (math.sqrt(5.0) - 1.0) / 2.0
    x1 = hi - invphi * (hi - lo)
    x2 = lo + invphi * (hi - lo)
    f1 = _abs_dv(x1, params)
    f2 = _abs_dv(x2, params)
    for _ in range(80):
        if f1 < f2:
            lo = x1
            x1, f1 = x2, f2
            x2 = lo + invphi * (hi - lo)
            f2 = _abs_dv(x2, params)
        else:
            hi = x2
            x2, f2 = x1, f1
            x1 = hi - invphi * (hi - lo)
            f1 = _abs_dv(x1, params)
    return max(best, f1, f2)


def bound_b2(s: float, params: BoundaryPotentialParams) -> float:
    """Maximum boundary-force magnitude over lateral positions |y| <= s.

    |U'| vanishes on the flat strip and increases outward (checked against a
    dense-grid oracle in the tests), so the bound is |U'(s)| beyond the strip.
    """
    if s < 0.0 or s >= params.a:
        raise ValueError(f"lateral bound must lie in [0, a), got {s}")
    if s <= params.y_flat:
        return 0.0
    _, dU = _kernels.u_boundary(s, params.a, params.c, params.y_flat)
    return abs(dU)


def barrier_omega(s: float, A: float, phi: float) -> float:
    """Orientation bound implied by an energy level s: arccos of the barrier
    sub-level set edge.  Zero at s=0, increases toward phi."""
    if s < 0.0:
        raise ValueError("energy level must be nonnegative")
    if A <= 0.0:
        raise ValueError("barrier weight must be positive")
    cphi = math.cos(phi)
    arg = cphi + A * (1.0 - cphi) / (A + (1.0 - cphi) * s)
    # clamp against roundoff pushing the argument past 1 at s ~ 0
    return math.acos(min(1.0, arg))


def barrier_rho(s: float, params: VehiclePotentialParams) -> float:
    """Minimum separation implied by an energy level s: the unique d in
    (L, lam] with V(d) = s, found by geometric bisection on d - L."""
    if s < 0.0:
        raise ValueError("energy level must be nonnegative")
    if s == 0.0:
        return params.lam
    L, lam = params.L, params.lam
    span = lam - L
    q = params.q

    # evaluate in offset space (delta = d - L kept as its own float) so the
    # residual tolerance stays reachable when the root sits within a few ulp
    # of the safety distance
    def val(delta: float) -> float:
        gap = span - delta
        return q * gap * gap * gap / delta

    tol = _BISECT_RTOL * s
    lo = 0.5 * span
    while val(lo) < s:
        lo *= 0.5
    hi = span
    for _ in range(400):
        mid = math.sqrt(lo * hi)
        vm = val(mid)
        if abs(vm - s) <= tol:
            return L + mid
        if vm > s:
            lo = mid
        else:
            hi = mid
        if hi - lo <= 1e-16 * hi:
            break
    return L + math.sqrt(lo * hi)


def barrier_kappa(s: float, params: BoundaryPotentialParams) -> float:
    """Maximum lateral excursion implied by an energy level s: the unique y in
    [y_flat, a) with U(y) = s, by geometric bisection on a - y."""
    if s < 0.0:
        raise ValueError("energy level must be nonnegative")
    yflat = params.y_flat
    if s == 0.0:
        return yflat
    a = params.a
    span = a - yflat
    c_over_a2 = params.c / (a * a)

    # same offset-space trick as barrier_rho, with t = a - y
    def val(t: float) -> float:
        g = 1.0 / (t * (2.0 * a - t)) - c_over_a2
        g3 = g * g * g
        return g3 * g

    tol = _BISECT_RTOL * s
    lo = 0.5 * span
    while val(lo) < s:
        lo *= 0.5
    hi = span
    for _ in range(400):
        mid = math.sqrt(lo * hi)
        vm = val(mid)
        if abs(vm - s) <= tol:
            return a - mid
        if vm > s:
            lo = mid
        else:
            hi = mid
        if hi - lo <= 1e-16 * hi:
            break
    return a - math.sqrt(lo * hi)
