"""Numba kernels for the closed-loop vector field and per-step bookkeeping.

Everything here operates on flat float64 arrays (one entry per vehicle) so the
fixed-step integrator can run the full horizon without Python-level per-pair
overhead.  The public modules (`potentials`, `controller`, `lyapunov`) wrap
these kernels; tests assert that the wrapped scalar paths and the fleet kernels
agree bit for bit.

Status codes returned by the kernels (0 means OK):
    1  pair separation at or below the safety distance (indices i, j)
    2  v_max*cos(theta) - v_star <= 0 (gain denominator, vehicle i)
    3  non-positive speed (vehicle i)
    4  lateral position outside the open road interval (vehicle i)
    5  cos(theta) - cos(phi) <= 0 (orientation barrier denominator, vehicle i)
"""

import math

import numpy as np
from numba import njit

__all__ = [
    "v_pair",
    "u_boundary",
    "f_gain",
    "fleet_rhs",
    "rk4_step_kernel",
    "omega_check",
    "energy_kernel",
]


@njit(cache=True)
def v_pair(d, q, L, lam):
    """Pairwise repulsive potential and its derivative at elliptic distance d.

    Zero at and beyond the sensing radius; blows up as d -> L+.  The caller
    must ensure d > L.
    """
    if d >= lam:
        return 0.0, 0.0
    rem = d - L
    gap = lam - d
    V = q * gap * gap * gap / rem
    dV = q * (-3.0 * gap * gap * rem - gap * gap * gap) / (rem * rem)
    return V, dV


@njit(cache=True)
def u_boundary(y, a, c, yflat):
    """Road-boundary potential and derivative; identically zero on the flat strip."""
    if -yflat <= y <= yflat:
        return 0.0, 0.0
    den = a * a - y * y
    g = 1.0 / den - c / (a * a)
    g3 = g * g * g
    U = g3 * g
    dU = 4.0 * g3 * 2.0 * y / (den * den)
    return U, dU


@njit(cache=True)
def f_gain(x, eps):
    """Piecewise-smooth gain shaping: zero left tail, quadratic blend, linear right."""
    if x <= -eps:
        return 0.0, 0.0
    if x < 0.0:
        return (x + eps) * (x + eps) / (2.0 * eps), (x + eps) / eps
    return 0.5 * eps + x, 1.0


@njit(cache=True)
def fleet_rhs(x, y, th, v,
              p, q, L, lam, a, c, yflat, eps,
              mu1, mu2, A, vstar, vmax, cosphi,
              dx, dy, dth, dv, u, F, k, Sx, Sy):
    """Closed-loop vector field for the whole fleet.

    Accumulates the pairwise repulsion sums in ascending neighbor index for
    every vehicle (the pair loop is lexicographic over i < j, which visits the
    neighbors of each vehicle in ascending order), then evaluates the turning
    rate and acceleration laws.  Returns (status, i, j, d_min).
    """
    n = x.shape[0]
    mind = np.inf
    for i in range(n):
        Sx[i] = 0.0
        Sy[i] = 0.0
    for i in range(n):
        for j in range(i + 1, n):
            ddx = x[i] - x[j]
            ddy = y[i] - y[j]
            d = math.sqrt(ddx * ddx + p * ddy * ddy)
            if d < mind:
                mind = d
            if d <= L:
                return 1, i, j, mind
            if d < lam:
                _, dV = v_pair(d, q, L, lam)
                tx = dV * ddx / d
                ty = dV * ddy / d
                Sx[i] += tx
                Sy[i] += ty
                Sx[j] -= tx
                Sy[j] -= ty
    for i in range(n):
        if v[i] <= 0.0:
            return 3, i, i, mind
        if y[i] <= -a or y[i] >= a:
            return 4, i, i, mind
        cth = math.cos(th[i])
        sth = math.sin(th[i])
        dcos = cth - cosphi
        if dcos <= 0.0:
            return 5, i, i, mind
        gden = vmax * cth - vstar
        if gden <= 0.0:
            return 2, i, i, mind
        fi, _ = f_gain(-Sx[i], eps)
        ki = mu2 + Sx[i] / vstar + vmax * cth / (vstar * gden) * fi
        Fi = -(ki / cth) * (v[i] * cth - vstar) - Sx[i] / cth
        _, dUi = u_boundary(y[i], a, c, yflat)
        ui = -(mu1 * v[i] * sth + dUi + p * Sy[i] + sth * Fi) \
            / (vstar + A / (v[i] * dcos * dcos))
        k[i] = ki
        F[i] = Fi
        u[i] = ui
        dx[i] = v[i] * cth
        dy[i] = v[i] * sth
        dth[i] = ui
        dv[i] = Fi
    return 0, -1, -1, mind


@njit(cache=True)
def rk4_step_kernel(x, y, th, v, dt,
                    p, q, L, lam, a, c, yflat, eps,
                    mu1, mu2, A, vstar, vmax, cosphi,
                    hold_inputs,
                    xo, yo, tho, vo, u1, F1, k1):
    """One classic RK4 step of the closed loop.

    The feedback is re-evaluated at every stage (continuous-feedback
    semantics) unless hold_inputs is set, in which case stages 2-4 reuse the
    stage-1 commands and only the kinematics are re-evaluated.  The stage-1
    commands are exposed through u1/F1/k1 so callers can record the actuation
    applied at the step's start time.  Returns (status, i, j).
    """
    n = x.shape[0]
    ax1 = np.empty(n); ay1 = np.empty(n); ath1 = np.empty(n); av1 = np.empty(n)
    ax2 = np.empty(n); ay2 = np.empty(n); ath2 = np.empty(n); av2 = np.empty(n)
    ax3 = np.empty(n); ay3 = np.empty(n); ath3 = np.empty(n); av3 = np.empty(n)
    ax4 = np.empty(n); ay4 = np.empty(n); ath4 = np.empty(n); av4 = np.empty(n)
    xs = np.empty(n); ys = np.empty(n); ths = np.empty(n); vs = np.empty(n)
    ut = np.empty(n); Ft = np.empty(n); kt = np.empty(n)
    Sx = np.empty(n); Sy = np.empty(n)

    st, i, j, _ = fleet_rhs(x, y, th, v, p, q, L, lam, a, c, yflat, eps,
                            mu1, mu2, A, vstar, vmax, cosphi,
                            ax1, ay1, ath1, av1, u1, F1, k1, Sx, Sy)
    if st != 0:
        return st, i, j

    h2 = 0.5 * dt
    for m in range(n):
        xs[m] = x[m] + h2 * ax1[m]
        ys[m] = y[m] + h2 * ay1[m]
        ths[m] = th[m] + h2 * ath1[m]
        vs[m] = v[m] + h2 * av1[m]
    if hold_inputs:
        st, i, j = _held_rhs(xs, ys, ths, vs, u1, F1, ax2, ay2, ath2, av2)
    else:
        st, i, j, _ = fleet_rhs(xs, ys, ths, vs, p, q, L, lam, a, c, yflat, eps,
                                mu1, mu2, A, vstar, vmax, cosphi,
                                ax2, ay2, ath2, av2, ut, Ft, kt, Sx, Sy)
    if st != 0:
        return st, i, j

    for m in range(n):
        xs[m] = x[m] + h2 * ax2[m]
        ys[m] = y[m] + h2 * ay2[m]
        ths[m] = th[m] + h2 * ath2[m]
        vs[m] = v[m] + h2 * av2[m]
    if hold_inputs:
        st, i, j = _held_rhs(xs, ys, ths, vs, u1, F1, ax3, ay3, ath3, av3)
    else:
        st, i, j, _ = fleet_rhs(xs, ys, ths, vs, p, q, L, lam, a, c, yflat, eps,
                                mu1, mu2, A, vstar, vmax, cosphi,
                                ax3, ay3, ath3, av3, ut, Ft, kt, Sx, Sy)
    if st != 0:
        return st, i, j

    for m in range(n):
        xs[m] = x[m] + dt * ax3[m]
        ys[m] = y[m] + dt * ay3[m]
        ths[m] = th[m] + dt * ath3[m]
        vs[m] = v[m] + dt * av3[m]
    if hold_inputs:
        st, i, j = _held_rhs(xs, ys, ths, vs, u1, F1, ax4, ay4, ath4, av4)
    else:
        st, i, j, _ = fleet_rhs(xs, ys, ths, vs, p, q, L, lam, a, c, yflat, eps,
                                mu1, mu2, A, vstar, vmax, cosphi,
                                ax4, ay4, ath4, av4, ut, Ft, kt, Sx, Sy)
    if st != 0:
        return st, i, j

    h6 = dt / 6.0
    for m in range(n):
        xo[m] = x[m] + h6 * (ax1[m] + 2.0 * ax2[m] + 2.0 * ax3[m] + ax4[m])
        yo[m] = y[m] + h6 * (ay1[m] + 2.0 * ay2[m] + 2.0 * ay3[m] + ay4[m])
        tho[m] = th[m] + h6 * (ath1[m] + 2.0 * ath2[m] + 2.0 * ath3[m] + ath4[m])
        vo[m] = v[m] + h6 * (av1[m] + 2.0 * av2[m] + 2.0 * av3[m] + av4[m])
    return 0, -1, -1


@njit(cache=True)
def _held_rhs(x, y, th, v, u, F, dx, dy, dth, dv):
    """Kinematics-only vector field with frozen (zero-order-held) commands."""
    n = x.shape[0]
    for i in range(n):
        if v[i] <= 0.0:
            return 3, i, i
        dx[i] = v[i] * math.cos(th[i])
        dy[i] = v[i] * math.sin(th[i])
        dth[i] = u[i]
        dv[i] = F[i]
    return 0, -1, -1


@njit(cache=True)
def omega_check(x, y, th, v, a, phi, vmax, L, p):
    """State-space membership check.

    Returns (code, i, j, d_min) with code 0 when the fleet is inside the open
    state space.  Per-vehicle constraints are checked in ascending vehicle
    order (lateral, orientation, speed), then pairwise separations in
    lexicographic pair order; d_min is always reported.
    """
    n = x.shape[0]
    mind = np.inf
    sep_i = -1
    sep_j = -1
    for i in range(n):
        for j in range(i + 1, n):
            ddx = x[i] - x[j]
            ddy = y[i] - y[j]
            d = math.sqrt(ddx * ddx + p * ddy * ddy)
            if d < mind:
                mind = d
            if d <= L and sep_i < 0:
                sep_i = i
                sep_j = j
    for i in range(n):
        if y[i] <= -a or y[i] >= a:
            return 1, i, i, mind
        if th[i] <= -phi or th[i] >= phi:
            return 2, i, i, mind
        if v[i] <= 0.0 or v[i] >= vmax:
            return 3, i, i, mind
    if sep_i >= 0:
        return 4, sep_i, sep_j, mind
    return 0, -1, -1, mind


@njit(cache=True)
def energy_kernel(x, y, th, v,
                  p, q, L, lam, a, c, yflat, eps,
                  mu1, mu2, A, vstar, vmax, cosphi):
    """Energy summands and the analytic dissipation rate for one fleet state.

    Returns (status, kin_long, kin_lat, boundary_pot, pairwise_pot,
    orientation_barrier, dissipation).  The pairwise term sums each unordered
    pair once, which equals the half double sum over ordered pairs.
    """
    n = x.shape[0]
    Sx = np.zeros(n)
    ppot = 0.0
    for i in range(n):
        for j in range(i + 1, n):
            ddx = x[i] - x[j]
            ddy = y[i] - y[j]
            d = math.sqrt(ddx * ddx + p * ddy * ddy)
            if d <= L:
                return 1, 0.0, 0.0, 0.0, 0.0, 0.0, 0.0
            if d < lam:
                V, dV = v_pair(d, q, L, lam)
                ppot += V
                tx = dV * ddx / d
                Sx[i] += tx
                Sx[j] -= tx
    kin_long = 0.0
    kin_lat = 0.0
    bpot = 0.0
    obar = 0.0
    diss_k = 0.0
    diss_lat = 0.0
    for i in range(n):
        if v[i] <= 0.0:
            return 3, 0.0, 0.0, 0.0, 0.0, 0.0, 0.0
        if y[i] <= -a or y[i] >= a:
            return 4, 0.0, 0.0, 0.0, 0.0, 0.0, 0.0
        cth = math.cos(th[i])
        sth = math.sin(th[i])
        dcos = cth - cosphi
        if dcos <= 0.0:
            return 5, 0.0, 0.0, 0.0, 0.0, 0.0, 0.0
        gden = vmax * cth - vstar
        if gden <= 0.0:
            return 2, 0.0, 0.0, 0.0, 0.0, 0.0, 0.0
        dev = v[i] * cth - vstar
        kin_long += 0.5 * dev * dev
        kin_lat += 0.5 * v[i] * v[i] * sth * sth
        Ui, _ = u_boundary(y[i], a, c, yflat)
        bpot += Ui
        obar += A * (1.0 / dcos - 1.0 / (1.0 - cosphi))
        fi, _ = f_gain(-Sx[i], eps)
        ki = mu2 + Sx[i] / vstar + vmax * cth / (vstar * gden) * fi
        diss_k += ki * dev * dev
        diss_lat += v[i] * v[i] * sth * sth
    diss = -diss_k - mu1 * diss_lat
    return 0, kin_long, kin_lat, bpot, ppot, obar, diss
