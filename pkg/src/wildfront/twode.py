"""Reduced travelling-wave system in the wave coordinate xi = x - c t.

    K(u) u' = (w - c) u - c h z + (c / gamma) (1 - v)
    c v'    = gamma u v   (only behind the ignition point)
    c z'    = -u

Trajectories are integrated from the unburnt state into the burnt region
with classical RK4. The ignition point (u = 1) is located inside its step
by bisection and becomes the origin of xi.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np
from scipy.optimize import brentq

from ._jit import njit
from .params import DimensionlessParams, eval_K_dimensionless


class TWError(RuntimeError):
    pass


class IgnitionNotReached(TWError):
    def __init__(self, message: str, trajectory: "TWTrajectory | None" = None):
        super().__init__(message)
        self.trajectory = trajectory


class NonFiniteState(TWError):
    pass


@dataclass(frozen=True)
class TWState:
    xi: float
    u: float
    v: float
    z: float


DEFAULT_START = TWState(xi=0.0, u=1e-3, v=1.0, z=0.0)


@dataclass(frozen=True)
class StopLimits:
    u_max: float = 100.0
    xi_max_steps: int = 100_000
    stall_steps: int = 1000
    # stalling only counts once the orbit is this close to the burnt states
    stall_below: float = 1e-6
    converged_d: float = 1e-12
    switch_tol: float = 1e-10


@dataclass
class TWTrajectory:
    """One shot. ``xi`` is shifted so the ignition point sits at 0 and decreases
    along the arrays for c > 0 (increases for c < 0)."""

    c: float
    params: DimensionlessParams
    xi: np.ndarray
    u: np.ndarray
    v: np.ndarray
    z: np.ndarray
    ignition_xi: float  # unshifted coordinate of the ignition point
    ignition_index: int
    stop_reason: str
    n_post: int
    u_peak: float
    # closest approach to the burnt-state equilibria over the whole post-ignition branch
    closest: float
    closest_v: float
    # same, restricted to the decaying tail (after the temperature peak)
    tail_closest: float
    tail_index: int
    tail_state: TWState | None

    @property
    def states(self) -> list[TWState]:
        return [TWState(*row) for row in zip(self.xi, self.u, self.v, self.z)]

    def truncated(self, end: int) -> "TWTrajectory":
        """Copy holding the first ``end`` stored states."""
        out = TWTrajectory(**{**self.__dict__})
        out.xi, out.u, out.v, out.z = self.xi[:end], self.u[:end], self.v[:end], self.z[:end]
        return out

    def first_integral_residual(self) -> np.ndarray:
        """Relative deviation of the conserved quantity from c/gamma.

        du/dxi comes from finite differences of the stored profile (fourth
        order where the spacing is uniform), taken separately on each side of
        the ignition point.
        """
        if self.xi.size < 3:
            raise ValueError("trajectory too short for a derivative estimate")
        du = np.empty_like(self.u)
        i = self.ignition_index
        if i >= 2:
            du[: i + 1] = _slope(self.u[: i + 1], self.xi[: i + 1])
        if self.u.size - i >= 3:
            du[i:] = _slope(self.u[i:], self.xi[i:])
        elif i >= 2:
            du[i:] = du[i]
        D = self.c / self.params.gamma
        value = first_integral((self.u, self.v, self.z), self.c, du, self.params)
        return (value - D) / abs(D)


def _slope(u, xi):
    """Fourth-order du/dxi on five-point stencils (shifted inward at the ends)."""
    n = u.size
    if n < 5:
        return np.gradient(u, xi, edge_order=2) if n >= 3 else np.zeros_like(u)
    du = np.empty_like(u)
    step = np.diff(xi)
    uniform = np.abs(step - step[0]) <= 1e-9 * abs(step[0])
    ok = np.zeros(n, dtype=bool)
    ok[2:-2] = uniform[:-3] & uniform[1:-2] & uniform[2:-1] & uniform[3:]
    centre = np.flatnonzero(ok)
    hs = step[0]
    du[centre] = (u[centre - 2] - 8.0 * u[centre - 1] + 8.0 * u[centre + 1] - u[centre + 2]) / (12.0 * hs)
    for i in np.flatnonzero(~ok):
        lo = min(max(i - 2, 0), n - 5)
        x = (xi[lo:lo + 5] - xi[i]) / abs(hs)
        # derivative weights: solve sum_j w_j x_j^k = k-th derivative of x^k at 0
        vander = np.vander(x, 5, increasing=True).T
        rhs = np.array([0.0, 1.0, 0.0, 0.0, 0.0])
        du[i] = np.linalg.solve(vander, rhs) @ u[lo:lo + 5] / abs(hs)
    return du


def burning_invariant(v, z, d: DimensionlessParams):
    """v exp(gamma z); constant on the burning branch since d(ln v) = -gamma dz there."""
    return np.asarray(v) * np.exp(d.gamma * np.asarray(z))


def residual_fuel(invariant: float, d: DimensionlessParams) -> tuple[float, float]:
    """Residual fuel r and z(-inf) of the burnt state reached with the given invariant.

    At the burnt state u = 0 and h z = (1 - r)/gamma, so r solves
    r = I exp(-(1 - r)/h). The smaller root is returned (the larger one, when
    it exists, is not a saddle and cannot be reached). Raises ValueError when
    there is no root in (0, 1).
    """
    h = d.h_tilde
    if not (invariant > 0 and h > 0):
        raise ValueError("residual fuel needs a positive invariant and convection constant")

    def f(r):
        return r - invariant * math.exp(-(1.0 - r) / h)

    # f is concave; its maximum sits at r = 1 + h ln(h / I)
    r_top = min(1.0, max(0.0, 1.0 + h * math.log(h / invariant)))
    if f(r_top) <= 0.0 or r_top == 0.0:
        raise ValueError(f"no burnt state is consistent with invariant {invariant:.6g}")
    r = brentq(f, 0.0, r_top, xtol=1e-15, rtol=4 * np.finfo(float).eps)
    return r, (1.0 - r) / (d.gamma * h)


def _unpack(s):
    if isinstance(s, TWState):
        return s.u, s.v, s.z
    u, v, z = s
    return u, v, z


def tw_rhs(s, c: float, d: DimensionlessParams, indicator_on: bool) -> tuple[float, float, float]:
    """(du/dxi, dv/dxi, dz/dxi) at state ``s`` (a TWState or a (u, v, z) triple)."""
    if c == 0:
        raise ZeroDivisionError("wave speed c must be nonzero")
    u, v, z = _unpack(s)
    du = ((d.w_tilde - c) * u - c * d.h_tilde * z + (c / d.gamma) * (1.0 - v)) / eval_K_dimensionless(u, d)
    dv = (d.gamma / c) * u * v if indicator_on else 0.0 * u
    dz = -u / c
    return du, dv, dz


def first_integral(s, c: float, du_dxi, d: DimensionlessParams):
    """K(u) u' + (c - w) u + c h z + (c/gamma) v, equal to c/gamma on exact orbits."""
    u, v, z = _unpack(s)
    return (eval_K_dimensionless(u, d) * du_dxi + (c - d.w_tilde) * u
            + c * d.h_tilde * z + (c / d.gamma) * v)


def equilibrium_distance(u, v, z, d: DimensionlessParams):
    """Squared distance to the family (0, r, (1 - r)/(gamma h))."""
    return u * u + (d.h_tilde * z - (1.0 - v) / d.gamma) ** 2


_REASONS = ("xi_limit", "undershoot", "overshoot", "fuel_exhausted", "converged", "stalled")


@njit(cache=True)
def _rk4(u, v, z, tau, on, c, w, h, a, b, ic, rad, T_inf, dT):
    # unrolled stages; K = 1 without radiation
    K = 1.0 if rad == 0.0 else 1.0 + rad * (T_inf + dT * u) ** 3
    k1u = ((w - c) * u - c * h * z + a * (1.0 - v)) / K
    k1v = b * u * v if on else 0.0
    k1z = -u * ic
    u2 = u + 0.5 * tau * k1u
    v2 = v + 0.5 * tau * k1v
    z2 = z + 0.5 * tau * k1z
    K = 1.0 if rad == 0.0 else 1.0 + rad * (T_inf + dT * u2) ** 3
    k2u = ((w - c) * u2 - c * h * z2 + a * (1.0 - v2)) / K
    k2v = b * u2 * v2 if on else 0.0
    k2z = -u2 * ic
    u3 = u + 0.5 * tau * k2u
    v3 = v + 0.5 * tau * k2v
    z3 = z + 0.5 * tau * k2z
    K = 1.0 if rad == 0.0 else 1.0 + rad * (T_inf + dT * u3) ** 3
    k3u = ((w - c) * u3 - c * h * z3 + a * (1.0 - v3)) / K
    k3v = b * u3 * v3 if on else 0.0
    k3z = -u3 * ic
    u4 = u + tau * k3u
    v4 = v + tau * k3v
    z4 = z + tau * k3z
    K = 1.0 if rad == 0.0 else 1.0 + rad * (T_inf + dT * u4) ** 3
    k4u = ((w - c) * u4 - c * h * z4 + a * (1.0 - v4)) / K
    k4v = b * u4 * v4 if on else 0.0
    k4z = -u4 * ic
    t6 = tau / 6.0
    return (u + t6 * (k1u + 2.0 * k2u + 2.0 * k3u + k4u),
            v + t6 * (k1v + 2.0 * k2v + 2.0 * k3v + k4v),
            z + t6 * (k1z + 2.0 * k2z + 2.0 * k3z + k4z))


@njit(cache=True)
def _shoot_kernel(c, w, h, gamma, rad, T_inf, dT, u0, v0, z0, s, max_steps,
                  u_max, stall_steps, stall_below, converged_d, switch_tol, buf):
    """Returns (status, n_pre, tau_ign, reason, n_post, u_peak, best, best_v,
    tail_best, tail_m, tail_u, tail_v, tail_z); status 0 ok, 1 no ignition,
    2 non-finite before ignition, 3 non-finite after. Rows of ``buf`` receive
    (u, v, z) of every node when it is non-empty."""
    store = buf.shape[0] > 0
    a = c / gamma
    b = gamma / c
    ic = 1.0 / c
    u, v, z = u0, v0, z0
    if store:
        buf[0, 0] = u
        buf[0, 1] = v
        buf[0, 2] = z
    n_pre = 1
    ignited = False
    tau = 0.0
    for n in range(1, max_steps + 1):
        un, vn, zn = _rk4(u, v, z, s, False, c, w, h, a, b, ic, rad, T_inf, dT)
        if not (np.isfinite(un) and np.isfinite(zn)):
            return (2, n_pre, 0.0, 0, 0, u, np.inf, np.nan, np.inf, -1, np.nan, np.nan, np.nan)
        if un >= 1.0:
            lo = 0.0
            hi = s
            for _ in range(200):
                tau = 0.5 * (lo + hi)
                un, vn, zn = _rk4(u, v, z, tau, False, c, w, h, a, b, ic, rad, T_inf, dT)
                if abs(un - 1.0) < switch_tol:
                    break
                if un < 1.0:
                    lo = tau
                else:
                    hi = tau
            u, v, z = un, vn, zn
            ignited = True
            break
        u, v, z = un, vn, zn
        if store:
            buf[n_pre, 0] = u
            buf[n_pre, 1] = v
            buf[n_pre, 2] = z
        n_pre += 1
        if u < 0.0:
            break
    if not ignited:
        return (1, n_pre, 0.0, 0, 0, u, np.inf, np.nan, np.inf, -1, np.nan, np.nan, np.nan)

    row = n_pre
    if store:
        buf[row, 0] = u
        buf[row, 1] = v
        buf[row, 2] = z
    best = np.inf
    best_v = np.nan
    tail_best = np.inf
    tail_m = -1
    tail_u = np.nan
    tail_v = np.nan
    tail_z = np.nan
    peaked = False
    u_peak = u
    since_gain = 0
    reason = 0
    n_post = 0
    inv_g = 1.0 / gamma
    for m in range(1, max_steps + 1):
        un, vn, zn = _rk4(u, v, z, s, True, c, w, h, a, b, ic, rad, T_inf, dT)
        if not (np.isfinite(un) and np.isfinite(vn) and np.isfinite(zn)):
            return (3, n_pre, tau, 0, n_post, u_peak, best, best_v, tail_best, tail_m, tail_u, tail_v, tail_z)
        if not peaked and un < u:
            peaked = True
        u, v, z = un, vn, zn
        n_post = m
        if store:
            buf[row + m, 0] = u
            buf[row + m, 1] = v
            buf[row + m, 2] = z
        dd = h * z - (1.0 - v) * inv_g
        dist = u * u + dd * dd
        if dist < best:
            best = dist
            best_v = v
        if peaked:
            if dist < tail_best:
                tail_best = dist
                tail_m = m
                tail_u = u
                tail_v = v
                tail_z = z
                since_gain = 0
            else:
                since_gain += 1
        if u > u_peak:
            u_peak = u
        if u < 0.0:
            reason = 1
            break
        if u > u_max:
            reason = 2
            break
        if v < 0.0:
            reason = 3
            break
        if dist <= converged_d:
            reason = 4
            break
        if since_gain >= stall_steps and tail_best <= stall_below:
            reason = 5
            break
    return (0, n_pre, tau, reason, n_post, u_peak, best, best_v, tail_best, tail_m, tail_u, tail_v, tail_z)


def integrate_backward(
    c: float,
    d: DimensionlessParams,
    start: TWState = DEFAULT_START,
    dxi: float = 1e-3,
    limits: StopLimits = StopLimits(),
    store: bool = True,
) -> TWTrajectory:
    """Shoot from ``start`` into the burnt region with fixed-step RK4.

    Stops with reason ``undershoot`` (u < 0), ``overshoot`` (u > u_max),
    ``fuel_exhausted`` (v < 0), ``converged`` (closest approach below
    ``converged_d``), ``stalled`` (already within ``stall_below`` but no
    progress for ``stall_steps`` steps) or ``xi_limit``.
    Raises :class:`IgnitionNotReached` if u never gets to 1.
    """
    if c == 0:
        raise ZeroDivisionError("wave speed c must be nonzero")
    if not dxi > 0:
        raise ValueError(f"dxi must be positive, got {dxi}")
    if not (0.0 <= start.u < 1.0 and 0.0 <= start.v <= 1.0):
        raise ValueError(f"start state {start} is outside the pre-ignition region")

    s = -dxi if c > 0 else dxi
    n_max = limits.xi_max_steps
    buf = np.empty((2 * n_max + 2 if store else 0, 3))
    (status, n_pre, tau, reason, n_post, u_peak, best, best_v,
     tail_best, tail_m, tu, tv, tz) = _shoot_kernel(
        float(c), d.w_tilde, d.h_tilde, d.gamma, d.radiation_ratio, d.T_inf, d.delta_T,
        float(start.u), float(start.v), float(start.z), s, n_max,
        limits.u_max, limits.stall_steps, limits.stall_below, limits.converged_d, limits.switch_tol, buf)

    xi_pre = start.xi + s * np.arange(n_pre)
    if status in (1, 2):
        xi_last = float(xi_pre[-1])
        traj = TWTrajectory(
            c=c, params=d, xi=xi_pre - xi_last if store else np.empty(0),
            u=buf[:n_pre, 0].copy(), v=buf[:n_pre, 1].copy(), z=buf[:n_pre, 2].copy(),
            ignition_xi=math.nan, ignition_index=-1, stop_reason="no_ignition", n_post=0,
            u_peak=u_peak, closest=math.inf, closest_v=math.nan,
            tail_closest=math.inf, tail_index=-1, tail_state=None)
        if status == 2:
            raise NonFiniteState(f"non-finite state before ignition (c={c})")
        raise IgnitionNotReached(f"u never reached 1 before the xi budget ran out (c={c})", traj)
    if status == 3:
        raise NonFiniteState(f"non-finite state {n_post * dxi:.6g} behind ignition (c={c})")

    xi_ign = start.xi + s * (n_pre - 1) + tau
    n_rows = n_pre + 1 + n_post
    if store:
        xi = np.concatenate((xi_pre - xi_ign, [0.0], s * np.arange(1, n_post + 1)))
        u, v, z = (buf[:n_rows, k].copy() for k in range(3))
    else:
        xi = u = v = z = np.empty(0)
    tail_state = None if tail_m < 0 else TWState(s * tail_m, tu, tv, tz)
    return TWTrajectory(
        c=c, params=d, xi=xi, u=u, v=v, z=z,
        ignition_xi=xi_ign, ignition_index=n_pre, stop_reason=_REASONS[reason], n_post=n_post,
        u_peak=u_peak, closest=best, closest_v=best_v,
        tail_closest=tail_best, tail_index=(n_pre + tail_m) if (store and tail_m >= 0) else -1,
        tail_state=tail_state,
    )
