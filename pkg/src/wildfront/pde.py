"""Strang-split finite-volume solver for the scaled 1D fire model.

    u_t + w u_x = (K(u) u_x)_x - h u + psi v
    v_t         = -gamma psi v

Each step does a half step of local kinetics (RK4 per node), a full
transport step (explicit advection, then explicit diffusion) and another
half step of kinetics. Boundaries are homogeneous Neumann.
"""

from __future__ import annotations

import enum
import math
from dataclasses import dataclass
from typing import Callable, Iterator, Sequence

import numpy as np

from .params import DimensionlessParams, eval_K_dimensionless

CFL_SAFETY = 0.9


class ModelVariant(str, enum.Enum):
    EF_exponential = "EF_exponential"
    PF_exponential = "PF_exponential"
    PF_linearized = "PF_linearized"

    @classmethod
    def parse(cls, name: str) -> "ModelVariant":
        try:
            return cls(name.strip())
        except ValueError:
            valid = ", ".join(m.value for m in cls)
            raise ValueError(f"unknown model variant {name!r} (expected one of {valid})") from None


class SimulationError(RuntimeError):
    def __init__(self, message: str, t: float | None = None):
        super().__init__(message if t is None else f"{message} (t_scaled={t:.6g})")
        self.t = t


class InstabilityError(SimulationError):
    pass


class CFLError(SimulationError):
    pass


@dataclass(frozen=True)
class Grid1D:
    x_lo: float
    x_hi: float
    n_cells: int

    def __post_init__(self):
        if not self.x_lo < self.x_hi:
            raise ValueError(f"grid needs x_lo < x_hi, got ({self.x_lo}, {self.x_hi})")
        if self.n_cells < 3:
            raise ValueError(f"grid needs at least 3 cells, got {self.n_cells}")

    @property
    def dx(self) -> float:
        return (self.x_hi - self.x_lo) / self.n_cells

    @property
    def length(self) -> float:
        return self.x_hi - self.x_lo

    @property
    def centers(self) -> np.ndarray:
        return self.x_lo + (np.arange(self.n_cells) + 0.5) * self.dx


@dataclass(frozen=True, eq=False)
class FieldState:
    t: float
    u: np.ndarray
    v: np.ndarray
    ignited: np.ndarray

    def __post_init__(self):
        for arr in (self.u, self.v, self.ignited):
            arr.flags.writeable = False


def reaction_rate(u, ignited, variant: ModelVariant, d: DimensionlessParams):
    """Source factor psi: the u-equation gains psi*v, the v-equation loses gamma*psi*v.

    The exponential variants are scaled so that ``PF_linearized`` is their
    linear approximation: psi = exp(-T_ac/T) / (Lambda (T_bar - T_inf)).
    """
    u = np.asarray(u, dtype=float)
    burning = u >= 1.0
    if variant is not ModelVariant.EF_exponential:
        burning = burning | np.asarray(ignited, dtype=bool)
    if variant is ModelVariant.PF_linearized:
        psi = u
    else:
        T = d.T_inf + d.delta_T * u
        with np.errstate(divide="ignore", over="ignore"):
            psi = np.exp(-d.T_ac / np.maximum(T, 1e-300)) / (d.Lambda * d.delta_T)
    out = np.where(burning, psi, 0.0)
    return out if out.ndim else float(out)


def stable_dt(grid: Grid1D, d: DimensionlessParams, u: np.ndarray | None = None) -> float:
    """Largest transport step allowed by the explicit diffusion and advection bounds."""
    K_max = 1.0 if u is None else float(np.max(eval_K_dimensionless(np.asarray(u), d)))
    dx = grid.dx
    bound = dx * dx / (2.0 * K_max)
    if d.w_tilde != 0.0:
        bound = min(bound, dx / abs(d.w_tilde))
    return CFL_SAFETY * bound


def _kinetics(u, v, ignited, tau, variant, d):
    h, gamma = d.h_tilde, d.gamma

    def rhs(uu, vv):
        psi = reaction_rate(uu, ignited, variant, d)
        return -h * uu + psi * vv, -gamma * psi * vv

    k1u, k1v = rhs(u, v)
    k2u, k2v = rhs(u + 0.5 * tau * k1u, v + 0.5 * tau * k1v)
    k3u, k3v = rhs(u + 0.5 * tau * k2u, v + 0.5 * tau * k2v)
    k4u, k4v = rhs(u + tau * k3u, v + tau * k3v)
    u_new = u + tau / 6.0 * (k1u + 2.0 * k2u + 2.0 * k3u + k4u)
    v_new = v + tau / 6.0 * (k1v + 2.0 * k2v + 2.0 * k3v + k4v)
    return u_new, v_new


def _advect(u, tau, dx, w, scheme):
    if w == 0.0:
        return u
    flip = w < 0
    if flip:
        u = u[::-1]
    nu = abs(w) * tau / dx
    # two zero-gradient ghosts upstream, one downstream
    ug = np.concatenate(([u[0], u[0]], u, [u[-1]]))
    upwind = ug[1:-1]  # donor cell of faces i-1/2 .. n-1/2
    if scheme == "upwind":
        flux = upwind
    else:
        back = ug[1:-1] - ug[:-2]
        fwd = ug[2:] - ug[1:-1]
        # van Leer limited slope 2 a b / (a + b), as 2 m / (1 + m / M) so that
        # products of tiny differences cannot underflow in the far field
        a, b = np.abs(back), np.abs(fwd)
        small, large = np.minimum(a, b), np.maximum(a, b)
        ratio = np.divide(small, large, out=np.zeros_like(small), where=large > 0)
        same_sign = np.sign(back) == np.sign(fwd)
        slope = np.where(same_sign, np.sign(back) * 2.0 * small / (1.0 + ratio), 0.0)
        flux = upwind + 0.5 * (1.0 - nu) * slope
    u_new = u - nu * (flux[1:] - flux[:-1])
    return u_new[::-1] if flip else u_new


def _diffuse(u, tau, dx, d):
    ug = np.concatenate(([u[0]], u, [u[-1]]))
    K = eval_K_dimensionless(ug, d)
    K_face = 0.5 * (K[1:] + K[:-1])
    flux = K_face * (ug[1:] - ug[:-1])
    return u + (tau / (dx * dx)) * (flux[1:] - flux[:-1])


def step(
    s: FieldState,
    dt: float,
    grid: Grid1D,
    variant: ModelVariant,
    d: DimensionlessParams,
    *,
    advection: str = "limited",
    transport_substeps: int = 1,
) -> FieldState:
    """Advance one Strang step of length ``dt``.

    The transport part may be split into ``transport_substeps`` equal explicit
    sub-steps; the stability bound applies to each of them.
    """
    if not dt > 0:
        raise ValueError(f"dt must be positive, got {dt}")
    if advection not in ("limited", "upwind"):
        raise ValueError(f"unknown advection scheme {advection!r}")
    tau = dt / transport_substeps
    limit = stable_dt(grid, d, s.u)
    if tau > limit:
        raise CFLError(
            f"transport step {tau:.6g} exceeds stability bound {limit:.6g}; "
            "reduce dt or raise transport_substeps", s.t)

    ignited = s.ignited.copy()
    u, v = _kinetics(s.u, s.v, ignited, 0.5 * dt, variant, d)
    ignited |= u >= 1.0
    for _ in range(transport_substeps):
        u = _advect(u, tau, grid.dx, d.w_tilde, advection)
        u = _diffuse(u, tau, grid.dx, d)
        ignited |= u >= 1.0
    u, v = _kinetics(u, v, ignited, 0.5 * dt, variant, d)
    ignited |= u >= 1.0

    t_new = s.t + dt
    if not (np.all(np.isfinite(u)) and np.all(np.isfinite(v))):
        raise InstabilityError(f"non-finite field values in {variant.value}", t_new)
    return FieldState(t=t_new, u=u, v=v, ignited=ignited)


def iterate(
    ic: FieldState,
    grid: Grid1D,
    variant: ModelVariant,
    d: DimensionlessParams,
    t_end: float,
    dt: float,
    **step_kw,
) -> Iterator[FieldState]:
    """Yield the initial state and then the state after every step up to ``t_end``."""
    n_steps = _step_count(t_end, dt)
    last_dt = t_end - (n_steps - 1) * dt
    if math.isclose(last_dt, dt, rel_tol=1e-9):
        last_dt = dt
    state = ic
    yield state
    for k in range(1, n_steps + 1):
        state = step(state, dt if k < n_steps else last_dt, grid, variant, d, **step_kw)
        yield state


def _step_count(t_end: float, dt: float) -> int:
    if t_end < 0:
        raise ValueError(f"t_end must be non-negative, got {t_end}")
    if not dt > 0:
        raise ValueError(f"dt must be positive, got {dt}")
    n = t_end / dt
    n_round = round(n)
    if math.isclose(n, n_round, rel_tol=1e-9, abs_tol=1e-9):
        return int(n_round)
    return math.ceil(n)


def simulate(
    ic: FieldState,
    grid: Grid1D,
    variant: ModelVariant,
    d: DimensionlessParams,
    t_end: float,
    dt: float,
    snapshot_times: Sequence[float] = (),
    observer: Callable[[FieldState], None] | None = None,
    **step_kw,
) -> list[FieldState]:
    """Run to ``t_end`` and return states at the steps nearest ``snapshot_times``.

    The final state is always the last element. ``observer`` is called with
    every state, including the initial one.
    """
    times = list(snapshot_times)
    if any(b < a for a, b in zip(times, times[1:])):
        raise ValueError("snapshot_times must be sorted")
    if times and (times[0] < ic.t - 1e-12 or times[-1] > ic.t + t_end + 1e-12):
        raise ValueError("snapshot_times must lie within [t0, t0 + t_end]")
    wanted = {min(round((t - ic.t) / dt), _step_count(t_end, dt)) for t in times}

    snapshots = []
    last = ic
    for k, state in enumerate(iterate(ic, grid, variant, d, t_end, dt, **step_kw)):
        if observer is not None:
            observer(state)
        if k in wanted:
            snapshots.append(state)
        last = state
    if not snapshots or snapshots[-1] is not last:
        snapshots.append(last)
    return snapshots


def make_hot_region_ic(
    grid: Grid1D,
    d: DimensionlessParams,
    hot_range_m: tuple[float, float] = (-25.0, 25.0),
    T_hot: float = 470.0,
) -> FieldState:
    """Hot slab at ``T_hot`` over ``hot_range_m`` (metres), ambient elsewhere, full fuel."""
    lo_m, hi_m = hot_range_m
    if not hi_m > lo_m:
        raise ValueError(f"hot region must have positive width, got {hot_range_m!r}")
    lo, hi = d.x_from_m(lo_m), d.x_from_m(hi_m)
    if lo < grid.x_lo or hi > grid.x_hi:
        raise ValueError("grid does not cover the initial hot region")
    x = grid.centers
    hot = (x > lo) & (x < hi)
    if not hot.any():
        raise ValueError("initial hot region contains no grid cell")
    u = np.where(hot, d.u_from_T(T_hot), 0.0)
    v = np.ones(grid.n_cells)
    return FieldState(t=0.0, u=u, v=v, ignited=u >= 1.0)
