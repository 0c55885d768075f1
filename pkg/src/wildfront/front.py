"""Front detection and travelling-wave speed estimation from PDE output."""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Iterable

import numpy as np

from .params import DimensionlessParams
from .pde import FieldState, Grid1D

STEADY_R2 = 0.999
BOUNDARY_GUARD = 0.10
WINDOW_START_FRACTION = 0.25


class FrontError(ValueError):
    pass


class InsufficientPointsError(FrontError):
    pass


class InconclusiveError(FrontError):
    pass


@dataclass
class FrontTrack:
    times: np.ndarray
    x_left: np.ndarray  # NaN where absent
    x_right: np.ndarray
    grid: Grid1D | None = None

    def side(self, side: str) -> np.ndarray:
        if side == "left":
            return self.x_left
        if side == "right":
            return self.x_right
        raise ValueError(f"side must be 'left' or 'right', got {side!r}")


@dataclass(frozen=True)
class SpeedEstimate:
    c: float
    r_squared: float
    n_points: int
    window: tuple[float, float]


@dataclass(frozen=True)
class TWClassification:
    kind: str  # "two_waves" | "one_wave" | "extinction"
    c_minus: SpeedEstimate | None = None
    c_plus: SpeedEstimate | None = None
    window: tuple[float, float] | None = None
    notes: tuple[str, ...] = field(default_factory=tuple)


def locate_fronts(s: FieldState, grid: Grid1D, threshold: float = 1.0) -> tuple[float | None, float | None]:
    """Outermost threshold crossings of ``u`` by linear interpolation.

    Returns ``(x_left, x_right)``; a side is ``None`` when the field never
    reaches the threshold. A crossing at the domain edge (no bracketing node)
    is reported at the edge cell centre.
    """
    u = s.u
    x = grid.centers
    above = np.flatnonzero(u >= threshold)
    if above.size == 0:
        return None, None
    i, j = int(above[0]), int(above[-1])
    if i > 0:
        a, b = u[i - 1], u[i]
        x_left = x[i - 1] + (threshold - a) / (b - a) * grid.dx
    else:
        x_left = x[0]
    if j < u.size - 1:
        a, b = u[j], u[j + 1]
        x_right = x[j] + (a - threshold) / (a - b) * grid.dx
    else:
        x_right = x[-1]
    return float(x_left), float(x_right)


def track_fronts(states: Iterable[FieldState], grid: Grid1D, threshold: float = 1.0) -> FrontTrack:
    times, xl, xr = [], [], []
    for s in states:
        left, right = locate_fronts(s, grid, threshold)
        times.append(s.t)
        xl.append(math.nan if left is None else left)
        xr.append(math.nan if right is None else right)
    return FrontTrack(np.asarray(times), np.asarray(xl), np.asarray(xr), grid)


class FrontTracker:
    """Incremental version of :func:`track_fronts` for streaming simulations."""

    def __init__(self, grid: Grid1D, threshold: float = 1.0):
        self.grid = grid
        self.threshold = threshold
        self._t: list[float] = []
        self._l: list[float] = []
        self._r: list[float] = []

    def __call__(self, s: FieldState) -> None:
        left, right = locate_fronts(s, self.grid, self.threshold)
        self._t.append(s.t)
        self._l.append(math.nan if left is None else left)
        self._r.append(math.nan if right is None else right)

    def track(self) -> FrontTrack:
        return FrontTrack(np.asarray(self._t), np.asarray(self._l), np.asarray(self._r), self.grid)


def estimate_speed(track: FrontTrack, side: str, window: tuple[float, float]) -> SpeedEstimate:
    """Least-squares slope of front position against time inside ``window``."""
    t0, t1 = window
    if not t0 <= t1:
        raise FrontError(f"window must satisfy t_start <= t_end, got {window!r}")
    times = track.times
    if times.size == 0 or t1 < times[0] or t0 > times[-1]:
        raise FrontError(f"window {window!r} lies outside the track")
    x = track.side(side)
    mask = (times >= t0) & (times <= t1) & np.isfinite(x)
    n = int(mask.sum())
    if n < 2:
        raise InsufficientPointsError(f"{side} front has {n} point(s) in window {window!r}")
    t, y = times[mask], x[mask]
    tm, ym = t.mean(), y.mean()
    stt = np.dot(t - tm, t - tm)
    if stt == 0:
        raise InsufficientPointsError("all window points share one time")
    slope = float(np.dot(t - tm, y - ym) / stt)
    resid = y - ym - slope * (t - tm)
    syy = float(np.dot(y - ym, y - ym))
    if syy == 0:
        r2 = 1.0
    else:
        r2 = min(1.0, max(0.0, 1.0 - float(np.dot(resid, resid)) / syy))
    return SpeedEstimate(c=slope, r_squared=r2, n_points=n, window=(float(t0), float(t1)))


def _guard_violation(track: FrontTrack) -> np.ndarray:
    grid = track.grid
    if grid is None:
        return np.zeros(track.times.shape, dtype=bool)
    margin = BOUNDARY_GUARD * grid.length
    near = np.zeros(track.times.shape, dtype=bool)
    for x in (track.x_left, track.x_right):
        ok = np.isfinite(x)
        near |= ok & ((x - grid.x_lo < margin) | (grid.x_hi - x < margin))
    return near


def default_window(track: FrontTrack) -> tuple[float, float]:
    """From a quarter of the run to the end or the first boundary approach."""
    t_first, t_last = float(track.times[0]), float(track.times[-1])
    t_start = t_first + WINDOW_START_FRACTION * (t_last - t_first)
    t_end = t_last
    bad = np.flatnonzero(_guard_violation(track))
    if bad.size:
        first = int(bad[0])
        t_end = float(track.times[max(first - 1, 0)])
    return t_start, t_end


def classify_tw(track: FrontTrack, d: DimensionlessParams | None = None,
                window: tuple[float, float] | None = None) -> TWClassification:
    """Decide between two travelling waves, one downwind wave, or extinction.

    A side counts as a wave only when it moves outward (left front with
    negative speed, right front with positive speed); an upwind edge that is
    dragged downwind is the tail of the single wave.
    """
    win = default_window(track) if window is None else (float(window[0]), float(window[1]))
    t0, t1 = win
    if t1 <= t0:
        raise InconclusiveError(f"regression window {win!r} is empty (fronts reach the boundary too early)")
    in_win = (track.times >= t0) & (track.times <= t1)
    if np.any(_guard_violation(track) & in_win):
        raise InconclusiveError("a front comes within 10% of the domain boundary inside the window")

    alive = np.isfinite(track.x_left) | np.isfinite(track.x_right)
    upto = track.times <= t1
    dead_idx = np.flatnonzero(~alive & upto)
    if dead_idx.size:
        t_dead = float(track.times[dead_idx[0]])
        return TWClassification("extinction", window=win, notes=(f"no burning above threshold from t={t_dead:.6g}",))

    waves: dict[str, SpeedEstimate] = {}
    notes = []
    for side, sign in (("left", -1.0), ("right", 1.0)):
        est = estimate_speed(track, side, win)
        if sign * est.c <= 0:
            notes.append(f"{side} edge moves with speed {est.c:.6g}; not an outward wave")
            continue
        if est.r_squared < STEADY_R2:
            raise InconclusiveError(
                f"{side} front is not travelling steadily (r^2={est.r_squared:.6f} < {STEADY_R2})")
        waves[side] = est

    if "left" in waves and "right" in waves:
        return TWClassification("two_waves", waves["left"], waves["right"], win, tuple(notes))
    if "right" in waves:
        return TWClassification("one_wave", None, waves["right"], win, tuple(notes))
    if "left" in waves:
        # mirror image of the downwind case (negative wind)
        return TWClassification("one_wave", waves["left"], None, win, tuple(notes))
    raise InconclusiveError("fronts persist but neither moves outward")
