"""Wave-speed search for the reduced travelling-wave system.

For a trial speed c the orbit leaving the unburnt state is shot into the
burnt region. Below the wave speed it undershoots (u turns negative), above
it the temperature runs away; at the wave speed it lingers next to the
family of burnt equilibria (0, r, (1 - r)/(gamma h)). The search

1. probes the bracket on a uniform grid for an undershoot -> overshoot
   transition, doubling the upper end (up to ``max_extend`` times the
   original) while every probe still undershoots;
2. golden-section maximises how long the orbit survives (it lingers next to
   the burnt states longest at the wave speed) over the transition cell,
   falling back to bisection on the outcome if the result is not bracketed;
3. accepts the minimiser only if shots just below and above it still
   undershoot and overshoot, i.e. the connecting orbit is bracketed to
   ``tol_c``.

In double precision the orbit cannot be followed all the way into the
saddle-type burnt state, so the achieved closest approach stays finite even
at the exact speed; it is reported, not thresholded.
"""

from __future__ import annotations

import logging
import math
from dataclasses import dataclass, field

import numpy as np

from .params import DimensionlessParams
from .twode import (DEFAULT_START, IgnitionNotReached, NonFiniteState, StopLimits, TWState,
                    TWTrajectory, integrate_backward, residual_fuel)

log = logging.getLogger(__name__)

INV_PHI = (math.sqrt(5.0) - 1.0) / 2.0

BELOW = -1  # undershoot: speed too small
ABOVE = 1  # overshoot / fuel exhausted: speed too large
NEITHER = 0


class ShootingError(RuntimeError):
    pass


class BracketInvalid(ShootingError):
    pass


@dataclass(frozen=True)
class ShootingConfig:
    c_lo: float = 0.1
    c_hi: float = 1.0
    tol_c: float = 1e-6
    d_tol: float = 1e-6
    dxi: float = 1e-3
    start: TWState = DEFAULT_START
    limits: StopLimits = StopLimits()
    n_probe: int = 50
    max_extend: float = 8.0
    max_iter: int = 200

    def __post_init__(self):
        if not 0 < self.c_lo < self.c_hi:
            raise ValueError(f"bracket must satisfy 0 < c_lo < c_hi, got ({self.c_lo}, {self.c_hi})")
        if not self.tol_c > 0:
            raise ValueError("tol_c must be positive")
        if not self.d_tol > 0:
            raise ValueError("d_tol must be positive")
        if self.n_probe < 2:
            raise ValueError("n_probe must be at least 2")


@dataclass(frozen=True)
class Shot:
    c: float
    outcome: str  # stop reason, or "no_ignition"
    side: int
    d_c: float  # closest approach over the burning branch
    tail_d: float  # closest approach past the temperature peak
    r: float  # v at the closest approach


@dataclass
class SpeedSearch:
    """Result of a one-sided search (``find_c_plus``)."""

    c: float | None
    d_c: float
    tail_d: float
    r: float | None
    bracket_used: tuple[float, float]
    trajectory: TWTrajectory | None = None
    diagnostics: dict = field(default_factory=dict)

    @property
    def found(self) -> bool:
        return self.c is not None


@dataclass
class ShootingResult:
    c_plus: float | None
    c_minus: float | None
    r_plus: float | None
    r_minus: float | None
    d_at_c: dict
    plus: SpeedSearch
    minus: SpeedSearch

    def as_record(self, d: DimensionlessParams) -> dict:
        def mps(c):
            return None if c is None else d.speed_to_mps(c)

        return {
            "c_plus_scaled": self.c_plus,
            "c_plus_mps": mps(self.c_plus),
            "c_minus_scaled": self.c_minus,
            "c_minus_mps": mps(self.c_minus),
            "r_plus": self.r_plus,
            "r_minus": self.r_minus,
            "d_c": self.d_at_c,
            "bracket_used": {"plus": list(self.plus.bracket_used), "minus": list(self.minus.bracket_used)},
        }


def _side(outcome: str) -> int:
    if outcome == "undershoot":
        return BELOW
    if outcome in ("overshoot", "fuel_exhausted"):
        return ABOVE
    return NEITHER


def shoot(c: float, d: DimensionlessParams, cfg: ShootingConfig, store: bool = False) -> tuple[Shot, TWTrajectory | None]:
    try:
        traj = integrate_backward(c, d, cfg.start, cfg.dxi, cfg.limits, store=store)
    except IgnitionNotReached:
        return Shot(c, "no_ignition", NEITHER, math.inf, math.inf, math.nan), None
    except NonFiniteState:
        return Shot(c, "overshoot", ABOVE, math.inf, math.inf, math.nan), None
    r = traj.tail_state.v if traj.tail_state is not None else traj.closest_v
    return Shot(c, traj.stop_reason, _side(traj.stop_reason), traj.closest, traj.tail_closest, r), traj


def closest_approach(c: float, d: DimensionlessParams, cfg: ShootingConfig = ShootingConfig()) -> tuple[float, float]:
    """Infimum over the burning branch of u^2 + (h z - (1 - v)/gamma)^2, and v there.

    Returns ``(inf, nan)`` when the shot never ignites.
    """
    if not c > 0:
        raise ValueError(f"closest_approach expects c > 0, got {c}")
    shot_, traj = shoot(c, d, cfg)
    if traj is None:
        return math.inf, math.nan
    return traj.closest, traj.closest_v


def _probe(cs, d, cfg):
    return [shoot(float(c), d, cfg)[0] for c in cs]


def _golden(f, a, b, tol, max_iter):
    x1 = b - INV_PHI * (b - a)
    x2 = a + INV_PHI * (b - a)
    f1, f2 = f(x1), f(x2)
    it = 0
    while b - a > tol and it < max_iter:
        if f1 <= f2:
            b, x2, f2 = x2, x1, f1
            x1 = b - INV_PHI * (b - a)
            f1 = f(x1)
        else:
            a, x1, f1 = x1, x2, f2
            x2 = a + INV_PHI * (b - a)
            f2 = f(x2)
        it += 1
    return (x1, f1) if f1 <= f2 else (x2, f2), (a, b), it


def find_c_plus(d: DimensionlessParams, cfg: ShootingConfig = ShootingConfig()) -> SpeedSearch:
    """Positive wave speed for the wind stored in ``d`` (``c=None`` when absent)."""
    lo, hi = cfg.c_lo, cfg.c_hi
    hi_cap = cfg.c_hi * cfg.max_extend
    shots: list[Shot] = []
    cell = None
    seg_lo = lo
    while True:
        cs = np.linspace(seg_lo, hi, cfg.n_probe)
        new = _probe(cs if not shots else cs[1:], d, cfg)
        shots.extend(new)
        for s0, s1 in zip(shots, shots[1:]):
            if s0.side == BELOW and s1.side == ABOVE:
                cell = (s0, s1)
                break
        if cell is not None or shots[-1].side != BELOW or hi * 2.0 > hi_cap * (1 + 1e-12):
            break
        seg_lo, hi = hi, hi * 2.0
        log.info("extending shooting bracket to c_hi=%g", hi)

    bracket = (lo, hi)
    finite = [s for s in shots if math.isfinite(s.d_c)]
    if not finite:
        raise BracketInvalid(f"no trial speed in [{lo}, {hi}] produced an igniting orbit")
    diagnostics = {
        "n_probe_shots": len(shots),
        "probe_outcomes": {o: sum(s.outcome == o for s in shots) for o in sorted({s.outcome for s in shots})},
        "d_tol": cfg.d_tol,
    }
    attracting = [s for s in shots if s.side == NEITHER and s.d_c <= cfg.d_tol]
    if attracting:
        # orbits that settle onto an attracting burnt state form a continuum in c
        # and do not select a speed
        diagnostics["non_isolated_connections"] = (attracting[0].c, attracting[-1].c)
    _check_unimodal(shots, diagnostics)

    if cell is None:
        best = min(finite, key=lambda s: s.d_c)
        diagnostics["reason"] = "no undershoot/overshoot transition in bracket"
        return SpeedSearch(None, best.d_c, best.tail_d, None, bracket, None, diagnostics)

    def objective(c):
        # orbits linger longest next to the burnt states at the wave speed
        traj = shoot(c, d, cfg)[1]
        return math.inf if traj is None else -float(traj.n_post)

    (c_best, _), final, iters = _golden(objective, cell[0].c, cell[1].c, cfg.tol_c, cfg.max_iter)
    below = shoot(c_best - cfg.tol_c, d, cfg)[0]
    above = shoot(c_best + cfg.tol_c, d, cfg)[0]
    method = "golden"
    if not (below.side == BELOW and above.side == ABOVE):
        log.info("golden-section minimiser %.9g not bracketed (%s/%s); bisecting",
                 c_best, below.outcome, above.outcome)
        c_best, iters = _bisect_transition(cell[0].c, cell[1].c, d, cfg)
        below = shoot(c_best - cfg.tol_c, d, cfg)[0]
        above = shoot(c_best + cfg.tol_c, d, cfg)[0]
        method = "bisection"
    diagnostics.update(method=method, iterations=iters, flank_outcomes=(below.outcome, above.outcome))
    best_shot, traj = shoot(c_best, d, cfg, store=True)
    if traj is not None and traj.tail_index > 0:
        traj = traj.truncated(traj.tail_index + 1)
    if not (below.side == BELOW and above.side == ABOVE):
        diagnostics["reason"] = "could not bracket the undershoot/overshoot transition to tol_c"
        return SpeedSearch(None, best_shot.d_c, best_shot.tail_d, None, bracket, traj, diagnostics)
    # the orbit leaves the burnt state before reaching it, so r comes from the
    # burning-branch invariant (v = 1 at ignition) rather than the last state
    invariant = math.exp(d.gamma * traj.z[traj.ignition_index])
    r, z_inf = residual_fuel(invariant, d)
    diagnostics.update(r_at_closest=best_shot.r, z_inf=z_inf, burning_invariant=invariant)
    return SpeedSearch(c_best, best_shot.d_c, best_shot.tail_d, r, bracket, traj, diagnostics)


def _bisect_transition(a: float, b: float, d: DimensionlessParams, cfg: ShootingConfig) -> tuple[float, int]:
    it = 0
    while b - a > cfg.tol_c and it < cfg.max_iter:
        mid = 0.5 * (a + b)
        side = shoot(mid, d, cfg)[0].side
        if side == BELOW:
            a = mid
        elif side == ABOVE:
            b = mid
        else:
            break
        it += 1
    return 0.5 * (a + b), it


def _check_unimodal(shots: list[Shot], diagnostics: dict) -> None:
    side_changes = sum(1 for a, b in zip(shots, shots[1:]) if a.side != b.side)
    diagnostics["probe_side_changes"] = side_changes
    if side_changes > 1:
        log.warning("shot outcomes change %d times across the bracket; "
                    "the single-minimiser assumption may not hold", side_changes)


def find_both_speeds(d: DimensionlessParams, cfg: ShootingConfig = ShootingConfig()) -> ShootingResult:
    """c_plus for wind w and c_minus = -(c_plus for wind -w)."""
    plus = find_c_plus(d, cfg)
    minus = plus if d.w_tilde == 0.0 else find_c_plus(d.with_wind(-d.w_tilde), cfg)
    c_minus = None if minus.c is None else -minus.c
    return ShootingResult(
        c_plus=plus.c, c_minus=c_minus,
        r_plus=plus.r, r_minus=minus.r,
        d_at_c={"plus": plus.d_c, "minus": minus.d_c},
        plus=plus, minus=minus,
    )


def wind_threshold(d: DimensionlessParams, cfg: ShootingConfig = ShootingConfig(),
                   w_lo: float = 0.0, w_hi: float | None = None, max_steps: int = 20) -> tuple[float, float]:
    """Bracket (scaled) on the wind above which no upwind wave exists.

    Bisects on whether ``find_c_plus`` succeeds for wind -w.
    """
    if w_hi is None:
        w_hi = max(abs(d.w_tilde), 1.0)

    def upwind_exists(w):
        return find_c_plus(d.with_wind(-w), cfg).found

    if not upwind_exists(w_lo):
        raise ShootingError(f"no upwind wave even at wind {w_lo}")
    if upwind_exists(w_hi):
        raise ShootingError(f"upwind wave still exists at wind {w_hi}; raise w_hi")
    for _ in range(max_steps):
        mid = 0.5 * (w_lo + w_hi)
        if upwind_exists(mid):
            w_lo = mid
        else:
            w_hi = mid
    return w_lo, w_hi
