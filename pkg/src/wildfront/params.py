"""Physical constants, the Arrhenius linearization fit and the scaled groups.

Temperatures are scaled as u = (T - T_inf) / (T_bar - T_inf), lengths by
``L_ref`` and times by ``t_ref``; speeds therefore scale with ``L_ref / t_ref``.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, replace
from typing import Callable

import numpy as np

STEFAN_BOLTZMANN = 5.67e-11  # kW / (m^2 K^4)


@dataclass(frozen=True)
class PhysicalParams:
    """Dimensional model constants (SI units, energies in kJ)."""

    rho0: float = 40.0  # kg/m^3
    C: float = 1.0  # kJ/(kg K)
    k: float = 2.0  # kW/(m K)
    h: float = 4.0  # kW/(m^3 K)
    A: float = 0.05  # 1/s
    H: float = 4000.0  # kJ/kg
    T_ac: float = 400.0  # K
    T_bar: float = 400.0  # K
    T_inf: float = 300.0  # K
    eps: float = 0.0
    sigma: float = STEFAN_BOLTZMANN
    Y_ref: float = 1.0
    w: float = 0.0  # m/s

    def __post_init__(self):
        for name in ("rho0", "C", "k", "A", "H", "Y_ref", "T_ac"):
            value = getattr(self, name)
            if not value > 0:
                raise ValueError(f"{name} must be positive, got {value!r}")
        for name in ("h", "sigma", "eps"):
            value = getattr(self, name)
            if not value >= 0:
                raise ValueError(f"{name} must be non-negative, got {value!r}")
        if not self.T_inf < self.T_bar:
            raise ValueError(
                f"T_inf ({self.T_inf}) must be below the ignition temperature T_bar ({self.T_bar})"
            )
        if not math.isfinite(self.w):
            raise ValueError(f"w must be finite, got {self.w!r}")


@dataclass(frozen=True)
class LinearizationFit:
    Lambda: float
    fit_range: tuple[float, float]
    rms_residual: float
    n_samples: int = 0


def fit_lambda(
    T_ac: float,
    T_inf: float,
    fit_range: tuple[float, float] = (300.0, 1500.0),
    n_samples: int = 1201,
    target: Callable[[np.ndarray], np.ndarray] | None = None,
) -> LinearizationFit:
    """Least-squares slope of ``exp(-T_ac/T) ~ Lambda * (T - T_inf)``.

    The fit has no intercept. ``target`` replaces the Arrhenius factor and is
    only meant for testing the fitting step itself.
    """
    T_lo, T_hi = (float(t) for t in fit_range)
    if not T_lo < T_hi:
        raise ValueError(f"fit range must satisfy T_lo < T_hi, got {fit_range!r}")
    if T_lo <= 0:
        raise ValueError(f"T_lo must be positive (exp(-T_ac/T) is singular at 0), got {T_lo}")
    if T_hi <= T_inf:
        raise ValueError(f"T_hi ({T_hi}) must exceed T_inf ({T_inf}) for a non-degenerate fit")
    if n_samples < 2:
        raise ValueError(f"n_samples must be at least 2, got {n_samples}")

    T = np.linspace(T_lo, T_hi, int(n_samples))
    f = target(T) if target is not None else np.exp(-T_ac / T)
    s = T - T_inf
    Lambda = float(np.dot(s, f) / np.dot(s, s))
    if not Lambda > 0:
        raise ValueError(f"fitted slope is not positive ({Lambda}); check the fit range")
    rms = float(np.sqrt(np.mean((f - Lambda * s) ** 2)))
    return LinearizationFit(Lambda=Lambda, fit_range=(T_lo, T_hi), rms_residual=rms, n_samples=int(n_samples))


def calibrate_lambda(h: float, h_tilde: float, rho0: float, A: float, H: float) -> float:
    """Slope that maps dimensional ``h`` to scaled ``h_tilde``."""
    if not (h > 0 and h_tilde > 0):
        raise ValueError("calibration needs positive h and h_tilde")
    return h / (h_tilde * rho0 * A * H)


@dataclass(frozen=True)
class DimensionlessParams:
    h_tilde: float
    w_tilde: float
    gamma: float
    t_ref: float
    L_ref: float
    Lambda: float
    T_ac: float
    T_bar: float
    T_inf: float
    # eps * sigma / k; K~(u) = 1 + radiation_ratio * T(u)**3
    radiation_ratio: float = 0.0

    @property
    def delta_T(self) -> float:
        return self.T_bar - self.T_inf

    @property
    def speed_scale(self) -> float:
        """Metres per second for one unit of scaled speed."""
        return self.L_ref / self.t_ref

    def K(self, u):
        return eval_K_dimensionless(u, self)

    def u_from_T(self, T):
        return (T - self.T_inf) / self.delta_T

    def T_from_u(self, u):
        return self.T_inf + self.delta_T * u

    def x_to_m(self, x):
        return x * self.L_ref

    def x_from_m(self, x_m):
        return x_m / self.L_ref

    def t_to_s(self, t):
        return t * self.t_ref

    def t_from_s(self, t_s):
        return t_s / self.t_ref

    def speed_to_mps(self, c):
        return c * self.speed_scale

    def speed_from_mps(self, c_mps):
        return c_mps / self.speed_scale

    def with_wind(self, w_tilde: float) -> "DimensionlessParams":
        return replace(self, w_tilde=float(w_tilde))

    def as_dict(self) -> dict[str, float]:
        return {
            "h_tilde": self.h_tilde,
            "w_tilde": self.w_tilde,
            "gamma": self.gamma,
            "t_ref": self.t_ref,
            "L_ref": self.L_ref,
            "speed_scale": self.speed_scale,
            "Lambda": self.Lambda,
            "radiation_ratio": self.radiation_ratio,
            "K_at_ambient": float(self.K(0.0)),
        }


def nondimensionalize(p: PhysicalParams, fit: LinearizationFit | float) -> DimensionlessParams:
    """Scaled groups for ``p`` given a linearization slope (a fit or a bare value)."""
    Lambda = fit.Lambda if isinstance(fit, LinearizationFit) else float(fit)
    if not Lambda > 0:
        raise ValueError(f"Lambda must be positive, got {Lambda}")
    rate = p.A * Lambda * p.H
    t_ref = p.C / rate
    L_ref = math.sqrt(p.k / (p.rho0 * rate))
    return DimensionlessParams(
        h_tilde=p.h / (p.rho0 * rate),
        w_tilde=t_ref * p.w / L_ref,
        gamma=p.C * (p.T_bar - p.T_inf) / p.H,
        t_ref=t_ref,
        L_ref=L_ref,
        Lambda=Lambda,
        T_ac=p.T_ac,
        T_bar=p.T_bar,
        T_inf=p.T_inf,
        radiation_ratio=p.eps * p.sigma / p.k,
    )


def eval_K_dimensionless(u, d: DimensionlessParams):
    """Scaled diffusivity K(T(u)) / k."""
    if d.radiation_ratio == 0.0:
        return np.ones_like(u, dtype=float) if isinstance(u, np.ndarray) else 1.0
    T = d.T_inf + d.delta_T * u
    return 1.0 + d.radiation_ratio * T**3
