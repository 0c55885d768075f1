"""Scenario definitions and the flat ``key = value`` config format."""

from __future__ import annotations

import configparser
import dataclasses
import math
from dataclasses import dataclass
from pathlib import Path

import numpy as np

from .params import (DimensionlessParams, LinearizationFit, PhysicalParams, fit_lambda,
                     nondimensionalize)
from .pde import Grid1D, ModelVariant, stable_dt
from .shooting import ShootingConfig

DEFAULT_SNAPSHOT_TIMES_S = (0.0, 40.0, 120.0, 280.0, 400.0)
SCENARIO_DIR = Path(__file__).with_name("scenarios")

_PHYSICAL_KEYS = tuple(f.name for f in dataclasses.fields(PhysicalParams))


class ConfigError(ValueError):
    """Invalid scenario configuration; ``key`` names the offending entry."""

    def __init__(self, key: str, message: str):
        super().__init__(f"config key {key!r}: {message}")
        self.key = key


@dataclass(frozen=True)
class Scenario:
    name: str
    physical: PhysicalParams = PhysicalParams()
    lambda_override: float | None = None  # None: least-squares fit
    fit_range: tuple[float, float] = (300.0, 1500.0)
    fit_n_samples: int = 1201
    variants: tuple[ModelVariant, ...] = (ModelVariant.PF_linearized,)
    x_lo_m: float = -250.0
    x_hi_m: float = 250.0
    n_cells: int = 2000
    dt_seconds: float = 0.4
    t_end_seconds: float = 400.0
    hot_range_m: tuple[float, float] = (-25.0, 25.0)
    T_hot: float = 470.0
    snapshot_times_s: tuple[float, ...] = DEFAULT_SNAPSHOT_TIMES_S
    advection: str = "limited"
    transport_substeps: int = 1
    shooting: ShootingConfig = ShootingConfig()
    output_dir: Path | None = None  # default: wildfront_out/<name>

    @property
    def resolved_output_dir(self) -> Path:
        return Path("wildfront_out") / self.name if self.output_dir is None else Path(self.output_dir)

    @property
    def wind(self) -> float:
        return self.physical.w

    def linearization(self) -> LinearizationFit | float:
        if self.lambda_override is not None:
            return self.lambda_override
        return fit_lambda(self.physical.T_ac, self.physical.T_inf, self.fit_range, self.fit_n_samples)

    def dimensionless(self) -> DimensionlessParams:
        return nondimensionalize(self.physical, self.linearization())

    def grid(self, d: DimensionlessParams | None = None) -> Grid1D:
        d = self.dimensionless() if d is None else d
        return Grid1D(d.x_from_m(self.x_lo_m), d.x_from_m(self.x_hi_m), self.n_cells)

    def validate(self) -> None:
        """Check the invariants that need the scaled parameters; raises ConfigError."""
        if not self.variants:
            raise ConfigError("variants", "at least one model variant is required")
        if not self.x_lo_m < self.x_hi_m:
            raise ConfigError("x_hi_m", f"domain must satisfy x_lo_m < x_hi_m, got ({self.x_lo_m}, {self.x_hi_m})")
        if self.n_cells < 3:
            raise ConfigError("n_cells", f"need at least 3 cells, got {self.n_cells}")
        lo, hi = self.hot_range_m
        if not lo < hi:
            raise ConfigError("hot_x_hi_m", f"hot region must have positive width, got ({lo}, {hi})")
        if lo < self.x_lo_m or hi > self.x_hi_m:
            raise ConfigError("hot_x_lo_m", f"hot region ({lo}, {hi}) m lies outside the domain")
        if not self.dt_seconds > 0:
            raise ConfigError("dt_seconds", f"must be positive, got {self.dt_seconds}")
        if not self.t_end_seconds > 0:
            raise ConfigError("t_end_seconds", f"must be positive, got {self.t_end_seconds}")
        if any(t < 0 or t > self.t_end_seconds for t in self.snapshot_times_s):
            raise ConfigError("snapshot_times_s", "snapshot times must lie within [0, t_end_seconds]")
        if self.transport_substeps < 1:
            raise ConfigError("transport_substeps", f"must be at least 1, got {self.transport_substeps}")
        if self.advection not in ("limited", "upwind"):
            raise ConfigError("advection", f"expected 'limited' or 'upwind', got {self.advection!r}")
        try:
            d = self.dimensionless()
        except ValueError as exc:
            raise ConfigError("lambda_override" if self.lambda_override is not None else "fit_T_lo", str(exc)) from exc
        grid = self.grid(d)
        T_hot_u = d.u_from_T(self.T_hot)
        limit = stable_dt(grid, d, np.array([0.0, max(T_hot_u, 0.0)]))
        tau = d.t_from_s(self.dt_seconds) / self.transport_substeps
        if tau > limit:
            raise ConfigError(
                "dt_seconds",
                f"transport step {tau:.6g} (scaled) exceeds the stability bound {limit:.6g}; "
                f"use dt_seconds <= {d.t_to_s(limit) * self.transport_substeps:.6g} or more transport_substeps")


def _float(key, raw):
    try:
        value = float(raw)
    except ValueError:
        raise ConfigError(key, f"expected a number, got {raw!r}") from None
    if not math.isfinite(value):
        raise ConfigError(key, f"expected a finite number, got {raw!r}")
    return value


def _int(key, raw):
    try:
        return int(raw)
    except ValueError:
        raise ConfigError(key, f"expected an integer, got {raw!r}") from None


def _floats(key, raw):
    return tuple(_float(key, item) for item in raw.replace(",", " ").split())


def _variants(key, raw):
    names = [item.strip() for item in raw.split(",") if item.strip()]
    out = []
    for name in names:
        try:
            out.append(ModelVariant.parse(name))
        except ValueError as exc:
            raise ConfigError(key, str(exc)) from None
    return tuple(out)


def parse_config_text(text: str, default_name: str = "scenario") -> Scenario:
    """Build a Scenario from flat ``key = value`` lines (``#`` starts a comment)."""
    cp = configparser.ConfigParser(interpolation=None, comment_prefixes=("#",),
                                   inline_comment_prefixes=("#",), delimiters=("=",))
    cp.optionxform = str  # keys are case sensitive (T_ac, C, H, ...)
    try:
        cp.read_string("[scenario]\n" + text)
    except configparser.Error as exc:
        raise ConfigError(getattr(exc, "option", None) or "<syntax>", str(exc).splitlines()[0]) from None
    raw = dict(cp["scenario"])

    phys = {}
    for key in _PHYSICAL_KEYS:
        if key in raw:
            phys[key] = _float(key, raw.pop(key))
    try:
        physical = PhysicalParams(**phys)
    except ValueError as exc:
        raise ConfigError(str(exc).split()[0], str(exc)) from None

    kw: dict = {"physical": physical}
    kw["name"] = raw.pop("name", default_name).strip()
    if "lambda_override" in raw:
        value = raw.pop("lambda_override").strip()
        if value.lower() not in ("", "none", "fit"):
            lam = _float("lambda_override", value)
            if not lam > 0:
                raise ConfigError("lambda_override", f"must be positive, got {lam}")
            kw["lambda_override"] = lam
    if "fit_T_lo" in raw or "fit_T_hi" in raw:
        kw["fit_range"] = (_float("fit_T_lo", raw.pop("fit_T_lo", "300")),
                           _float("fit_T_hi", raw.pop("fit_T_hi", "1500")))
    if "fit_n_samples" in raw:
        kw["fit_n_samples"] = _int("fit_n_samples", raw.pop("fit_n_samples"))
    if "variants" in raw:
        kw["variants"] = _variants("variants", raw.pop("variants"))
    for key in ("x_lo_m", "x_hi_m", "dt_seconds", "t_end_seconds", "T_hot"):
        if key in raw:
            kw[key] = _float(key, raw.pop(key))
    for key in ("n_cells", "transport_substeps"):
        if key in raw:
            kw[key] = _int(key, raw.pop(key))
    if "hot_x_lo_m" in raw or "hot_x_hi_m" in raw:
        kw["hot_range_m"] = (_float("hot_x_lo_m", raw.pop("hot_x_lo_m", "-25")),
                             _float("hot_x_hi_m", raw.pop("hot_x_hi_m", "25")))
    if "snapshot_times_s" in raw:
        kw["snapshot_times_s"] = tuple(sorted(_floats("snapshot_times_s", raw.pop("snapshot_times_s"))))
    if "advection" in raw:
        kw["advection"] = raw.pop("advection").strip()
    if "output_dir" in raw:
        kw["output_dir"] = Path(raw.pop("output_dir").strip())

    shoot_kw = {}
    for key, conv in (("c_lo", _float), ("c_hi", _float), ("tol_c", _float), ("d_tol", _float),
                      ("dxi", _float), ("n_probe", _int), ("max_extend", _float)):
        if key in raw:
            shoot_kw[key] = conv(key, raw.pop(key))
    if shoot_kw:
        try:
            kw["shooting"] = ShootingConfig(**shoot_kw)
        except ValueError as exc:
            named = [k for k in shoot_kw if k in str(exc)]
            raise ConfigError((named or list(shoot_kw))[0], str(exc)) from None

    if raw:
        key = sorted(raw)[0]
        raise ConfigError(key, "unknown key")
    scenario = Scenario(**kw)
    scenario.validate()
    return scenario


def load_scenario(path: str | Path) -> Scenario:
    """Read a scenario file; a bare name such as ``no_wind`` selects a bundled one."""
    path = Path(path)
    if not path.exists() and not path.suffix and (SCENARIO_DIR / f"{path.name}.cfg").exists():
        path = SCENARIO_DIR / f"{path.name}.cfg"
    try:
        text = path.read_text()
    except OSError as exc:
        raise ConfigError("<file>", f"cannot read {path}: {exc.strerror}") from None
    return parse_config_text(text, default_name=path.stem)


def bundled_scenarios() -> dict[str, Path]:
    return {p.stem: p for p in sorted(SCENARIO_DIR.glob("*.cfg"))}
