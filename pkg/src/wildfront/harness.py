"""Scenario runs: PDE simulations, front speeds, shooting and the speed table."""

from __future__ import annotations

import dataclasses
import logging
import math
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field
from pathlib import Path
from typing import Sequence

from . import export
from .front import FrontError, FrontTrack, FrontTracker, TWClassification, classify_tw
from .params import DimensionlessParams, LinearizationFit
from .pde import FieldState, ModelVariant, SimulationError, make_hot_region_ic, simulate
from .scenario import ConfigError, Scenario, load_scenario
from .shooting import ShootingError, ShootingResult, find_both_speeds

log = logging.getLogger(__name__)

TABLE_ROUTES = ("PF_exponential PDE", "PF_linearized PDE", "ODE shooting")
TABLE_HEADER = ("case", "w_mps", "route", "c_minus_mps", "c_plus_mps", "note")


@dataclass
class VariantResult:
    variant: ModelVariant
    classification: TWClassification | None = None
    track: FrontTrack | None = None
    snapshots: list[FieldState] = field(default_factory=list)
    t_below_ignition: float | None = None  # first time max u < 1 (scaled)
    error: str | None = None

    @property
    def final_state(self) -> FieldState | None:
        return self.snapshots[-1] if self.snapshots else None

    def speeds(self) -> tuple[float | None, float | None]:
        """Scaled (c_minus, c_plus); None where no wave was found."""
        cls = self.classification
        if cls is None:
            return None, None
        return (None if cls.c_minus is None else cls.c_minus.c,
                None if cls.c_plus is None else cls.c_plus.c)

    def record(self, d: DimensionlessParams) -> dict:
        rec = {"kind": None if self.classification is None else self.classification.kind}
        if self.classification is not None:
            rec.update(export.speed_report(self.classification, d))
            if self.classification.notes:
                rec["notes"] = "; ".join(self.classification.notes)
        rec["t_below_ignition_s"] = None if self.t_below_ignition is None else d.t_to_s(self.t_below_ignition)
        if self.error:
            rec["error"] = self.error
        return rec


@dataclass
class ScenarioReport:
    scenario: Scenario
    dimensionless: DimensionlessParams
    linearization: LinearizationFit | float
    variants: dict[ModelVariant, VariantResult]
    shooting: ShootingResult | None = None
    shooting_error: str | None = None
    output_dir: Path | None = None

    def discrepancy(self) -> dict[str, float | None]:
        """|c_PDE - c_ODE| / |c_ODE| for the linearized model, per direction."""
        out: dict[str, float | None] = {"c_minus": None, "c_plus": None}
        res = self.variants.get(ModelVariant.PF_linearized)
        if res is None or self.shooting is None:
            return out
        pde = dict(zip(("c_minus", "c_plus"), res.speeds()))
        ode = {"c_minus": self.shooting.c_minus, "c_plus": self.shooting.c_plus}
        for side in out:
            if pde[side] is not None and ode[side] is not None:
                out[side] = abs(pde[side] - ode[side]) / abs(ode[side])
        return out

    def summary(self) -> dict:
        d = self.dimensionless
        lin = self.linearization
        rec: dict = {
            "name": self.scenario.name,
            "w_mps": self.scenario.wind,
            "lambda": lin if isinstance(lin, float) else lin.Lambda,
            "lambda_mode": "override" if isinstance(lin, float) else "fit",
            "dimensionless": d.as_dict(),
            "pde": {v.value: r.record(d) for v, r in self.variants.items()},
        }
        if self.shooting is not None:
            ode = self.shooting.as_record(d)
            ode["found_plus"] = self.shooting.c_plus is not None
            ode["found_minus"] = self.shooting.c_minus is not None
            rec["ode"] = ode
        elif self.shooting_error:
            rec["ode"] = {"error": self.shooting_error}
        rec["pde_vs_ode_discrepancy"] = self.discrepancy()
        return rec


def run_variant(s: Scenario, variant: ModelVariant, d: DimensionlessParams) -> VariantResult:
    grid = s.grid(d)
    ic = make_hot_region_ic(grid, d, s.hot_range_m, s.T_hot)
    tracker = FrontTracker(grid)
    result = VariantResult(variant)

    def observe(state: FieldState) -> None:
        tracker(state)
        if result.t_below_ignition is None and float(state.u.max()) < 1.0:
            result.t_below_ignition = state.t

    try:
        result.snapshots = simulate(
            ic, grid, variant, d, d.t_from_s(s.t_end_seconds), d.t_from_s(s.dt_seconds),
            snapshot_times=[d.t_from_s(t) for t in s.snapshot_times_s], observer=observe,
            advection=s.advection, transport_substeps=s.transport_substeps)
    except SimulationError as exc:
        t_s = "" if exc.t is None else f" at t={d.t_to_s(exc.t):.6g} s"
        result.error = f"{variant.value} failed{t_s}: {exc}"
        log.error(result.error)
        return result
    result.track = tracker.track()
    try:
        result.classification = classify_tw(result.track, d)
    except FrontError as exc:
        result.error = f"{variant.value}: {exc}"
        log.warning(result.error)
    return result


def run_scenario(s: Scenario, write: bool = True, output_dir: Path | None = None,
                 shoot: bool | None = None) -> ScenarioReport:
    """Simulate every requested variant and, for the linearized model, shoot.

    ``shoot`` defaults to whether ``PF_linearized`` is among the variants.
    Artifacts go to ``output_dir`` (default: the scenario's own directory).
    """
    s.validate()
    lin = s.linearization()
    d = s.dimensionless()
    report = ScenarioReport(s, d, lin, {})
    for variant in s.variants:
        log.info("%s: running %s", s.name, variant.value)
        report.variants[variant] = run_variant(s, variant, d)

    if shoot is None:
        shoot = ModelVariant.PF_linearized in s.variants
    if shoot:
        try:
            report.shooting = find_both_speeds(d, s.shooting)
        except ShootingError as exc:
            report.shooting_error = str(exc)
            log.error("%s: shooting failed: %s", s.name, exc)

    if write:
        report.output_dir = write_report(report, s.resolved_output_dir if output_dir is None else Path(output_dir))
    return report


def run_shooting(s: Scenario) -> ScenarioReport:
    """Shooting only; no PDE runs."""
    s.validate()
    d = s.dimensionless()
    report = ScenarioReport(s, d, s.linearization(), {})
    report.shooting = find_both_speeds(d, s.shooting)
    return report


def write_report(report: ScenarioReport, directory: Path) -> Path:
    directory = Path(directory)
    d = report.dimensionless
    grid = report.scenario.grid(d)
    for variant, res in report.variants.items():
        sub = directory / variant.value
        if res.snapshots:
            export.write_snapshots(sub, res.snapshots, grid, d)
        if res.track is not None:
            export.write_front_track(sub / "fronts.csv", res.track, d)
        export.write_kv(sub / "speeds.txt", res.record(d))
    if report.shooting is not None:
        write_shooting(report, directory / "shooting")
    summary = report.summary()
    export.write_kv(directory / "summary.txt", summary)
    export.write_json(directory / "summary.json", summary)
    return directory


def write_shooting(report: ScenarioReport, directory: Path) -> None:
    res = report.shooting
    rec = res.as_record(report.dimensionless)
    export.write_kv(directory / "result.txt", rec)
    export.write_json(directory / "result.json", rec)
    for label, search in (("plus", res.plus), ("minus", res.minus)):
        if search.found and search.trajectory is not None:
            # the minus orbit is computed in the mirrored (wind -> -wind) frame
            export.write_trajectory(directory / f"trajectory_{label}.csv", search.trajectory)


def _mps(d: DimensionlessParams, c: float | None) -> float | None:
    return None if c is None else d.speed_to_mps(c)


def table_rows(report: ScenarioReport) -> list[tuple]:
    s, d = report.scenario, report.dimensionless
    rows = []
    for variant, route in ((ModelVariant.PF_exponential, TABLE_ROUTES[0]),
                           (ModelVariant.PF_linearized, TABLE_ROUTES[1])):
        res = report.variants.get(variant)
        if res is None:
            rows.append((s.name, s.wind, route, "NA", "NA", "not run"))
            continue
        c_minus, c_plus = res.speeds()
        note = res.error or (res.classification.kind if res.classification else "")
        rows.append((s.name, s.wind, route, _na(_mps(d, c_minus)), _na(_mps(d, c_plus)), note))
    if report.shooting is not None:
        sh = report.shooting
        note = "found" if sh.c_plus is not None or sh.c_minus is not None else "not found"
        rows.append((s.name, s.wind, TABLE_ROUTES[2], _na(_mps(d, sh.c_minus)), _na(_mps(d, sh.c_plus)), note))
    else:
        rows.append((s.name, s.wind, TABLE_ROUTES[2], "NA", "NA", report.shooting_error or "not run"))
    return rows


def _na(value):
    return "NA" if value is None else value


def _table_job(item, output_root):
    if isinstance(item, Scenario):
        s = item
    else:
        s = load_scenario(item)
    wanted = tuple(dict.fromkeys(s.variants + (ModelVariant.PF_exponential, ModelVariant.PF_linearized)))
    s = dataclasses.replace(s, variants=wanted)
    out = None if output_root is None else Path(output_root) / s.name
    report = run_scenario(s, write=output_root is not None, output_dir=out, shoot=True)
    return table_rows(report)


def _error_row(item, exc) -> tuple:
    name = item.name if isinstance(item, Scenario) else Path(str(item)).stem
    wind = item.wind if isinstance(item, Scenario) else math.nan
    return (name, wind, "error", "NA", "NA", f"{type(exc).__name__}: {exc}")


def run_table(items: Sequence[Scenario | str | Path], output_root: Path | None = None,
              jobs: int = 1) -> list[tuple]:
    """Table-1-style rows (three routes per scenario); failures become one error row.

    ``items`` may be Scenario objects or config paths. With ``output_root``
    each scenario's artifacts go to ``output_root/<name>`` and the table to
    ``output_root/table.csv``.
    """
    rows: list[tuple] = []
    if jobs > 1 and len(items) > 1:
        with ProcessPoolExecutor(max_workers=jobs) as pool:
            futures = [pool.submit(_table_job, item, output_root) for item in items]
            outcomes = []
            for item, fut in zip(items, futures):
                try:
                    outcomes.append(fut.result())
                except (ConfigError, SimulationError, ShootingError, ValueError) as exc:
                    outcomes.append([_error_row(item, exc)])
    else:
        outcomes = []
        for item in items:
            try:
                outcomes.append(_table_job(item, output_root))
            except (ConfigError, SimulationError, ShootingError, ValueError) as exc:
                log.error("scenario %s failed: %s", item, exc)
                outcomes.append([_error_row(item, exc)])
    for chunk in outcomes:
        rows.extend(chunk)
    if output_root is not None:
        export.write_csv(Path(output_root) / "table.csv", TABLE_HEADER, rows)
    return rows
