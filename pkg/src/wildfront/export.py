"""CSV and text writers for simulation and shooting artifacts.

Floats are written with 15 significant digits; absent values are empty cells.
"""

from __future__ import annotations

import csv
import json
import math
from pathlib import Path
from typing import Iterable, Mapping, Sequence

import numpy as np

from .front import FrontTrack, TWClassification
from .params import DimensionlessParams
from .pde import FieldState, Grid1D
from .twode import TWTrajectory

FLOAT_FORMAT = ".15g"


def fmt(value) -> str:
    if value is None:
        return ""
    if isinstance(value, (bool, np.bool_)):
        return str(int(value))
    if isinstance(value, (int, np.integer)):
        return str(int(value))
    if isinstance(value, (float, np.floating)):
        value = float(value)
        return "" if math.isnan(value) else format(value, FLOAT_FORMAT)
    return str(value)


def write_csv(path: Path, header: Sequence[str], rows: Iterable[Sequence]) -> Path:
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    with path.open("w", newline="") as fh:
        writer = csv.writer(fh, lineterminator="\n")
        writer.writerow(header)
        for row in rows:
            writer.writerow([fmt(v) for v in row])
    return path


def write_snapshots(directory: Path, snapshots: Sequence[FieldState], grid: Grid1D,
                    d: DimensionlessParams) -> Path:
    """One ``x,u,v,ignited`` file per snapshot plus ``manifest.csv``; returns the manifest path."""
    directory = Path(directory)
    x = grid.centers
    manifest = []
    for i, s in enumerate(snapshots):
        name = f"snapshot_{i:03d}.csv"
        write_csv(directory / name, ("x", "u", "v", "ignited"), zip(x, s.u, s.v, s.ignited))
        manifest.append((i, s.t, d.t_to_s(s.t), name))
    return write_csv(directory / "manifest.csv", ("snapshot_index", "t_scaled", "t_seconds", "filename"), manifest)


def write_front_track(path: Path, track: FrontTrack, d: DimensionlessParams) -> Path:
    rows = ((t, d.t_to_s(t), xl, xr) for t, xl, xr in zip(track.times, track.x_left, track.x_right))
    return write_csv(path, ("t_scaled", "t_seconds", "x_left", "x_right"), rows)


def write_trajectory(path: Path, traj: TWTrajectory) -> Path:
    res = traj.first_integral_residual()
    return write_csv(path, ("xi", "u", "v", "z", "first_integral_residual"),
                     zip(traj.xi, traj.u, traj.v, traj.z, res))


def speed_report(cls: TWClassification, d: DimensionlessParams) -> dict:
    rec = {"kind": cls.kind}
    for side, est in (("c_minus", cls.c_minus), ("c_plus", cls.c_plus)):
        rec[f"{side}_scaled"] = None if est is None else est.c
        rec[f"{side}_mps"] = None if est is None else d.speed_to_mps(est.c)
        rec[f"{side}_r_squared"] = None if est is None else est.r_squared
    if cls.window is not None:
        rec["window_t_scaled"] = list(cls.window)
    return rec


def format_kv(record: Mapping, prefix: str = "") -> str:
    """Flatten nested mappings into ``key = value`` lines (dotted keys)."""
    lines = []
    for key, value in record.items():
        name = f"{prefix}{key}"
        if isinstance(value, Mapping):
            lines.append(format_kv(value, prefix=f"{name}."))
        elif isinstance(value, (list, tuple)):
            lines.append(f"{name} = " + ", ".join(fmt(v) if not isinstance(v, str) else v for v in value))
        elif isinstance(value, (bool, np.bool_)):
            lines.append(f"{name} = {'true' if value else 'false'}")
        else:
            text = fmt(value)
            lines.append(f"{name} = {text if text != '' else 'NA'}")
    return "\n".join(line for line in lines if line)


def write_kv(path: Path, record: Mapping) -> Path:
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    path.write_text(format_kv(record) + "\n")
    return path


def _jsonable(value):
    if isinstance(value, Mapping):
        return {str(k): _jsonable(v) for k, v in value.items()}
    if isinstance(value, (list, tuple)):
        return [_jsonable(v) for v in value]
    if isinstance(value, (np.floating, float)):
        value = float(value)
        return value if math.isfinite(value) else None
    if isinstance(value, (np.integer,)):
        return int(value)
    if isinstance(value, Path):
        return str(value)
    return value


def write_json(path: Path, record: Mapping) -> Path:
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    path.write_text(json.dumps(_jsonable(record), indent=2) + "\n")
    return path
