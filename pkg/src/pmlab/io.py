"""Deterministic CSV/JSON emission for runs and reports.

CSV files use '.' as the decimal mark, ',' as the separator, and a header
row; floats are written with repr (shortest round-trip), so identical runs
produce byte-identical files.
"""

from __future__ import annotations

import json
import os
from pathlib import Path

import numpy as np


def _fmt(value) -> str:
    if isinstance(value, (float, np.floating)):
        return repr(float(value))
    return str(value)


def write_csv(path, header, rows) -> str:
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    with open(path, "w", newline="\n") as fh:
        fh.write(",".join(header) + "\n")
        for row in rows:
            fh.write(",".join(_fmt(v) for v in row) + "\n")
    return str(path)


def write_trajectory_csv(path, traj) -> str:
    """Rows are snapshots: t, then the nodal values x_0..x_N."""
    n = traj.grid.n_cells
    header = ["t"] + [f"x_{i}" for i in range(n + 1)]
    rows = ([snap.time, *snap.values] for snap in traj.snapshots)
    return write_csv(path, header, rows)


def write_front_csv(path, front, speeds=None, heuristics=None) -> str:
    """Columns: t, alpha, measured_speed, heuristic_speed (blank when absent)."""
    t, p = front.as_arrays()
    speed_map = {}
    if speeds is not None and len(speeds):
        speed_map = {float(row[0]): float(row[1]) for row in speeds}
    rows = []
    for i in range(len(t)):
        s = speed_map.get(float(t[i]), "")
        he = "" if heuristics is None else heuristics[i]
        rows.append([t[i], p[i], s, he])
    return write_csv(path, ["t", "alpha", "measured_speed", "heuristic_speed"], rows)


def run_summary(traj, config_echo: dict) -> dict:
    return {
        "model": traj.model,
        "profile": traj.profile_name,
        "boundary": traj.boundary,
        "cfl_safety": traj.cfl_safety,
        "steps_total": traj.steps_total,
        "snapshot_times": [s.time for s in traj.snapshots],
        "dt_history": traj.dt_history,
        "breakdown": {"occurred": traj.breakdown, "time": traj.breakdown_time},
        "positivity_monotone": traj.positivity_monotone,
        "config": config_echo,
    }


def write_json(path, payload) -> str:
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    with open(path, "w") as fh:
        json.dump(payload, fh, indent=2, sort_keys=True, default=_json_default)
        fh.write("\n")
    return str(path)


def _json_default(obj):
    if isinstance(obj, (np.floating, np.integer, np.bool_)):
        return obj.item()
    if isinstance(obj, np.ndarray):
        return obj.tolist()
    if hasattr(obj, "__dict__"):
        return vars(obj)
    raise TypeError(f"not JSON serialisable: {type(obj)}")


def output_root() -> Path:
    return Path(os.environ.get("PMLAB_OUTPUT_ROOT", "pmlab-out"))
