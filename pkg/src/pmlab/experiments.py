"""Named scenarios, their configuration, and the pass/fail reports.

Each scenario packages one quantitative claim as a deterministic pipeline:
build profile -> build initial datum -> integrate -> analyse -> emit files.
The registry below fixes the exact criterion set per scenario; a report must
carry precisely those keys, so criteria cannot be dropped silently.

Configurations are plain JSON.  Every scenario has a complete default
configuration (desk scale: seconds of runtime), and a user file only
overrides the pieces it names.
"""

from __future__ import annotations

import copy
import json
import math
import time
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass
from pathlib import Path
from typing import Optional

import numpy as np

from . import barriers as bar
from . import io as pio
from . import regions as reg
from .counterexample import (
    convexity_margin,
    crosscheck_fd,
    datum_from_n,
    dini_condition,
    find_min_n,
    vt_origin,
)
from .errors import ConfigError
from .nonlinearity import constants, profile_by_name
from .solvers import Field1D, Grid1D, RunConfig, integrate, transform_u_to_v

SCENARIOS = (
    "thm1-1d",
    "thm2-radial",
    "thm3-nonexistence",
    "thm5-fbp1",
    "thm6-fbp2",
    "barrier-verify-1",
    "barrier-verify-2",
    "counterexample",
)

#: criterion keys each scenario must report, exactly
CRITERIA_REGISTRY = {
    "thm1-1d": ("monotone_inclusion",),
    "thm2-radial": ("cone_containment", "front_speed", "invasion_time"),
    "thm3-nonexistence": (
        "datum_exceeds_threshold",
        "supgrad_bound",
        "breakdown_before_bound",
    ),
    "thm5-fbp1": ("positivity_steps", "support_snapshots"),
    "thm6-fbp2": ("positivity_steps", "transformed_cone_support"),
    "barrier-verify-1": ("barrier_verified", "comparison"),
    "barrier-verify-2": ("barrier_verified", "comparison"),
    "counterexample": (
        "min_n_found",
        "convexity_negative",
        "origin_derivative_positive",
        "crosscheck_close",
    ),
}


@dataclass(frozen=True)
class CriterionResult:
    passed: bool
    value: float
    detail: str = ""


@dataclass
class ScenarioReport:
    scenario: str
    passed: bool
    criteria: dict[str, CriterionResult]
    metrics: dict[str, float]
    files: dict[str, str]
    runtime_seconds: float

    def to_payload(self) -> dict:
        return {
            "scenario": self.scenario,
            "passed": self.passed,
            "criteria": {
                k: {"passed": v.passed, "value": v.value, "detail": v.detail}
                for k, v in self.criteria.items()
            },
            "metrics": self.metrics,
            "files": self.files,
            "runtime_seconds": self.runtime_seconds,
        }


def _finish_report(scenario, criteria, metrics, files, t0) -> ScenarioReport:
    expected = set(CRITERIA_REGISTRY[scenario])
    got = set(criteria)
    if expected != got:
        raise ConfigError(
            f"scenario {scenario}: criteria mismatch, expected {sorted(expected)}, got {sorted(got)}"
        )
    return ScenarioReport(
        scenario=scenario,
        passed=all(c.passed for c in criteria.values()),
        criteria=criteria,
        metrics=metrics,
        files=files,
        runtime_seconds=time.time() - t0,
    )


# ---------------------------------------------------------------------------
# configuration


def default_config(scenario: str) -> dict:
    """Complete desk-scale configuration for a scenario."""
    if scenario not in SCENARIOS:
        raise ConfigError(f"scenario: unknown {scenario!r}, pick one of {SCENARIOS}")
    cfg = {"scenario": scenario, "profile": "pm", "output_dir": None}
    if scenario == "thm1-1d":
        cfg["grid"] = {"a": 0.0, "b": 1.0, "n_cells": 400}
        cfg["geometry"] = {"x3": 0.3, "x4": 0.7}
        cfg["run"] = {"t_end": 0.5, "snapshot_dt": 0.02, "boundary": "neumann", "cfl_safety": 0.4}
        cfg["initial"] = {
            "preset": "sine-slope",
            "params": {"base": 0.7, "amp": 0.7, "cycles": 1.0},
        }
        cfg["checks"] = {"slack_cells": 2}
    elif scenario == "thm2-radial":
        cfg["grid"] = {"a": 0.5, "b": 1.5, "n_cells": 600}
        cfg["geometry"] = {"r3": 0.9, "r4": 1.1}
        cfg["run"] = {"t_end": None, "snapshot_dt": 0.02, "boundary": "neumann", "cfl_safety": 0.4}
        cfg["initial"] = {
            "preset": "seeded-annulus",
            "params": {"grad_out": 1.3, "grad_in": 0.5, "shoulder": 0.02, "dip": 0.05},
        }
        cfg["checks"] = {"slack_cells": 2, "speed_fraction": 0.85, "invasion_factor": 1.25}
    elif scenario == "thm3-nonexistence":
        cfg["grid"] = {"a": 0.5, "b": 1.5, "n_cells": 600}
        cfg["geometry"] = {"r3": 0.7, "r4": 1.0, "r5": 1.3}
        cfg["run"] = {"t_end": None, "snapshot_dt": 0.05, "boundary": "neumann", "cfl_safety": 0.4}
        cfg["initial"] = {
            "preset": "slope-spike",
            "params": {"base": 0.5, "peak": 6.0, "flat_lo": 0.8, "flat_hi": 1.2, "ramp": 0.05},
        }
        cfg["checks"] = {"breakdown_factor": 1.25, "supgrad_tol": 1e-3}
    elif scenario == "thm5-fbp1":
        cfg["grid"] = {"a": 0.0, "b": 1.0, "n_cells": 400}
        cfg["geometry"] = {"x3": 0.3, "x4": 0.7}
        cfg["run"] = {"t_end": 0.5, "snapshot_dt": 0.02, "boundary": "neumann", "cfl_safety": 0.4}
        cfg["initial"] = {"preset": "bump", "params": {"lo": 0.3, "hi": 0.7, "amp": 0.3}}
        cfg["checks"] = {}
    elif scenario == "thm6-fbp2":
        cfg["grid"] = {"a": 0.5, "b": 1.5, "n_cells": 400}
        cfg["geometry"] = {"r3": 0.9, "r4": 1.1}
        cfg["run"] = {"t_end": 0.5, "snapshot_dt": 0.02, "boundary": "neumann", "cfl_safety": 0.4}
        cfg["initial"] = {"preset": "bump", "params": {"lo": 0.7, "hi": 1.4, "amp": 0.3}}
        cfg["companion"] = {
            "n_cells": 300,
            "t_end": 1.0,
            "snapshot_dt": 0.05,
            "initial": {
                "preset": "seeded-annulus",
                "params": {"grad_out": 1.3, "grad_in": 0.5, "shoulder": 0.02, "dip": 0.05},
            },
        }
        cfg["checks"] = {"slack_cells": 2}
    elif scenario == "barrier-verify-1":
        cfg["grid"] = {"a": 0.0, "b": 1.0, "n_cells": 400}
        cfg["geometry"] = {"x5": 0.35, "x6": 0.65}
        cfg["run"] = {"t_end": 0.5, "snapshot_dt": 0.02, "boundary": "neumann", "cfl_safety": 0.4}
        cfg["initial"] = {"preset": "bump", "params": {"lo": 0.3, "hi": 0.7, "amp": 0.3}}
        cfg["checks"] = {}
    elif scenario == "barrier-verify-2":
        cfg["grid"] = {"a": 0.5, "b": 1.5, "n_cells": 400}
        cfg["geometry"] = {"r5": 0.8, "r6": 1.2, "t_star": 0.5, "drift_fraction": 0.5}
        cfg["run"] = {"t_end": 0.5, "snapshot_dt": 0.02, "boundary": "neumann", "cfl_safety": 0.4}
        cfg["initial"] = {"preset": "bump", "params": {"lo": 0.6, "hi": 1.45, "amp": 0.3}}
        cfg["checks"] = {}
    else:  # counterexample
        cfg["initial"] = {"preset": "taylor-counterexample", "params": {"n": None}}
        cfg["counterexample"] = {"n_max": 50, "patch_half_width": 1e-3, "patch_n": 64}
        cfg["checks"] = {"rel_err_max": 1e-2}
    return cfg


def load_config(source) -> dict:
    """Merge a user configuration (path or dict) over the scenario defaults."""
    if isinstance(source, (str, Path)):
        with open(source) as fh:
            user = json.load(fh)
    else:
        user = copy.deepcopy(dict(source))
    if "scenario" not in user:
        raise ConfigError("scenario: missing")
    cfg = default_config(user["scenario"])
    _merge(cfg, user)
    _validate(cfg)
    return cfg


def _merge(base: dict, override: dict, path=""):
    for key, value in override.items():
        here = f"{path}.{key}" if path else key
        if isinstance(value, dict) and isinstance(base.get(key), dict):
            _merge(base[key], value, here)
        else:
            base[key] = value


def _validate(cfg: dict):
    scenario = cfg["scenario"]
    geo = cfg.get("geometry", {})
    for lo, hi in (("x3", "x4"), ("r3", "r4"), ("x5", "x6"), ("r5", "r6")):
        if lo in geo and hi in geo and not geo[lo] < geo[hi]:
            raise ConfigError(f"geometry.{lo}: must be < geometry.{hi}")
    if scenario == "thm3-nonexistence":
        a, b = cfg["grid"]["a"], cfg["grid"]["b"]
        r3, r4, r5 = geo["r3"], geo["r4"], geo["r5"]
        if not a < r3 < r4 < r5 < b:
            raise ConfigError("geometry.r3: need a < r3 < r4 < r5 < b")
    if "grid" in cfg and cfg["grid"]["n_cells"] < 8:
        raise ConfigError("grid.n_cells: must be at least 8")


# ---------------------------------------------------------------------------
# initial-data presets


def build_initial(grid: Grid1D, spec: dict) -> Field1D:
    """Build the initial field from a named preset or a two-column file."""
    if "file" in spec:
        data = np.loadtxt(spec["file"], dtype=float)
        if data.ndim != 2 or data.shape[1] != 2:
            raise ConfigError("initial.file: need two whitespace-separated columns")
        return Field1D(grid, np.interp(grid.nodes(), data[:, 0], data[:, 1]))
    preset = spec.get("preset")
    params = spec.get("params", {})
    builder = _PRESETS.get(preset)
    if builder is None:
        raise ConfigError(f"initial.preset: unknown {preset!r}, pick one of {sorted(_PRESETS)}")
    return builder(grid, **params)


def _from_gradient(grid, grad_values) -> Field1D:
    h = grid.spacing
    u = np.concatenate([[0.0], np.cumsum(grad_values * h)])
    return Field1D(grid, u)


def preset_ramp(grid, slope=0.5, offset=0.0):
    return Field1D(grid, offset + slope * grid.nodes())


def preset_sine(grid, amp=0.1, cycles=1.0, slope=0.0, offset=0.0, phase=0.0):
    x = grid.nodes()
    span = grid.b - grid.a
    return Field1D(
        grid, offset + slope * x + amp * np.sin(2.0 * np.pi * cycles * (x - grid.a) / span + phase)
    )


def preset_sine_slope(grid, base=0.7, amp=0.7, cycles=1.0):
    """Slope profile base + amp sin(2 pi cycles (x-a)/(b-a)) sampled at midpoints."""
    x = grid.midpoints()
    span = grid.b - grid.a
    return _from_gradient(grid, base + amp * np.sin(2.0 * np.pi * cycles * (x - grid.a) / span))


def preset_tanh_front(grid, lo=0.2, hi=1.4, center=None, width=0.05):
    """Slope transition lo -> hi across a tanh layer (a gradient front)."""
    center = 0.5 * (grid.a + grid.b) if center is None else center
    x = grid.midpoints()
    g = lo + (hi - lo) * 0.5 * (1.0 + np.tanh((x - center) / width))
    return _from_gradient(grid, g)


def preset_bump(grid, lo=0.3, hi=0.7, amp=0.3):
    x = grid.nodes()
    v = np.where(
        (x > lo) & (x < hi), amp * np.sin(np.pi * (x - lo) / (hi - lo)) ** 2, 0.0
    )
    return Field1D(grid, v)


def preset_slope_profile(grid, points, values):
    """Piecewise-linear slope through (points, values), integrated exactly."""
    x = grid.midpoints()
    return _from_gradient(grid, np.interp(x, points, values))


def preset_seeded_annulus(grid, grad_out=1.3, grad_in=0.5, shoulder=0.02, dip=0.05, r3=0.9, r4=1.1):
    """Supercritical surroundings with a subcritical seed on (r3, r4)."""
    pts = [
        grid.a,
        r3 - shoulder,
        r3,
        r3 + dip,
        r4 - dip,
        r4,
        r4 + shoulder,
        grid.b,
    ]
    vals = [grad_out, grad_out, 1.0, grad_in, grad_in, 1.0, grad_out, grad_out]
    return preset_slope_profile(grid, pts, vals)


def preset_slope_spike(grid, base=0.5, peak=6.0, flat_lo=0.8, flat_hi=1.2, ramp=0.05):
    """Subcritical base slope with a supercritical plateau at ``peak``."""
    pts = [grid.a, flat_lo - ramp, flat_lo, flat_hi, flat_hi + ramp, grid.b]
    vals = [base, base, peak, peak, base, base]
    return preset_slope_profile(grid, pts, vals)


def preset_taylor_counterexample(grid, n=None):
    raise ConfigError(
        "initial.preset: taylor-counterexample is a 2D datum; it is consumed by "
        "the counterexample scenario, not by the 1D solvers"
    )


_PRESETS = {
    "ramp": preset_ramp,
    "sine": preset_sine,
    "sine-slope": preset_sine_slope,
    "tanh-front": preset_tanh_front,
    "bump": preset_bump,
    "slope-profile": preset_slope_profile,
    "seeded-annulus": preset_seeded_annulus,
    "slope-spike": preset_slope_spike,
    "taylor-counterexample": preset_taylor_counterexample,
}


# ---------------------------------------------------------------------------
# scenario pipelines


def run_scenario(config, out_dir: Optional[str] = None) -> ScenarioReport:
    """Execute one scenario pipeline; deterministic for a fixed config."""
    cfg = load_config(config)
    scenario = cfg["scenario"]
    t0 = time.time()
    out = Path(out_dir or cfg.get("output_dir") or (pio.output_root() / scenario))
    profile = profile_by_name(cfg["profile"])
    runner = {
        "thm1-1d": _run_thm1,
        "thm2-radial": _run_thm2,
        "thm3-nonexistence": _run_thm3,
        "thm5-fbp1": _run_thm5,
        "thm6-fbp2": _run_thm6,
        "barrier-verify-1": _run_barrier1,
        "barrier-verify-2": _run_barrier2,
        "counterexample": _run_counterexample,
    }[scenario]
    criteria, metrics, files = runner(cfg, profile, out)
    report = _finish_report(scenario, criteria, metrics, files, t0)
    files["report"] = pio.write_json(out / "report.json", report.to_payload())
    return report


def _make_grid(cfg) -> Grid1D:
    g = cfg["grid"]
    return Grid1D(g["a"], g["b"], g["n_cells"])


def _make_runconfig(cfg, model, t_end=None) -> RunConfig:
    run = cfg["run"]
    return RunConfig(
        model=model,
        t_end=t_end if t_end is not None else run["t_end"],
        snapshot_dt=run["snapshot_dt"],
        boundary=run.get("boundary", "neumann"),
        cfl_safety=run.get("cfl_safety", 0.4),
        n_dim=run.get("n_dim", 2),
    )


def _emit_run(out, cfg, traj, files):
    files["trajectory"] = pio.write_trajectory_csv(out / "trajectory.csv", traj)
    files["run_summary"] = pio.write_json(out / "run_summary.json", pio.run_summary(traj, cfg))


def _run_thm1(cfg, profile, out):
    grid = _make_grid(cfg)
    initial = build_initial(grid, cfg["initial"])
    traj = integrate(initial, _make_runconfig(cfg, "pm1d"), profile)
    slack = cfg["checks"]["slack_cells"]
    inclusion = reg.check_monotone_inclusion(traj, profile, slack_cells=slack)
    criteria = {
        "monotone_inclusion": CriterionResult(
            inclusion.passed,
            inclusion.worst_uncovered,
            f"worst uncovered length over {inclusion.pairs_checked} snapshot pairs",
        )
    }
    metrics = {"worst_uncovered": inclusion.worst_uncovered, "pairs": inclusion.pairs_checked}
    files = {}
    _emit_run(out, cfg, traj, files)
    front = reg.track_front(traj, profile, anchor=0.5 * (cfg["geometry"]["x3"] + cfg["geometry"]["x4"]), side="right", mode="cover")
    speeds = reg.measured_speed(front, window=6 * cfg["run"]["snapshot_dt"])
    files["fronts"] = pio.write_front_csv(out / "front.csv", front, speeds)
    return criteria, metrics, files


def _run_thm2(cfg, profile, out):
    grid = _make_grid(cfg)
    geo = cfg["geometry"]
    consts = constants(profile, grid.b)
    invasion_factor = cfg["checks"]["invasion_factor"]
    t_end = cfg["run"]["t_end"] or invasion_factor * (grid.b - grid.a) / consts.k0
    params = dict(cfg["initial"].get("params", {}))
    if cfg["initial"].get("preset") == "seeded-annulus":
        params.setdefault("r3", geo["r3"])
        params.setdefault("r4", geo["r4"])
    initial = build_initial(grid, {**cfg["initial"], "params": params})
    traj = integrate(initial, _make_runconfig(cfg, "pm_radial", t_end=t_end), profile)

    slack = cfg["checks"]["slack_cells"]
    snaps = reg.region_snapshots(traj, profile)
    cone = reg.ExpansionSet(geo["r3"], geo["r4"], consts.k0)
    expansion = reg.check_expansion_rate(snaps, cone, slack_cells=slack, spacing=grid.spacing)

    mid = 0.5 * (geo["r3"] + geo["r4"])
    right = reg.track_front(traj, profile, anchor=mid, side="right", mode="cover", slack_cells=slack)
    left = reg.track_front(traj, profile, anchor=mid, side="left", mode="cover", slack_cells=slack)
    speed_out = _mean_outward_speed(right, geo["r4"], t_end / 2.0)
    speed_in = _mean_outward_speed(left, geo["r3"], t_end / 2.0, sign=-1.0)
    mean_speed = min(speed_out, speed_in)
    need = cfg["checks"]["speed_fraction"] * consts.k0

    invasion_ok = (
        expansion.invasion_time is not None
        and expansion.invasion_time <= invasion_factor * expansion.invasion_bound
    )
    criteria = {
        "cone_containment": CriterionResult(
            expansion.passed, expansion.worst_uncovered, "uncovered cone length, dilated regions"
        ),
        "front_speed": CriterionResult(
            mean_speed >= need, mean_speed, f"mean outward cover-front speed vs {need:.4f}"
        ),
        "invasion_time": CriterionResult(
            invasion_ok,
            expansion.invasion_time if expansion.invasion_time is not None else math.inf,
            f"bound {invasion_factor:.2f} x {expansion.invasion_bound:.4f}",
        ),
    }
    metrics = {
        "k0": consts.k0,
        "mean_front_speed": mean_speed,
        "invasion_time": expansion.invasion_time if expansion.invasion_time is not None else math.nan,
        "invasion_bound": expansion.invasion_bound,
        "worst_uncovered": expansion.worst_uncovered,
    }
    files = {}
    _emit_run(out, cfg, traj, files)
    speeds = reg.measured_speed(right, window=6 * cfg["run"]["snapshot_dt"])
    heur = [
        reg.heuristic_speed(traj.snapshots[i], profile, p, model="pm_radial")
        for i, p in zip(range(len(right.times)), right.positions)
    ]
    files["fronts"] = pio.write_front_csv(out / "front.csv", right, speeds, heur)
    files["cone"] = pio.write_json(
        out / "cone.json", {"r3": geo["r3"], "r4": geo["r4"], "k0": consts.k0}
    )
    return criteria, metrics, files


def _mean_outward_speed(front, start, t_half, sign=1.0):
    """Secant slope of the cover-front over [0, T/2] (or until the track ends)."""
    t, p = front.as_arrays()
    keep = t <= t_half + 1e-12
    t, p = t[keep], p[keep]
    if len(t) < 2:
        return 0.0
    return sign * (p[-1] - p[0]) / (t[-1] - t[0])


def _run_thm3(cfg, profile, out):
    grid = _make_grid(cfg)
    geo = cfg["geometry"]
    cert = reg.nonexistence_certificate(
        grid.a, grid.b, geo["r3"], geo["r4"], geo["r5"], profile
    )
    factor = cfg["checks"]["breakdown_factor"]
    t_end = cfg["run"]["t_end"] or factor * cert.time_bound
    initial = build_initial(grid, cfg["initial"])
    traj = integrate(initial, _make_runconfig(cfg, "pm_radial", t_end=t_end), profile)

    datum_max = float(initial.centered_gradients()[_window(grid, geo["r3"], geo["r5"])].max())
    supgrad = reg.check_supgrad_bound(
        traj, geo["r3"], geo["r5"], profile, tol=cfg["checks"]["supgrad_tol"]
    )
    deadline = factor * cert.time_bound
    breakdown_ok = traj.breakdown and traj.breakdown_time is not None and traj.breakdown_time <= deadline
    criteria = {
        "datum_exceeds_threshold": CriterionResult(
            datum_max > cert.gradient_threshold, datum_max, f"threshold {cert.gradient_threshold:.4f}"
        ),
        "supgrad_bound": CriterionResult(
            supgrad.passed, supgrad.worst_margin, "max slope vs decreasing lower bound"
        ),
        "breakdown_before_bound": CriterionResult(
            breakdown_ok,
            traj.breakdown_time if traj.breakdown_time is not None else math.inf,
            f"deadline {deadline:.4f}",
        ),
    }
    metrics = {
        "gradient_threshold": cert.gradient_threshold,
        "time_bound": cert.time_bound,
        "breakdown_time": traj.breakdown_time if traj.breakdown_time is not None else math.nan,
        "datum_max_slope": datum_max,
        "supgrad_worst_margin": supgrad.worst_margin,
    }
    files = {}
    _emit_run(out, cfg, traj, files)
    files["supgrad"] = pio.write_csv(
        out / "supgrad.csv",
        ["t", "max_slope", "lower_bound"],
        zip(supgrad.times, supgrad.maxima, supgrad.bounds),
    )
    files["certificate"] = pio.write_json(
        out / "certificate.json",
        {"gradient_threshold": cert.gradient_threshold, "time_bound": cert.time_bound},
    )
    return criteria, metrics, files


def _window(grid, lo, hi):
    r = grid.nodes()
    return (r >= lo) & (r <= hi)


def _support_snapshot_monotone(traj):
    """Snapshot-level version of support monotonicity: index sets nest."""
    prev = None
    for snap in traj.snapshots:
        cur = snap.values > 0.0
        if prev is not None and np.any(prev & ~cur):
            return False, snap.time
        prev = cur
    return True, None


def _run_thm5(cfg, profile, out):
    grid = _make_grid(cfg)
    initial = build_initial(grid, cfg["initial"])
    traj = integrate(initial, _make_runconfig(cfg, "fbp1"), profile)
    snap_ok, when = _support_snapshot_monotone(traj)
    criteria = {
        "positivity_steps": CriterionResult(
            bool(traj.positivity_monotone),
            0.0 if traj.positivity_monotone else (traj.positivity_violation_time or -1.0),
            "positive node-set nondecreasing at every step",
        ),
        "support_snapshots": CriterionResult(
            snap_ok, 0.0 if snap_ok else when, "support never loses a node between snapshots"
        ),
    }
    metrics = {"steps_total": traj.steps_total}
    files = {}
    _emit_run(out, cfg, traj, files)
    return criteria, metrics, files


def _run_thm6(cfg, profile, out):
    grid = _make_grid(cfg)
    initial = build_initial(grid, cfg["initial"])
    traj = integrate(initial, _make_runconfig(cfg, "fbp2"), profile)

    comp = cfg["companion"]
    cgrid = Grid1D(grid.a, grid.b, comp["n_cells"])
    geo = cfg["geometry"]
    params = dict(comp["initial"].get("params", {}))
    params.setdefault("r3", geo["r3"])
    params.setdefault("r4", geo["r4"])
    cinitial = build_initial(cgrid, {**comp["initial"], "params": params})
    crc = RunConfig(
        model="pm_radial",
        t_end=comp["t_end"],
        snapshot_dt=comp["snapshot_dt"],
        boundary=cfg["run"].get("boundary", "neumann"),
        cfl_safety=cfg["run"].get("cfl_safety", 0.4),
    )
    ctraj = integrate(cinitial, crc, profile)
    consts = constants(profile, grid.b)
    slack = cfg["checks"]["slack_cells"]
    v_snaps = []
    for snap in ctraj.snapshots:
        v = transform_u_to_v(snap, profile)
        mids = v.grid.nodes()
        pos = v.values > 0.0
        intervals = _mask_intervals(mids, pos, (cgrid.a, cgrid.b))
        v_snaps.append(
            reg.RegionSnapshot(time=snap.time, intervals=intervals, domain=(cgrid.a, cgrid.b))
        )
    cone = reg.ExpansionSet(geo["r3"], geo["r4"], consts.k0)
    expansion = reg.check_expansion_rate(v_snaps, cone, slack_cells=slack, spacing=cgrid.spacing)

    criteria = {
        "positivity_steps": CriterionResult(
            bool(traj.positivity_monotone),
            0.0 if traj.positivity_monotone else (traj.positivity_violation_time or -1.0),
            "positive node-set nondecreasing at every step (direct run)",
        ),
        "transformed_cone_support": CriterionResult(
            expansion.passed,
            expansion.worst_uncovered,
            "positivity of the slope transform contains the expansion cone",
        ),
    }
    metrics = {"k0": consts.k0, "worst_uncovered": expansion.worst_uncovered}
    files = {}
    _emit_run(out, cfg, traj, files)
    return criteria, metrics, files


def _mask_intervals(x, mask, domain):
    """Maximal intervals of True samples, extended to the domain edges."""
    intervals = []
    start = None
    for i in range(len(x)):
        if mask[i] and start is None:
            start = domain[0] if i == 0 else 0.5 * (x[i - 1] + x[i])
        elif not mask[i] and start is not None:
            intervals.append((start, 0.5 * (x[i - 1] + x[i])))
            start = None
    if start is not None:
        intervals.append((start, domain[1]))
    return tuple(intervals)


def _run_barrier1(cfg, profile, out):
    grid = _make_grid(cfg)
    geo = cfg["geometry"]
    initial = build_initial(grid, cfg["initial"])
    traj = integrate(initial, _make_runconfig(cfg, "fbp1"), profile)
    barrier = bar.auto_barrier_fbp1(
        profile, geo["x5"], geo["x6"], v0=initial, t_max=cfg["run"]["t_end"]
    )
    verification = bar.verify_w1(barrier, profile, t_max=cfg["run"]["t_end"])
    comparison = bar.check_comparison(traj, barrier, "fbp1")
    criteria = {
        "barrier_verified": CriterionResult(
            verification.passed, verification.min_margin, "strict inequality margin on the grid"
        ),
        "comparison": CriterionResult(
            comparison.passed, comparison.min_margin, f"v >= w - {comparison.tol:.2e}"
        ),
    }
    metrics = {
        "delta": barrier.delta,
        "lambda": barrier.lam,
        "min_margin": verification.min_margin,
        "comparison_margin": comparison.min_margin,
    }
    files = {}
    _emit_run(out, cfg, traj, files)
    files["barrier"] = pio.write_json(
        out / "barrier.json",
        {
            "kind": "static",
            "x5": barrier.x5,
            "x6": barrier.x6,
            "delta": barrier.delta,
            "lambda": barrier.lam,
            "checks": {k: {"passed": ok, "margin": m} for k, (ok, m) in verification.checks.items()},
            "comparison": vars(comparison),
        },
    )
    files["barrier_margins"] = _emit_margin_grid(out, barrier, profile, cfg["run"]["t_end"])
    files["barrier_profile"] = _emit_barrier_profile(out, barrier, profile, "static", cfg["run"]["t_end"])
    return criteria, metrics, files


def _emit_margin_grid(out, barrier, profile, t_max):
    from .nonlinearity import coeff_g_array

    x = np.linspace(barrier.x5, barrier.x6, 101)[1:-1]
    ts = np.linspace(0.0, t_max, 21)
    rows = []
    for t in ts:
        w, w_t, _, w_xx = bar.eval_w1(barrier, x, t)
        margin = coeff_g_array(profile, w) * w_xx - w_t
        rows.append([t, *margin])
    header = ["t"] + [f"x_{i}" for i in range(len(x))]
    return pio.write_csv(out / "barrier_margins.csv", header, rows)


def _emit_barrier_profile(out, barrier, profile, kind, t_max):
    """Optional CSV of the barrier itself over its interval at a few times."""
    if kind == "static":
        x = np.linspace(barrier.x5, barrier.x6, 101)
        evaluate = lambda t: bar.eval_w1(barrier, x, t)[0]
    else:
        x = np.linspace(barrier.r5, barrier.r6, 101)
        evaluate = lambda t: bar.eval_w2(barrier, x + barrier.k * t, t)[0]
    ts = np.linspace(0.0, t_max, 5)
    header = ["x"] + [f"w_t{j}" for j in range(len(ts))]
    cols = [x] + [np.asarray(evaluate(t)) for t in ts]
    rows = zip(*cols)
    return pio.write_csv(out / "barrier_profile.csv", header, rows)


def _run_barrier2(cfg, profile, out):
    grid = _make_grid(cfg)
    geo = cfg["geometry"]
    initial = build_initial(grid, cfg["initial"])
    traj = integrate(initial, _make_runconfig(cfg, "fbp2"), profile)
    consts = constants(profile, grid.b)
    k = geo["drift_fraction"] * consts.k0
    barrier = bar.auto_barrier_fbp2(
        profile,
        r2=grid.b,
        r5=geo["r5"],
        r6=geo["r6"],
        k=k,
        t_star=geo["t_star"],
        v0=initial,
    )
    verification = bar.verify_w2(barrier, profile, consts.A)
    comparison = bar.check_comparison(traj, barrier, "fbp2")
    criteria = {
        "barrier_verified": CriterionResult(
            verification.passed, verification.min_margin, "strict inequality margin on the strip"
        ),
        "comparison": CriterionResult(
            comparison.passed, comparison.min_margin, f"v >= w - {comparison.tol:.2e}"
        ),
    }
    metrics = {
        "delta": barrier.delta,
        "eps0": barrier.eps0,
        "c2": barrier.c2,
        "drift": k,
        "min_margin": verification.min_margin,
        "comparison_margin": comparison.min_margin,
    }
    files = {}
    _emit_run(out, cfg, traj, files)
    files["barrier"] = pio.write_json(
        out / "barrier.json",
        {
            "kind": "traveling",
            "r5": barrier.r5,
            "r6": barrier.r6,
            "k": barrier.k,
            "delta": barrier.delta,
            "eps0": barrier.eps0,
            "c2": barrier.c2,
            "t_star": barrier.t_star,
            "checks": {k2: {"passed": ok, "margin": m} for k2, (ok, m) in verification.checks.items()},
            "comparison": vars(comparison),
        },
    )
    files["barrier_profile"] = _emit_barrier_profile(
        out, barrier, profile, "traveling", geo["t_star"]
    )
    return criteria, metrics, files


def _run_counterexample(cfg, profile, out):
    ce = cfg["counterexample"]
    fixed_n = cfg.get("initial", {}).get("params", {}).get("n")
    n = int(fixed_n) if fixed_n else find_min_n(profile, ce["n_max"])
    files = {}
    if n is None:
        criteria = {
            "min_n_found": CriterionResult(False, math.nan, f"no n up to {ce['n_max']}"),
            "convexity_negative": CriterionResult(False, math.nan, "skipped"),
            "origin_derivative_positive": CriterionResult(False, math.nan, "skipped"),
            "crosscheck_close": CriterionResult(False, math.nan, "skipped"),
        }
        return criteria, {"min_n": math.nan}, files
    datum = datum_from_n(n)
    conv = convexity_margin(datum)
    vt = vt_origin(datum, profile)
    dini = dini_condition(datum)
    check = crosscheck_fd(
        datum, profile, patch_half_width=ce["patch_half_width"], patch_n=ce["patch_n"]
    )
    rel_max = cfg["checks"]["rel_err_max"]
    n_detail = f"fixed n = {n}" if fixed_n else f"scan up to {ce['n_max']}"
    criteria = {
        "min_n_found": CriterionResult(True, float(n), n_detail),
        "convexity_negative": CriterionResult(conv < 0.0, conv, "local convexity margin"),
        "origin_derivative_positive": CriterionResult(vt > 0.0, vt, "closed-form v_t at origin"),
        "crosscheck_close": CriterionResult(
            check.rel_err <= rel_max, check.rel_err, f"finite differences vs closed form <= {rel_max}"
        ),
    }
    metrics = {
        "min_n": float(n),
        "dini": dini,
        "convexity_margin": conv,
        "vt_closed_form": check.closed_form,
        "vt_fd": check.fd_value,
        "rel_err": check.rel_err,
    }
    files["certificate"] = pio.write_json(
        out / "certificate.json",
        {
            "n": n,
            "dini": dini,
            "convexity_margin": conv,
            "vt_closed_form": check.closed_form,
            "vt_fd": check.fd_value,
            "rel_err": check.rel_err,
        },
    )
    return criteria, metrics, files


# ---------------------------------------------------------------------------
# sweeps


def _set_path(cfg: dict, dotted: str, value):
    parts = dotted.split(".")
    node = cfg
    for key in parts[:-1]:
        if not isinstance(node, dict) or key not in node:
            raise ConfigError(f"sweep parameter path not found: {dotted}")
        node = node[key]
    if not isinstance(node, dict) or parts[-1] not in node:
        raise ConfigError(f"sweep parameter path not found: {dotted}")
    node[parts[-1]] = value


def _sweep_worker(args):
    cfg, out_dir = args
    report = run_scenario(cfg, out_dir=out_dir)
    return report.to_payload()


def run_sweep(config, param_path: str, values, out_dir=None, max_workers=None):
    """Run the scenario once per value of the dotted parameter path.

    Runs execute in separate processes (one per worker); the aggregate CSV
    lists the parameter value, pass/fail, and every scalar metric.
    """
    base = load_config(config)
    out = Path(out_dir or base.get("output_dir") or (pio.output_root() / base["scenario"]))
    jobs = []
    for i, value in enumerate(values):
        cfg = copy.deepcopy(base)
        _set_path(cfg, param_path, value)
        cfg["output_dir"] = None
        jobs.append((cfg, str(out / f"sweep_{i:03d}")))
    if not jobs:
        return []
    if max_workers is None:
        max_workers = min(len(jobs), 4)
    if max_workers <= 1:
        payloads = [_sweep_worker(job) for job in jobs]
    else:
        with ProcessPoolExecutor(max_workers=max_workers) as pool:
            payloads = list(pool.map(_sweep_worker, jobs))
    keys = sorted({k for p in payloads for k in p["metrics"]})
    rows = []
    for value, payload in zip(values, payloads):
        rows.append([value, int(payload["passed"])] + [payload["metrics"].get(k, "") for k in keys])
    pio.write_csv(out / "sweep.csv", ["param", "passed"] + keys, rows)
    return payloads
