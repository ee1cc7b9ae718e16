"""Static SVG rendering of scenario artifacts.

``emit_plots`` reads a scenario report (the JSON written by ``run_scenario``)
and renders whatever the report's file manifest provides: front trajectory
with the expansion-cone overlay, the sup-gradient curve against its lower
bound, and the barrier margin heatmap.
"""

from __future__ import annotations

import csv
import json
from pathlib import Path

import matplotlib

matplotlib.use("Agg")
import matplotlib.pyplot as plt
import numpy as np


def _read_csv(path):
    with open(path) as fh:
        reader = csv.reader(fh)
        header = next(reader)
        rows = [[float(v) if v else np.nan for v in row] for row in reader]
    return header, np.asarray(rows, dtype=float).reshape(len(rows), len(header))


def emit_plots(manifest_path, out_dir=None) -> list[str]:
    """Render SVG plots for a scenario report; returns the files written."""
    manifest_path = Path(manifest_path)
    with open(manifest_path) as fh:
        report = json.load(fh)
    files = report.get("files", {})
    out = Path(out_dir) if out_dir else manifest_path.parent
    out.mkdir(parents=True, exist_ok=True)
    written = []

    if "fronts" in files:
        written.append(_plot_front(files["fronts"], files.get("cone"), out))
    if "supgrad" in files:
        written.append(_plot_supgrad(files["supgrad"], out))
    if "barrier_margins" in files:
        written.append(_plot_margins(files["barrier_margins"], out))
    return written


def _plot_front(front_csv, cone_json, out) -> str:
    _, rows = _read_csv(front_csv)
    fig, ax = plt.subplots(figsize=(5, 4))
    if rows.size:
        t, alpha = rows[:, 0], rows[:, 1]
        ax.plot(t, alpha, "k.-", label="front")
        if cone_json:
            with open(cone_json) as fh:
                cone = json.load(fh)
            tt = np.linspace(t.min(), t.max() if t.max() > 0 else 1.0, 64)
            ax.plot(tt, cone["r4"] + cone["k0"] * tt, "c--", label="cone edge")
            ax.plot(tt, cone["r3"] - cone["k0"] * tt, "c--")
            ax.legend()
    ax.set_xlabel("t")
    ax.set_ylabel("front position")
    path = out / "front_vs_cone.svg"
    fig.savefig(path)
    plt.close(fig)
    return str(path)


def _plot_supgrad(supgrad_csv, out) -> str:
    _, rows = _read_csv(supgrad_csv)
    fig, ax = plt.subplots(figsize=(5, 4))
    if rows.size:
        ax.plot(rows[:, 0], rows[:, 1], "k.-", label="max slope")
        ax.plot(rows[:, 0], rows[:, 2], "r--", label="lower bound")
        ax.legend()
    ax.set_xlabel("t")
    ax.set_ylabel("max slope on the window")
    path = out / "supgrad.svg"
    fig.savefig(path)
    plt.close(fig)
    return str(path)


def _plot_margins(margins_csv, out) -> str:
    _, rows = _read_csv(margins_csv)
    fig, ax = plt.subplots(figsize=(5, 4))
    if rows.size:
        grid = rows[:, 1:]
        im = ax.imshow(
            grid,
            aspect="auto",
            origin="lower",
            extent=(0, 1, rows[0, 0], rows[-1, 0]),
            cmap="viridis",
        )
        fig.colorbar(im, ax=ax, label="inequality margin")
    ax.set_xlabel("relative position in barrier interval")
    ax.set_ylabel("t")
    path = out / "barrier_margins.svg"
    fig.savefig(path)
    plt.close(fig)
    return str(path)
