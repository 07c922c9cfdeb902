"""Static chart rendering for a report directory."""

from __future__ import annotations

import os

import matplotlib

matplotlib.use("Agg")
import matplotlib.pyplot as plt
import numpy as np

from .experiment import rows_from_metrics_csv

_BOX_METRICS = (
    ("mean_eta_s", "global performance"),
    ("mean_eta_h", "human command performance"),
    ("rmspe_pct", "RMSPE [%]"),
    ("mean_force_n", "mean force [N]"),
    ("disagreement_pct", "disagreement [%]"),
    ("intervention_pct", "intervention level [%]"),
    ("command_variation_pct", "command variation [%]"),
    ("completion_time_s", "completion time [s]"),
)


def render_report(report_dir: str, out_dir: str) -> list[str]:
    """Boxplots per metric and heatmaps for every binned table found."""
    csv_path = os.path.join(report_dir, "metrics.csv")
    rows = [r for r in rows_from_metrics_csv(csv_path) if r["completed"]]
    if not rows:
        raise ValueError(f"{csv_path}: no completed trials to plot")
    os.makedirs(out_dir, exist_ok=True)
    modes = sorted({r["mode"] for r in rows})
    written = []

    fig, axes = plt.subplots(2, 4, figsize=(16, 7))
    for ax, (key, label) in zip(axes.flat, _BOX_METRICS):
        data = [[r[key] for r in rows if r["mode"] == m] for m in modes]
        ax.boxplot(data, tick_labels=modes)
        ax.set_title(label, fontsize=10)
        ax.grid(True, alpha=0.3)
    fig.suptitle("per-trial metrics by control mode")
    fig.tight_layout()
    path = os.path.join(out_dir, "metrics_boxplots.png")
    fig.savefig(path, dpi=120)
    plt.close(fig)
    written.append(path)

    for name in sorted(os.listdir(report_dir)):
        if not (name.startswith("hist_") and name.endswith(".csv")):
            continue
        full = os.path.join(report_dir, name)
        with open(full) as fh:
            header = fh.readline()
            counts = np.loadtxt(fh, delimiter=",")
        fig, ax = plt.subplots(figsize=(5, 4))
        ax.imshow(np.log1p(counts.T), origin="lower", aspect="auto", cmap="magma")
        ax.set_title(name[5:-4].replace("_", " "), fontsize=10)
        ax.set_xlabel(header.split("x=")[1].split()[0])
        ax.set_ylabel(header.split("y=")[1].split()[0])
        fig.tight_layout()
        path = os.path.join(out_dir, name[:-4] + ".png")
        fig.savefig(path, dpi=120)
        plt.close(fig)
        written.append(path)
    return written
