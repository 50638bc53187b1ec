"""Report rendering: delimited tables plus matplotlib figures.

The sweep report is a (value, makespan) line chart; the breakdown report is a
stacked bar comparing baseline and predicted runtime components.  Figures are
written next to the delimited output so a single --out prefix yields both.
"""

from __future__ import annotations

import csv
import io
from pathlib import Path

import matplotlib

matplotlib.use("Agg")

import matplotlib.pyplot as plt  # noqa: E402  (backend must be set first)

BREAKDOWN_COMPONENTS = ("cpu_only", "gpu_only", "parallel", "idle")
_COMPONENT_COLORS = {
    "cpu_only": "#4c72b0",
    "gpu_only": "#dd8452",
    "parallel": "#55a868",
    "idle": "#c44e52",
}


def sweep_rows(param: str, points: list[tuple[object, int]]) -> list[dict]:
    return [{"param": param, "value": value, "makespan_ns": makespan}
            for value, makespan in points]


def render_sweep_csv(param: str, points: list[tuple[object, int]]) -> str:
    buf = io.StringIO()
    writer = csv.writer(buf, lineterminator="\n")
    writer.writerow([param, "makespan_ns"])
    for value, makespan in points:
        writer.writerow([value, makespan])
    return buf.getvalue()


def render_sweep_figure(param: str, points: list[tuple[object, int]],
                        path: str | Path) -> Path:
    fig, ax = plt.subplots(figsize=(6, 4))
    xs = [point[0] for point in points]
    ys = [point[1] / 1000.0 for point in points]
    ax.plot(range(len(xs)), ys, marker="o", color="#4c72b0")
    ax.set_xticks(range(len(xs)))
    ax.set_xticklabels([str(x) for x in xs])
    ax.set_xlabel(param)
    ax.set_ylabel("makespan (µs)")
    ax.set_title(f"makespan vs {param}")
    ax.grid(True, alpha=0.3)
    fig.tight_layout()
    path = Path(path)
    fig.savefig(path)
    plt.close(fig)
    return path


def render_breakdown_csv(reports: dict[str, dict]) -> str:
    """``reports`` maps a run label to a serialized breakdown document."""
    buf = io.StringIO()
    writer = csv.writer(buf, lineterminator="\n")
    writer.writerow(["run", *(f"{c}_ns" for c in BREAKDOWN_COMPONENTS),
                     "total_ns"])
    for label, obj in reports.items():
        writer.writerow([label, *(obj[f"{c}_ns"] for c in BREAKDOWN_COMPONENTS),
                         obj["total_ns"]])
    return buf.getvalue()


def render_breakdown_figure(reports: dict[str, dict],
                            path: str | Path) -> Path:
    fig, ax = plt.subplots(figsize=(6, 4))
    labels = list(reports)
    bottoms = [0.0] * len(labels)
    for component in BREAKDOWN_COMPONENTS:
        heights = [reports[label][f"{component}_ns"] / 1000.0
                   for label in labels]
        ax.bar(labels, heights, bottom=bottoms, label=component,
               color=_COMPONENT_COLORS[component])
        bottoms = [b + h for b, h in zip(bottoms, heights)]
    ax.set_ylabel("time (µs)")
    ax.set_title("runtime breakdown")
    ax.legend()
    fig.tight_layout()
    path = Path(path)
    fig.savefig(path)
    plt.close(fig)
    return path
