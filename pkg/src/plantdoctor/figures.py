"""Optional figure rendering for reports.

Everything here draws with the non-interactive Agg canvas directly, so
runs stay headless-safe and no global matplotlib state is touched.
"""

from __future__ import annotations

import os

import numpy as np

from .report import ComparisonResult, LeafReport
from .roi import RoiEntry


def _new_figure(width: float, height: float):
    from matplotlib.backends.backend_agg import FigureCanvasAgg
    from matplotlib.figure import Figure

    fig = Figure(figsize=(width, height), dpi=110)
    FigureCanvasAgg(fig)
    return fig


def render_ratio_chart(reports: list[LeafReport], path: str) -> None:
    """Horizontal bar chart of per-leaf damage percentages."""
    rows = [r for r in sorted(reports, key=lambda r: r.leaf_id) if r.ratio_pct is not None]
    fig = _new_figure(6.4, max(2.0, 0.5 * len(rows) + 1.2))
    ax = fig.add_subplot(111)
    if rows:
        labels = [f"leaf {r.leaf_id}" for r in rows]
        values = [r.ratio_pct for r in rows]
        ypos = np.arange(len(rows))
        ax.barh(ypos, values, color="#7a3b2e")
        ax.set_yticks(ypos, labels=labels)
        ax.invert_yaxis()
        for y, v in zip(ypos, values):
            ax.text(v, y, f" {v:.2f}%", va="center", fontsize=9)
        ax.set_xlim(0, max(values) * 1.25 + 0.5)
    else:
        ax.text(0.5, 0.5, "no measurable leaves", ha="center", va="center",
                transform=ax.transAxes)
    ax.set_xlabel("damage ratio (%)")
    ax.set_title("Damage ratio per leaf")
    fig.tight_layout()
    fig.savefig(path)


def render_best_roi(entry: RoiEntry, report: LeafReport, path: str) -> None:
    """The leaf's representative crop, annotated with its numbers."""
    fig = _new_figure(4.2, 4.4)
    ax = fig.add_subplot(111)
    ax.imshow(entry.roi)
    ax.set_axis_off()
    ratio = f"{report.ratio_pct:.2f}%" if report.ratio_pct is not None else "no leaf found"
    ax.set_title(f"leaf {report.leaf_id} — frame {report.best_frame} — {ratio}", fontsize=10)
    fig.tight_layout()
    fig.savefig(path)


def render_comparison_chart(result: ComparisonResult, path: str) -> None:
    """Grouped bars: our ratio vs the manual annotation, per leaf."""
    fig = _new_figure(6.4, 3.6)
    ax = fig.add_subplot(111)
    if result.rows:
        xpos = np.arange(len(result.rows))
        width = 0.38
        ax.bar(xpos - width / 2, [r.ours_pct for r in result.rows], width,
               label="pipeline", color="#3c6e47")
        ax.bar(xpos + width / 2, [r.manual_pct for r in result.rows], width,
               label="manual", color="#8d8d8d")
        ax.set_xticks(xpos, labels=[str(r.leaf_id) for r in result.rows])
        ax.legend()
    else:
        ax.text(0.5, 0.5, "no comparable rows", ha="center", va="center",
                transform=ax.transAxes)
    ax.set_xlabel("leaf id")
    ax.set_ylabel("damage ratio (%)")
    ax.set_title("Pipeline vs manual annotation")
    fig.tight_layout()
    fig.savefig(path)


def render_report_figures(reports: list[LeafReport],
                          best_entries: dict[int, RoiEntry], directory: str) -> list[str]:
    """Write the analyze-run figure set; returns the paths written."""
    os.makedirs(directory, exist_ok=True)
    written = []
    chart = os.path.join(directory, "ratio_chart.png")
    render_ratio_chart(reports, chart)
    written.append(chart)
    for report in sorted(reports, key=lambda r: r.leaf_id):
        entry = best_entries.get(report.leaf_id)
        if entry is None:
            continue
        path = os.path.join(directory, f"roi_{report.leaf_id}.png")
        render_best_roi(entry, report, path)
        written.append(path)
    return written
