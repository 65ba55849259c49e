"""Render belief traces and reference comparisons as figure files.

All figures are drawn with the Agg backend so rendering works headless;
every function writes PNG files into a target directory and returns the
paths it wrote.
"""

from __future__ import annotations

from pathlib import Path
from typing import Iterable, Sequence

import matplotlib

matplotlib.use("Agg")

import matplotlib.pyplot as plt

from .analysis import AnalysisReport
from .metrics import TraceRow

FIGSIZE = (7.0, 4.0)
DPI = 150


def _series_by_competence(
    rows: Iterable[TraceRow],
) -> dict[str, tuple[list[int], list[float], list[float]]]:
    """Group trace rows into per-competence (weeks, averages, uncertainties)."""
    series: dict[str, tuple[list[int], list[float], list[float]]] = {}
    for row in sorted(rows, key=lambda r: (r.competence, r.week)):
        weeks, avgs, uncs = series.setdefault(row.competence, ([], [], []))
        weeks.append(row.week)
        avgs.append(row.avg)
        uncs.append(row.uncertainty)
    return series


def _save(fig, path: Path) -> str:
    fig.savefig(path, dpi=DPI)
    plt.close(fig)
    return str(path)


def plot_trace(
    rows: Sequence[TraceRow],
    out_dir: str | Path,
    stem: str = "trace",
    competences: Sequence[str] | None = None,
) -> list[str]:
    """Write one averages figure and one uncertainties figure for a trace.

    ``competences`` restricts (and orders) the plotted series; by default
    every competence in the trace is drawn, in sorted id order.
    """
    out = Path(out_dir)
    out.mkdir(parents=True, exist_ok=True)
    series = _series_by_competence(rows)
    ids = list(competences) if competences is not None else sorted(series)
    written = []

    fig, ax = plt.subplots(figsize=FIGSIZE)
    for cid in ids:
        weeks, avgs, _ = series[cid]
        ax.plot(weeks, avgs, marker=".", label=cid)
    ax.set_xlabel("Week")
    ax.set_ylabel("Average level")
    ax.set_ylim(-0.05, 2.05)
    ax.legend(loc="best", fontsize=8)
    fig.tight_layout()
    written.append(_save(fig, out / f"{stem}_average.png"))

    fig, ax = plt.subplots(figsize=FIGSIZE)
    for cid in ids:
        weeks, _, uncs = series[cid]
        ax.plot(weeks, uncs, marker=".", label=cid)
    ax.set_xlabel("Week")
    ax.set_ylabel("Uncertainty")
    ax.set_ylim(-0.02, 1.02)
    ax.legend(loc="best", fontsize=8)
    fig.tight_layout()
    written.append(_save(fig, out / f"{stem}_uncertainty.png"))
    return written


def plot_comparison(
    rows: Sequence[TraceRow],
    report: AnalysisReport,
    out_dir: str | Path,
    stem: str = "comparison",
) -> list[str]:
    """Write one two-panel figure per compared competence.

    The left panel overlays the system's weekly average on the reference
    median with a band between the reference quartiles; the right panel
    shows the system's uncertainty against the reference median level.
    """
    out = Path(out_dir)
    out.mkdir(parents=True, exist_ok=True)
    series = _series_by_competence(rows)
    written = []
    for comp in report.comparisons:
        weeks = list(comp.weeks)
        fig, (ax_avg, ax_unc) = plt.subplots(1, 2, figsize=(10.0, 4.0))

        q1 = [comp.reference_q1.value_at(w) for w in weeks]
        q3 = [comp.reference_q3.value_at(w) for w in weeks]
        med = [comp.reference_median.value_at(w) for w in weeks]
        sys_avg = [comp.system_series.value_at(w) for w in weeks]
        ax_avg.fill_between(weeks, q1, q3, alpha=0.25, label="reference IQR")
        ax_avg.plot(weeks, med, marker="s", label="reference median")
        ax_avg.plot(weeks, sys_avg, marker=".", label="system")
        ax_avg.set_xlabel("Week")
        ax_avg.set_ylabel("Average level")
        ax_avg.set_ylim(-0.05, 2.05)
        ax_avg.set_title(f"{comp.competence} (r={comp.pearson_r:.3f})")
        ax_avg.legend(loc="best", fontsize=8)

        trace_weeks, _, trace_uncs = series.get(comp.competence, ([], [], []))
        ax_unc.plot(trace_weeks, trace_uncs, marker=".", label="system")
        ax_unc.axhline(
            comp.reference_uncertainty_median,
            linestyle="--",
            label="reference median",
        )
        ax_unc.set_xlabel("Week")
        ax_unc.set_ylabel("Uncertainty")
        ax_unc.set_ylim(-0.02, 1.02)
        ax_unc.legend(loc="best", fontsize=8)

        fig.tight_layout()
        written.append(_save(fig, out / f"{stem}_{comp.competence}.png"))
    return written
