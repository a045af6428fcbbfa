"""Figure rendering for evaluation reports.

Every report path can emit PNG figures next to its JSON/CSV output: a
per-topic metric grid for a single run, and a grouped aggregate bar chart
when comparing several runs. Rendering is headless (Agg) and deterministic.
"""

from __future__ import annotations

from pathlib import Path
from typing import Sequence

import matplotlib

matplotlib.use("Agg")

import matplotlib.pyplot as plt
import numpy as np

from .evaluation import METRIC_NAMES, EvalReport

_METRIC_LABELS = {"ndcg10": "NDCG@10", "p10": "P@10", "mrr10": "MRR@10", "map": "MAP"}


def render_report_figure(report: EvalReport, path: str | Path) -> Path:
    """2x2 grid of per-topic bars, one axes per metric, mean drawn as a line."""
    path = Path(path)
    topic_ids = [t.topic_id for t in report.topics]
    fig, axes = plt.subplots(2, 2, figsize=(11, 7), sharex=True)
    positions = np.arange(len(topic_ids))
    for ax, metric in zip(axes.flat, METRIC_NAMES):
        values = [t.value(metric) for t in report.topics]
        ax.bar(positions, values, color="#4878a8", width=0.7)
        ax.axhline(report.aggregate[metric], color="#c44e52", linewidth=1.2,
                   label=f"mean = {report.aggregate[metric]:.4f}")
        ax.set_title(_METRIC_LABELS[metric])
        ax.set_ylim(0.0, 1.05)
        ax.set_xticks(positions)
        ax.set_xticklabels(topic_ids, rotation=90, fontsize=7)
        ax.legend(fontsize=8, loc="upper right")
    fig.suptitle(f"Per-topic metrics: {report.run_tag}")
    fig.tight_layout()
    fig.savefig(path, dpi=120)
    plt.close(fig)
    return path


def render_comparison_figure(reports: Sequence[EvalReport], path: str | Path) -> Path:
    """Grouped bars of aggregate metrics, one group per metric, one bar per run."""
    path = Path(path)
    fig, ax = plt.subplots(figsize=(9, 5))
    n_runs = len(reports)
    group_positions = np.arange(len(METRIC_NAMES))
    width = 0.8 / max(n_runs, 1)
    for i, report in enumerate(reports):
        offsets = group_positions + (i - (n_runs - 1) / 2) * width
        values = [report.aggregate[m] for m in METRIC_NAMES]
        ax.bar(offsets, values, width=width, label=report.run_tag)
    ax.set_xticks(group_positions)
    ax.set_xticklabels([_METRIC_LABELS[m] for m in METRIC_NAMES])
    ax.set_ylim(0.0, 1.05)
    ax.set_ylabel("score")
    ax.legend(fontsize=8)
    ax.set_title("Aggregate metrics by run")
    fig.tight_layout()
    fig.savefig(path, dpi=120)
    plt.close(fig)
    return path
