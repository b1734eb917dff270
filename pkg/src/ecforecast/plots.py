"""Static SVG figures for cross-validation reports."""

from __future__ import annotations

from pathlib import Path
from typing import Sequence

import matplotlib

matplotlib.use("Agg")
import matplotlib.pyplot as plt  # noqa: E402
import numpy as np  # noqa: E402

from .evaluation import CvReport  # noqa: E402
from .series import format_timestamp  # noqa: E402

METRICS = ("mae", "mse", "rmse")


def error_bar_plot(reports: Sequence[CvReport], path, metrics: Sequence[str] = ("mae", "rmse"),
                   title: str = "Cross-validation error (mean and std over folds)") -> Path:
    """Bar chart of mean error per model with one-standard-deviation whiskers."""
    names = [r.model.family.value for r in reports]
    x = np.arange(len(names))
    width = 0.8 / max(len(metrics), 1)
    fig, ax = plt.subplots(figsize=(7, 4))
    for j, metric in enumerate(metrics):
        means = [getattr(r, f"mean_{metric}") for r in reports]
        stds = [getattr(r, f"std_{metric}") for r in reports]
        ax.bar(x + (j - (len(metrics) - 1) / 2) * width, means, width, yerr=stds, capsize=4,
               label=metric.upper())
    ax.set_xticks(x)
    ax.set_xticklabels(names)
    ax.set_ylabel("error (containers)")
    ax.set_title(title)
    ax.legend()
    fig.tight_layout()
    path = Path(path)
    fig.savefig(path, format="svg")
    plt.close(fig)
    return path


def fold_forecast_plot(report: CvReport, path) -> Path:
    """Actual versus forecast line plot, one panel per successful fold."""
    folds = [r for r in report.per_fold if r.ok]
    fig, axes = plt.subplots(max(len(folds), 1), 1, figsize=(8, 2.2 * max(len(folds), 1)),
                             squeeze=False)
    for ax, r in zip(axes[:, 0], folds):
        hours = np.arange(r.actual.size)
        ax.plot(hours, r.actual, label="actual", lw=1.0)
        ax.plot(hours, r.predicted, label="forecast", lw=1.0)
        ax.set_title(f"fold {r.fold.fold_id}: {format_timestamp(r.fold.test_start)} "
                     f"(RMSE {r.metrics.rmse:.1f})", fontsize=9)
        ax.set_ylabel("stock")
    axes[-1, 0].set_xlabel("hours into test window")
    axes[0, 0].legend(loc="upper right", fontsize=8)
    fig.suptitle(f"{report.model.family.value}: actual vs forecast")
    fig.tight_layout()
    path = Path(path)
    fig.savefig(path, format="svg")
    plt.close(fig)
    return path
