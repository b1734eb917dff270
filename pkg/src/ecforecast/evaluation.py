"""Error metrics, monthly sliding-window cross-validation and grid search."""

from __future__ import annotations

import calendar
import csv
import io
import itertools
import logging
import math
import warnings
from dataclasses import dataclass, field, replace
from typing import Callable, Mapping, Sequence

import numpy as np

from .errors import ForecastError, InsufficientDataError
from .forecaster import default_params, fit, predict, validate_spec
from .models.base import ModelFamily, ModelSpec
from .series import HOUR, CalendarSpec, StockSeries, TimeIndex, business_day_mask, format_timestamp

logger = logging.getLogger(__name__)

TEST_HOURS = 168

PROPHET_GRID = {
    "changepoint_prior_scale": [0.001, 0.01, 0.1, 0.5],
    "seasonality_prior_scale": [0.01, 0.1, 1.0, 10.0],
    "mode": ["additive", "multiplicative"],
}

LSTM_GRID = {
    "timesteps": [60, 80, 100, 150, 200],
    "epochs": [50, 100, 120, 150, 200],
    "layers": [2, 3, 4, 5, 8, 10],
}

SEARCH_GRIDS = {ModelFamily.DECOMPOSABLE: PROPHET_GRID, ModelFamily.LSTM: LSTM_GRID}


@dataclass(frozen=True)
class MetricRow:
    mae: float
    mse: float
    rmse: float
    n: int

    def __post_init__(self):
        if self.n < 1:
            raise ValueError("a metric row needs at least one scored point")


def compute_metrics(actual, predicted) -> MetricRow:
    y = np.asarray(actual, dtype=float)
    yhat = np.asarray(predicted, dtype=float)
    if y.shape != yhat.shape:
        raise ValueError(f"length mismatch: {y.shape} vs {yhat.shape}")
    if y.size == 0:
        raise ValueError("cannot score an empty window")
    err = y - yhat
    mse = float(np.mean(err * err))
    return MetricRow(float(np.mean(np.abs(err))), mse, math.sqrt(mse), int(y.size))


@dataclass(frozen=True)
class FoldSpec:
    fold_id: int
    train_end: np.datetime64
    test_start: np.datetime64
    test_end: np.datetime64

    @property
    def test_index(self) -> TimeIndex:
        return TimeIndex(self.test_start, int((self.test_end - self.test_start) / HOUR) + 1)


def shift_months(ts: np.datetime64, months: int) -> np.datetime64:
    """Move ``ts`` by whole calendar months, clamping the day to the month length."""
    ts = np.datetime64(ts, "h")
    day = ts.astype("datetime64[D]")
    hour = int((ts - day.astype("datetime64[h]")) / HOUR)
    y, m, d = (int(x) for x in str(day).split("-"))
    total = y * 12 + (m - 1) + months
    y2, m2 = divmod(total, 12)
    m2 += 1
    d2 = min(d, calendar.monthrange(y2, m2)[1])
    return np.datetime64(f"{y2:04d}-{m2:02d}-{d2:02d}", "h") + hour * HOUR


def make_folds(index: TimeIndex, n_folds: int = 5, test_hours: int = TEST_HOURS) -> list:
    """Folds stepping back one calendar month at a time from the end of ``index``.

    Fold ``k`` ends ``k`` months before the last timestamp; its test window is
    the final ``test_hours`` hours up to that point and it trains on
    everything earlier.
    """
    if n_folds < 1:
        raise ValueError("need at least one fold")
    folds = []
    for k in range(n_folds):
        end = shift_months(index.end, -k)
        start = end - (test_hours - 1) * HOUR
        train_end = start - HOUR
        if train_end < index.start:
            raise InsufficientDataError(
                f"{n_folds} monthly folds with {test_hours}-hour tests need history from before "
                f"{format_timestamp(train_end)}; the index starts {format_timestamp(index.start)}")
        folds.append(FoldSpec(k, train_end, start, end))
    return folds


@dataclass
class FoldResult:
    fold: FoldSpec
    metrics: MetricRow | None
    business: MetricRow | None = None
    actual: np.ndarray | None = None
    predicted: np.ndarray | None = None
    error: str | None = None

    @property
    def ok(self) -> bool:
        return self.metrics is not None


def _mean_std(values: Sequence[float]) -> tuple:
    arr = np.asarray(values, dtype=float)
    if arr.size == 0:
        return float("nan"), float("nan")
    std = float(arr.std(ddof=1)) if arr.size > 1 else 0.0
    return float(arr.mean()), std


@dataclass
class CvReport:
    model: ModelSpec
    per_fold: list
    mean_mae: float = field(init=False)
    std_mae: float = field(init=False)
    mean_mse: float = field(init=False)
    std_mse: float = field(init=False)
    mean_rmse: float = field(init=False)
    std_rmse: float = field(init=False)

    def __post_init__(self):
        rows = [r.metrics for r in self.per_fold if r.ok]
        for name in ("mae", "mse", "rmse"):
            mean, std = _mean_std([getattr(r, name) for r in rows])
            setattr(self, f"mean_{name}", mean)
            setattr(self, f"std_{name}", std)

    @property
    def n_ok(self) -> int:
        return sum(r.ok for r in self.per_fold)

    def business_summary(self) -> dict:
        rows = [r.business for r in self.per_fold if r.business is not None]
        out = {}
        for name in ("mae", "mse", "rmse"):
            out[f"mean_{name}"], out[f"std_{name}"] = _mean_std([getattr(r, name) for r in rows])
        return out

    def summary(self) -> dict:
        return {k: getattr(self, k) for k in
                ("mean_mae", "std_mae", "mean_mse", "std_mse", "mean_rmse", "std_rmse")}

    def to_csv(self, business: bool = False, header: bool = True) -> str:
        buf = io.StringIO()
        w = csv.writer(buf, lineterminator="\n")
        if header:
            w.writerow(["fold", "model", "mae", "mse", "rmse", "n"])
        name = self.model.family.value
        for r in self.per_fold:
            row = r.business if business else r.metrics
            if row is None:
                w.writerow([r.fold.fold_id, name, "", "", "", 0])
            else:
                w.writerow([r.fold.fold_id, name, repr(row.mae), repr(row.mse), repr(row.rmse),
                            row.n])
        return buf.getvalue()


def run_cv(series: StockSeries, spec: ModelSpec, folds: Sequence[FoldSpec],
           cal: CalendarSpec | None = None) -> CvReport:
    """Fit on each fold's training span, forecast its test window and score it."""
    spec = validate_spec(spec)
    results = []
    for fold in folds:
        test = series.between(fold.test_start, fold.test_end)
        try:
            train = series.between(series.index.start, fold.train_end)
            fitted = fit(spec, train, cal)
            forecast = predict(fitted, len(test))
        except ForecastError as exc:
            warnings.warn(f"fold {fold.fold_id} failed: {exc}", RuntimeWarning, stacklevel=2)
            results.append(FoldResult(fold, None, error=str(exc)))
            continue
        actual = test.values.astype(float)
        mask = business_day_mask(test.index, cal)
        business = compute_metrics(actual[mask], forecast.values[mask]) if mask.any() else None
        results.append(FoldResult(fold, compute_metrics(actual, forecast.values), business,
                                  actual, forecast.values.copy()))
        logger.info("%s fold %d rmse=%.3f", spec.family.value, fold.fold_id,
                    results[-1].metrics.rmse)
    if results and not any(r.ok for r in results):
        raise ForecastError(f"every fold failed for {spec.family.value}: {results[0].error}")
    return CvReport(spec, results)


# -- grid search ------------------------------------------------------------

def enumerate_grid(grid: Mapping[str, Sequence]) -> list:
    keys = list(grid)
    return [dict(zip(keys, combo)) for combo in itertools.product(*(grid[k] for k in keys))]


@dataclass
class LeaderboardEntry:
    rank: int
    config: dict
    report: CvReport | None
    mean_rmse: float
    mean_mae: float
    error: str | None = None


def _sort_key(entry: LeaderboardEntry):
    rmse = entry.mean_rmse if np.isfinite(entry.mean_rmse) else math.inf
    mae = entry.mean_mae if np.isfinite(entry.mean_mae) else math.inf
    return (rmse, mae, tuple(entry.config.values()))


def grid_search(series: StockSeries, family, grid: Mapping[str, Sequence], folds,
                base_params=None, seed: int = 0, cal: CalendarSpec | None = None,
                evaluate: Callable = run_cv) -> tuple:
    """Cross-validate every grid configuration and rank by mean RMSE.

    Ties are broken by mean MAE, then by the configuration values in grid
    order.  Returns ``(best_config, leaderboard)``.
    """
    family = ModelFamily.parse(family)
    configs = enumerate_grid(grid)
    if not configs:
        raise ValueError("grid is empty")
    base = base_params if base_params is not None else default_params(family)
    entries = []
    for combo in configs:
        params = replace(base, **combo) if base is not None else None
        spec = ModelSpec(family, params, seed)
        try:
            report = evaluate(series, spec, folds, cal)
            entries.append(LeaderboardEntry(0, combo, report, report.mean_rmse, report.mean_mae))
        except ForecastError as exc:
            entries.append(LeaderboardEntry(0, combo, None, math.inf, math.inf, str(exc)))
    entries.sort(key=_sort_key)
    for i, e in enumerate(entries, start=1):
        e.rank = i
    return entries[0].config, entries


def leaderboard_csv(entries: Sequence[LeaderboardEntry]) -> str:
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    keys = list(entries[0].config) if entries else []
    w.writerow(["rank", *keys, "mean_rmse", "std_rmse", "mean_mae", "std_mae", "mean_mse",
                "std_mse", "folds_ok"])
    for e in entries:
        r = e.report
        stats = ([r.mean_rmse, r.std_rmse, r.mean_mae, r.std_mae, r.mean_mse, r.std_mse, r.n_ok]
                 if r is not None else ["", "", "", "", "", "", 0])
        w.writerow([e.rank, *[e.config[k] for k in keys], *stats])
    return buf.getvalue()
