import math
import warnings
from dataclasses import dataclass

import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st
from hypothesis.extra.numpy import arrays

from conftest import make_series
from ecforecast.errors import ForecastError, InsufficientDataError
from ecforecast.evaluation import (
    LSTM_GRID,
    PROPHET_GRID,
    CvReport,
    FoldResult,
    compute_metrics,
    enumerate_grid,
    grid_search,
    leaderboard_csv,
    make_folds,
    run_cv,
    shift_months,
)
from ecforecast.models.arima import ArimaOrder
from ecforecast.models.base import ModelFamily, ModelSpec
from ecforecast.models.lstm import NetworkConfig
from ecforecast.series import TimeIndex, business_day_mask, make_hourly_index

STUDY = make_hourly_index("2022-01-01T00:00", "2024-04-14T00:00")


def test_identical_vectors_score_zero():
    row = compute_metrics([1.0, 2.0], [1.0, 2.0])
    assert (row.mae, row.mse, row.rmse, row.n) == (0.0, 0.0, 0.0, 2)


def test_hand_example():
    row = compute_metrics([0, 0], [3, 4])
    assert row.mae == 3.5 and row.mse == 12.5 and row.rmse == math.sqrt(12.5)


@given(arrays(float, st.integers(1, 50), elements=st.floats(-1e4, 1e4)), st.data())
def test_metric_identities(actual, data):
    predicted = data.draw(arrays(float, actual.size, elements=st.floats(-1e4, 1e4)))
    row = compute_metrics(actual, predicted)
    assert row.mae <= row.rmse * (1 + 1e-12) + 1e-12
    assert row.rmse**2 == pytest.approx(row.mse, rel=1e-12, abs=1e-12)


def test_metric_errors():
    with pytest.raises(ValueError):
        compute_metrics([1, 2], [1])
    with pytest.raises(ValueError):
        compute_metrics([], [])


def test_study_folds_by_calendar():
    folds = make_folds(STUDY)
    assert len(folds) == 5
    assert folds[0].test_start == np.datetime64("2024-04-07T00", "h")
    assert folds[0].test_end == np.datetime64("2024-04-13T23", "h")
    assert folds[1].test_end == np.datetime64("2024-03-13T23", "h")
    assert folds[1].test_start == np.datetime64("2024-03-07T00", "h")
    assert [f.test_end for f in folds[2:]] == [np.datetime64(d, "h") for d in
                                               ("2024-02-13T23", "2024-01-13T23", "2023-12-13T23")]
    for f in folds:
        assert len(f.test_index) == 168 and f.train_end < f.test_start
        assert business_day_mask(f.test_index).sum() >= 120


@pytest.mark.parametrize("ts,months,expected", [
    ("2024-03-31T23", -1, "2024-02-29T23"),
    ("2023-03-31T05", -1, "2023-02-28T05"),
    ("2024-01-15T00", -2, "2023-11-15T00"),
    ("2023-12-31T00", 2, "2024-02-29T00"),
])
def test_month_shift_clamps_day(ts, months, expected):
    assert shift_months(np.datetime64(ts, "h"), months) == np.datetime64(expected, "h")


def test_not_enough_history_names_the_span():
    with pytest.raises(InsufficientDataError, match="before"):
        make_folds(TimeIndex(np.datetime64("2024-03-01T00", "h"), 24 * 60))


def test_naive_on_constant_series_scores_zero():
    s = make_series(np.full(24 * 120, 77), start="2024-01-01T00")
    report = run_cv(s, ModelSpec(ModelFamily.NAIVE), make_folds(s.index, 3))
    assert report.mean_rmse == report.std_rmse == report.mean_mae == 0.0
    assert all(r.business.n == 120 for r in report.per_fold)


def test_single_fold_has_zero_std():
    rng = np.random.default_rng(0)
    s = make_series(rng.integers(0, 500, 24 * 40), start="2024-01-01T00")
    report = run_cv(s, ModelSpec(ModelFamily.NAIVE), make_folds(s.index, 1))
    assert report.std_rmse == 0.0 and report.mean_rmse > 0


def test_aggregates_match_per_fold_rows():
    rng = np.random.default_rng(1)
    s = make_series(rng.integers(0, 500, 24 * 150), start="2023-11-01T00")
    report = run_cv(s, ModelSpec(ModelFamily.NAIVE), make_folds(s.index, 4))
    rmse = [r.metrics.rmse for r in report.per_fold]
    assert report.mean_rmse == pytest.approx(np.mean(rmse), abs=1e-12)
    assert report.std_rmse == pytest.approx(np.std(rmse, ddof=1), abs=1e-12)
    naive_err = [np.abs(r.actual - r.predicted) for r in report.per_fold]
    for r, err in zip(report.per_fold, naive_err):
        last = s.between(s.index.start, r.fold.train_end).values[-1]
        assert np.array_equal(err, np.abs(r.actual - last))


def test_failed_fold_is_skipped_with_warning():
    rng = np.random.default_rng(2)
    s = make_series(rng.integers(1, 500, 24 * 70), start="2024-01-01T00")
    folds = make_folds(s.index, 2)
    spec = ModelSpec(ModelFamily.LSTM, NetworkConfig(timesteps=700, hidden=1, layers=1, epochs=1,
                                                      batch_size=256))
    with pytest.warns(RuntimeWarning, match="fold 1"):
        report = run_cv(s, spec, folds)
    assert report.n_ok == 1 and not report.per_fold[1].ok
    assert report.to_csv().splitlines()[2] == "1,lstm,,,,0"


def test_all_folds_failed_is_error():
    spec = ModelSpec(ModelFamily.ARIMA, ArimaOrder(20, 1, 20))
    short = make_series(np.arange(200) % 7 + 1, start="2024-01-01T00")
    with warnings.catch_warnings():
        warnings.simplefilter("ignore")
        with pytest.raises(ForecastError):
            run_cv(short, spec, make_folds(short.index, 1))


def test_search_grid_sizes():
    assert len(enumerate_grid(PROPHET_GRID)) == 32
    assert len(enumerate_grid(LSTM_GRID)) == 150
    assert len({tuple(c.items()) for c in enumerate_grid(LSTM_GRID)}) == 150


@dataclass
class _Stub:
    mean_rmse: float
    mean_mae: float


def test_grid_search_returns_planted_minimum():
    grid = {"timesteps": [60, 80, 100, 150, 200], "epochs": [50, 100, 120, 150, 200],
            "layers": [2, 3, 4, 5, 8, 10]}

    def surface(series, spec, folds, cal):
        p = spec.params
        rmse = (p.timesteps - 100) ** 2 / 100 + (p.epochs - 150) ** 2 / 50 + (p.layers - 4) ** 2
        return _Stub(rmse + 3.0, rmse / 2 + 1.0)

    best, board = grid_search(None, "lstm", grid, [], evaluate=surface)
    assert best == {"timesteps": 100, "epochs": 150, "layers": 4}
    assert [e.rank for e in board] == list(range(1, 151))
    assert board[0].mean_rmse == 3.0
    assert all(a.mean_rmse <= b.mean_rmse for a, b in zip(board, board[1:]))


def test_grid_search_ties_broken_by_mae_then_order():
    grid = {"changepoint_prior_scale": [0.1, 0.5], "seasonality_prior_scale": [1.0, 10.0]}

    def flat(series, spec, folds, cal):
        mae = 2.0 if spec.params.seasonality_prior_scale == 10.0 else 1.0
        return _Stub(5.0, mae)

    best, board = grid_search(None, "prophet", grid, [], evaluate=flat)
    assert best == {"changepoint_prior_scale": 0.1, "seasonality_prior_scale": 1.0}


def test_grid_search_ranks_failures_last():
    def picky(series, spec, folds, cal):
        if spec.params.layers == 3:
            raise ForecastError("diverged")
        return _Stub(float(spec.params.layers), 0.0)

    best, board = grid_search(None, "lstm", {"layers": [3, 2, 4]}, [], evaluate=picky)
    assert best == {"layers": 2} and board[-1].error == "diverged"


def test_leaderboard_csv_has_one_row_per_config():
    rng = np.random.default_rng(3)
    s = make_series(rng.integers(0, 50, 24 * 50), start="2024-01-01T00")
    folds = make_folds(s.index, 1)
    _, board = grid_search(s, "arima", {"q": [0, 1]}, folds, base_params=ArimaOrder(1, 1, 0))
    text = leaderboard_csv(board)
    assert text.splitlines()[0].startswith("rank,q,mean_rmse")
    assert len(text.splitlines()) == 3


def test_business_summary_uses_weekday_rows():
    fold = make_folds(STUDY, 1)[0]
    row = compute_metrics([1.0], [2.0])
    report = CvReport(ModelSpec(ModelFamily.NAIVE), [FoldResult(fold, row, row)])
    assert report.business_summary()["mean_mae"] == 1.0
