"""Hourly empty-container stock forecasting for port terminals."""

from .errors import ForecastError
from .evaluation import compute_metrics, grid_search, make_folds, run_cv
from .forecaster import fit, naive_forecast, predict, tuned_spec
from .ingest import build_stock_series, parse_event_log
from .models.base import ForecastResult, ModelFamily, ModelSpec
from .series import CalendarSpec, ContainerCategory, StockSeries, TimeIndex, make_hourly_index
from .synth import REFERENCE_SPEC, SynthSpec, generate_event_log, generate_series

__version__ = "0.1.0"

__all__ = [
    "CalendarSpec", "ContainerCategory", "ForecastError", "ForecastResult", "ModelFamily",
    "ModelSpec", "REFERENCE_SPEC", "StockSeries", "SynthSpec", "TimeIndex",
    "build_stock_series", "compute_metrics", "fit", "generate_event_log", "generate_series",
    "grid_search", "make_folds", "make_hourly_index", "naive_forecast", "tuned_spec",
    "parse_event_log", "predict", "run_cv",
]
