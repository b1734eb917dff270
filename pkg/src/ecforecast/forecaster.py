"""Uniform fit/predict entry points over all model families, plus the naive baseline."""

from __future__ import annotations

import json
from dataclasses import dataclass, replace

import numpy as np

from .errors import ConfigurationError, InsufficientDataError
from .models.arima import ArimaFit, ArimaOrder, fit_arima
from .models.base import ForecastResult, ModelFamily, ModelSpec
from .models.decomposable import (
    TUNED_CONFIG,
    DecomposableConfig,
    DecomposableFit,
    fit_decomposable,
)
from .models.decomposable import min_length as decomposable_min_length
from .models.lstm import TUNED_NETWORK, LstmFit, NetworkConfig, train
from .series import CalendarSpec, ContainerCategory, StockSeries, business_horizon_hours

DEFAULT_HORIZON = 168


@dataclass(frozen=True)
class NaiveFit:
    last_value: float
    origin: np.datetime64
    category: ContainerCategory = ContainerCategory.STANDARD
    seed: int = 0

    @property
    def spec(self) -> ModelSpec:
        return ModelSpec(ModelFamily.NAIVE, None, self.seed)

    def predict_values(self, horizon_hours: int) -> np.ndarray:
        return np.full(horizon_hours, self.last_value, dtype=float)

    def to_dict(self) -> dict:
        return {"last_value": self.last_value, "origin": str(self.origin),
                "category": self.category.value, "seed": self.seed}

    @classmethod
    def from_dict(cls, d: dict) -> "NaiveFit":
        return cls(float(d["last_value"]), np.datetime64(d["origin"], "h"),
                   ContainerCategory.parse(d["category"]), d.get("seed", 0))


def naive_forecast(series: StockSeries, horizon_hours: int = DEFAULT_HORIZON) -> ForecastResult:
    """Repeat the last observation over the whole horizon."""
    if len(series.values) == 0:
        raise InsufficientDataError("naive forecast needs at least one observation")
    if horizon_hours < 1:
        raise ValueError("horizon must be at least one hour")
    fit_ = NaiveFit(float(series.values[-1]), series.origin, series.category)
    return ForecastResult(series.origin, fit_.predict_values(horizon_hours), fit_.spec,
                          series.category)


def default_params(family) -> object:
    family = ModelFamily.parse(family)
    return {
        ModelFamily.NAIVE: None,
        ModelFamily.ARIMA: ArimaOrder(),
        ModelFamily.DECOMPOSABLE: DecomposableConfig(),
        ModelFamily.LSTM: NetworkConfig(),
    }[family]


def tuned_spec(family, seed: int = 0) -> ModelSpec:
    """Configuration reported as optimal for each family."""
    family = ModelFamily.parse(family)
    params = {
        ModelFamily.NAIVE: None,
        ModelFamily.ARIMA: ArimaOrder(2, 1, 5),
        ModelFamily.DECOMPOSABLE: TUNED_CONFIG,
        ModelFamily.LSTM: TUNED_NETWORK,
    }[family]
    return ModelSpec(family, params, seed)


_PARAM_TYPES = {
    ModelFamily.ARIMA: ArimaOrder,
    ModelFamily.DECOMPOSABLE: DecomposableConfig,
    ModelFamily.LSTM: NetworkConfig,
}


def validate_spec(spec: ModelSpec) -> ModelSpec:
    try:
        family = ModelFamily.parse(spec.family)
    except ValueError:
        raise ConfigurationError(f"unknown model family {spec.family!r}") from None
    params = spec.params
    if family is ModelFamily.NAIVE:
        return ModelSpec(family, None, spec.seed)
    if params is None:
        params = default_params(family)
    if isinstance(params, dict):
        try:
            params = _PARAM_TYPES[family](**params)
        except (TypeError, ValueError) as exc:
            raise ConfigurationError(f"invalid {family.value} parameters: {exc}") from exc
    if not isinstance(params, _PARAM_TYPES[family]):
        raise ConfigurationError(
            f"{family.value} needs {_PARAM_TYPES[family].__name__}, got {type(params).__name__}")
    return ModelSpec(family, params, spec.seed)


def minimum_length(spec: ModelSpec, cal: CalendarSpec | None = None) -> int:
    spec = validate_spec(spec)
    if spec.family is ModelFamily.NAIVE:
        return 1
    if spec.family is ModelFamily.ARIMA:
        return spec.params.min_length
    if spec.family is ModelFamily.LSTM:
        return spec.params.min_length
    return decomposable_min_length(spec.params, cal)


def fit(spec: ModelSpec, series: StockSeries, cal: CalendarSpec | None = None):
    """Fit the family named by ``spec`` on ``series`` and return its fit artifact."""
    spec = validate_spec(spec)
    need = minimum_length(spec, cal)
    if len(series) < need:
        raise InsufficientDataError(
            f"{spec.family.value} needs at least {need} hourly points, got {len(series)}")
    if spec.family is ModelFamily.NAIVE:
        return NaiveFit(float(series.values[-1]), series.origin, series.category, spec.seed)
    if spec.family is ModelFamily.ARIMA:
        return fit_arima(series, spec.params, seed=spec.seed)
    if spec.family is ModelFamily.DECOMPOSABLE:
        return fit_decomposable(series, spec.params, cal, seed=spec.seed)
    return train(series, replace(spec.params, seed=spec.seed))


FIT_TYPES = {
    ModelFamily.NAIVE: NaiveFit,
    ModelFamily.ARIMA: ArimaFit,
    ModelFamily.DECOMPOSABLE: DecomposableFit,
    ModelFamily.LSTM: LstmFit,
}


def family_of(fit_) -> ModelFamily:
    for family, cls in FIT_TYPES.items():
        if isinstance(fit_, cls):
            return family
    raise ConfigurationError(f"not a fit artifact: {type(fit_).__name__}")


def predict(fit_, horizon_hours: int = DEFAULT_HORIZON) -> ForecastResult:
    """Forecast ``horizon_hours`` hours past the end of the training series."""
    if horizon_hours < 1:
        raise ValueError("horizon must be at least one hour")
    family_of(fit_)
    values = fit_.predict_values(horizon_hours)
    return ForecastResult(fit_.origin, values, fit_.spec, fit_.category)


def forecast_business_days(fit_, days: int, cal: CalendarSpec | None = None) -> ForecastResult:
    """Hourly forecast long enough to cover ``days`` business days, with day flags."""
    horizon = business_horizon_hours(fit_.origin, days, cal)
    return predict(fit_, horizon).with_calendar(cal)


def forecast_json(result: ForecastResult) -> str:
    """Canonical JSON text for a forecast, shared by the CLI and the HTTP service."""
    return json.dumps(result.to_dict(), sort_keys=True, indent=1)
