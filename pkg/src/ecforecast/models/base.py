"""Shared model types: the model specification and the forecast result."""

from __future__ import annotations

import enum
from dataclasses import dataclass, field
from typing import Any

import numpy as np

from ..errors import ConfigurationError
from ..series import (
    HOUR,
    CalendarSpec,
    ContainerCategory,
    TimeIndex,
    business_day_mask,
    format_timestamp,
)


class ModelFamily(enum.Enum):
    NAIVE = "naive"
    ARIMA = "arima"
    DECOMPOSABLE = "decomposable"
    LSTM = "lstm"

    @classmethod
    def parse(cls, value) -> "ModelFamily":
        if isinstance(value, cls):
            return value
        text = str(value).strip().lower()
        if text == "prophet":
            return cls.DECOMPOSABLE
        try:
            return cls(text)
        except ValueError:
            raise ConfigurationError(f"unknown model family {value!r}") from None


@dataclass(frozen=True)
class ModelSpec:
    family: ModelFamily
    params: Any = None
    seed: int = 0

    def __post_init__(self):
        object.__setattr__(self, "family", ModelFamily.parse(self.family))


@dataclass(frozen=True, eq=False)
class ForecastResult:
    """Hourly point forecasts starting one hour after ``origin``."""

    origin: np.datetime64
    values: np.ndarray
    model: ModelSpec
    category: ContainerCategory = ContainerCategory.STANDARD
    business_day: np.ndarray | None = field(default=None)

    def __post_init__(self):
        values = np.maximum(np.asarray(self.values, dtype=float), 0.0)
        values.setflags(write=False)
        object.__setattr__(self, "values", values)
        object.__setattr__(self, "origin", np.datetime64(self.origin, "h"))
        object.__setattr__(self, "category", ContainerCategory.parse(self.category))

    @property
    def horizon_hours(self) -> int:
        return int(self.values.size)

    @property
    def index(self) -> TimeIndex:
        return TimeIndex(self.origin + HOUR, self.horizon_hours)

    @property
    def timestamps(self) -> np.ndarray:
        return self.index.timestamps

    @property
    def points(self) -> list:
        return list(zip(self.timestamps, self.values))

    def with_calendar(self, cal: CalendarSpec | None) -> "ForecastResult":
        return ForecastResult(self.origin, self.values, self.model, self.category,
                              business_day_mask(self.index, cal))

    def to_dict(self) -> dict:
        points = []
        flags = self.business_day
        for i, (ts, v) in enumerate(self.points):
            point = {"ts": format_timestamp(ts), "mean": float(v)}
            if flags is not None:
                point["business_day"] = bool(flags[i])
            points.append(point)
        out = {
            "origin": format_timestamp(self.origin),
            "category": self.category.value,
            "model": self.model.family.value,
            "horizon_hours": self.horizon_hours,
            "points": points,
        }
        if flags is not None:
            out["business_hours"] = int(np.count_nonzero(flags))
        return out
