"""Hourly time index, business-day calendar and the stock-series container."""

from __future__ import annotations

import csv
import enum
import io
from dataclasses import dataclass, field
from datetime import date, datetime, timezone
from typing import Iterable, Mapping

import numpy as np

from .errors import FormatError, InvalidCutError, InvalidRangeError, ParseError

HOUR = np.timedelta64(1, "h")


class ContainerCategory(enum.Enum):
    STANDARD = "standard"
    SPECIAL = "special"
    REEFER = "reefer"
    UNKNOWN = "unknown"

    @classmethod
    def parse(cls, value: "str | ContainerCategory") -> "ContainerCategory":
        if isinstance(value, cls):
            return value
        try:
            return cls(str(value).strip().lower())
        except ValueError:
            raise ValueError(f"unknown container category {value!r}") from None


def to_datetime64(ts) -> np.datetime64:
    """Convert a timestamp-like value to a naive UTC ``datetime64[s]``.

    Aware datetimes are converted to UTC; naive datetimes and strings without
    an offset are taken to already be UTC.
    """
    if isinstance(ts, np.datetime64):
        return ts.astype("datetime64[s]")
    if isinstance(ts, str):
        text = ts.strip()
        if text.endswith("Z"):
            text = text[:-1] + "+00:00"
        ts = datetime.fromisoformat(text)
    if isinstance(ts, datetime):
        if ts.tzinfo is not None:
            ts = ts.astimezone(timezone.utc).replace(tzinfo=None)
        return np.datetime64(ts, "s")
    if isinstance(ts, date):
        return np.datetime64(ts, "D").astype("datetime64[s]")
    raise TypeError(f"cannot interpret {ts!r} as a timestamp")


def floor_hour(ts) -> np.datetime64:
    return to_datetime64(ts).astype("datetime64[h]")


def format_timestamp(ts) -> str:
    """ISO-8601 with a ``Z`` suffix, to the second."""
    return str(np.datetime64(ts, "s")) + "Z"


@dataclass(frozen=True)
class TimeIndex:
    """Contiguous hourly grid starting at ``start`` (UTC)."""

    start: np.datetime64
    length: int

    def __post_init__(self):
        start = np.datetime64(self.start)
        if start.astype("datetime64[h]") != start:
            raise InvalidRangeError(f"index start {start} is not on an hour boundary")
        object.__setattr__(self, "start", start.astype("datetime64[h]"))
        if int(self.length) < 1:
            raise InvalidRangeError("index length must be >= 1")
        object.__setattr__(self, "length", int(self.length))

    def __len__(self) -> int:
        return self.length

    @property
    def end(self) -> np.datetime64:
        """Last timestamp in the index (inclusive)."""
        return self.start + (self.length - 1) * HOUR

    @property
    def timestamps(self) -> np.ndarray:
        return self.start + np.arange(self.length) * HOUR

    def position(self, ts) -> int:
        """Integer offset of ``ts`` from ``start`` (may fall outside the index)."""
        return int((floor_hour(ts) - self.start) / HOUR)

    def slice(self, lo: int, hi: int) -> "TimeIndex":
        return TimeIndex(self.start + lo * HOUR, hi - lo)

    def after(self, horizon_hours: int) -> "TimeIndex":
        """The ``horizon_hours`` hours immediately following this index."""
        return TimeIndex(self.end + HOUR, horizon_hours)


def make_hourly_index(start, end) -> TimeIndex:
    """Hourly index covering ``[start, end)`` after truncating both to the hour."""
    s, e = floor_hour(start), floor_hour(end)
    if s >= e:
        raise InvalidRangeError(f"start {s} must precede end {e}")
    return TimeIndex(s, int((e - s) / HOUR))


@dataclass(frozen=True, eq=False)
class CalendarSpec:
    """Weekend weekdays (Monday=0) and named holiday date sets."""

    weekend_days: frozenset = frozenset({5, 6})
    holidays: Mapping[str, frozenset] = field(default_factory=dict)

    def __post_init__(self):
        weekend = frozenset(int(d) for d in self.weekend_days)
        if not weekend <= set(range(7)):
            raise ValueError(f"weekend days must be weekdays 0..6, got {sorted(weekend)}")
        object.__setattr__(self, "weekend_days", weekend)
        named = {str(k): frozenset(v) for k, v in dict(self.holidays).items()}
        seen: set = set()
        for name, dates in named.items():
            dup = seen & dates
            if dup:
                raise ValueError(f"holiday {name!r} repeats dates {sorted(dup)}")
            seen |= dates
        object.__setattr__(self, "holidays", named)

    @classmethod
    def from_dates(cls, dates: Iterable[date], weekend_days=frozenset({5, 6})) -> "CalendarSpec":
        """One holiday per date, named by its ISO date."""
        return cls(weekend_days, {d.isoformat(): frozenset([d]) for d in sorted(set(dates))})

    @property
    def holiday_dates(self) -> frozenset:
        out: set = set()
        for dates in self.holidays.values():
            out |= dates
        return frozenset(out)

    def __eq__(self, other):
        if not isinstance(other, CalendarSpec):
            return NotImplemented
        return self.weekend_days == other.weekend_days and self.holidays == other.holidays


def _day_numbers(timestamps: np.ndarray) -> np.ndarray:
    return timestamps.astype("datetime64[D]").astype(np.int64)


def date_mask(timestamps: np.ndarray, dates: Iterable[date]) -> np.ndarray:
    """True where the timestamp's calendar date is in ``dates``."""
    days = np.array([np.datetime64(d, "D").astype(np.int64) for d in dates], dtype=np.int64)
    return np.isin(_day_numbers(timestamps), days)


def business_day_mask(index: TimeIndex, cal: CalendarSpec | None = None) -> np.ndarray:
    cal = cal or CalendarSpec()
    ts = index.timestamps
    # 1970-01-01 was a Thursday (weekday 3)
    weekday = (_day_numbers(ts) + 3) % 7
    weekend = np.isin(weekday, sorted(cal.weekend_days))
    return ~weekend & ~date_mask(ts, cal.holiday_dates)


def business_horizon_hours(origin, days: int, cal: CalendarSpec | None = None) -> int:
    """Hours after ``origin`` needed to cover ``days`` full business days of hours."""
    if days < 1:
        raise ValueError("days must be >= 1")
    start = floor_hour(origin) + HOUR
    need = 24 * days
    span = 7 * days + 14
    while True:
        mask = business_day_mask(TimeIndex(start, span * 24), cal)
        hits = np.flatnonzero(np.cumsum(mask) == need)
        if hits.size:
            return int(hits[0]) + 1
        span *= 2


@dataclass(frozen=True, eq=False)
class StockSeries:
    """Hourly empty-container counts for one category."""

    index: TimeIndex
    values: np.ndarray
    category: ContainerCategory = ContainerCategory.STANDARD

    def __post_init__(self):
        values = np.array(self.values, dtype=np.int64)
        if values.ndim != 1 or values.size != self.index.length:
            raise ValueError(
                f"values length {values.size} does not match index length {self.index.length}"
            )
        if np.any(values < 0):
            raise ValueError("stock counts must be non-negative")
        values.setflags(write=False)
        object.__setattr__(self, "values", values)
        object.__setattr__(self, "category", ContainerCategory.parse(self.category))

    def __len__(self) -> int:
        return self.index.length

    def __eq__(self, other):
        if not isinstance(other, StockSeries):
            return NotImplemented
        return (
            self.index == other.index
            and self.category == other.category
            and np.array_equal(self.values, other.values)
        )

    @property
    def timestamps(self) -> np.ndarray:
        return self.index.timestamps

    @property
    def origin(self) -> np.datetime64:
        return self.index.end

    def window(self, lo: int, hi: int) -> "StockSeries":
        return StockSeries(self.index.slice(lo, hi), self.values[lo:hi], self.category)

    def between(self, first, last) -> "StockSeries":
        """Sub-series with timestamps in ``[first, last]``."""
        lo, hi = self.index.position(first), self.index.position(last) + 1
        if lo < 0 or hi > len(self) or lo >= hi:
            raise InvalidRangeError(f"[{first}, {last}] is not inside the series")
        return self.window(lo, hi)

    def to_csv(self) -> str:
        buf = io.StringIO()
        w = csv.writer(buf, lineterminator="\n")
        w.writerow(["timestamp", "category", "count"])
        cat = self.category.value
        for ts, v in zip(self.timestamps, self.values):
            w.writerow([format_timestamp(ts), cat, int(v)])
        return buf.getvalue()

    @classmethod
    def from_csv(cls, text: str) -> "StockSeries":
        rows = list(csv.reader(io.StringIO(text)))
        if not rows or [c.strip() for c in rows[0]] != ["timestamp", "category", "count"]:
            raise FormatError("series CSV must start with header timestamp,category,count")
        body = [r for r in rows[1:] if r]
        if not body:
            raise FormatError("series CSV has no rows")
        stamps, counts = [], []
        for lineno, row in enumerate(body, start=2):
            try:
                stamps.append(floor_hour(row[0]))
                counts.append(int(row[2]))
            except (ValueError, IndexError) as exc:
                raise ParseError(str(exc), line=lineno) from exc
        stamps = np.array(stamps)
        if np.any(np.diff(stamps) != HOUR):
            raise FormatError("series timestamps must be contiguous and hourly")
        return cls(TimeIndex(stamps[0], len(stamps)), np.array(counts), body[0][1])


def split_at(series: StockSeries, cut) -> tuple[StockSeries, StockSeries]:
    """Partition into ``[start, cut]`` and ``(cut, end]``."""
    pos = series.index.position(cut)
    if to_datetime64(cut) != floor_hour(cut):
        raise InvalidCutError(f"cut {cut} is not on an hour boundary")
    if pos < 0 or pos >= len(series) - 1:
        raise InvalidCutError(
            f"cut {cut} must lie inside the series and leave a non-empty test part"
        )
    return series.window(0, pos + 1), series.window(pos + 1, len(series))


def concat(first: StockSeries, second: StockSeries) -> StockSeries:
    if first.index.end + HOUR != second.index.start or first.category != second.category:
        raise ValueError("series are not adjacent pieces of the same category")
    return StockSeries(
        TimeIndex(first.index.start, len(first) + len(second)),
        np.concatenate([first.values, second.values]),
        first.category,
    )
