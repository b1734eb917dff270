"""Gate-event log parsing, ISO 6346 classification and hourly stock aggregation."""

from __future__ import annotations

import csv
import enum
import io
from dataclasses import dataclass
from datetime import datetime
from typing import IO, Iterable, Sequence
from zoneinfo import ZoneInfo

import numpy as np

from .errors import FormatError, ParseError
from .series import (
    ContainerCategory,
    StockSeries,
    TimeIndex,
    format_timestamp,
    to_datetime64,
)

__all__ = [
    "CargoStatus",
    "ClassificationTable",
    "ContainerCategory",
    "DEFAULT_TABLE",
    "EventLog",
    "GateEvent",
    "LOG_COLUMNS",
    "build_stock_series",
    "classify_container",
    "parse_event_log",
]

LOG_COLUMNS = ("container_id", "shipping_line", "iso_code", "cargo_status", "gate_in", "gate_out")


class CargoStatus(enum.Enum):
    EMPTY = "EMPTY"
    FULL = "FULL"


@dataclass(frozen=True)
class GateEvent:
    container_id: str
    shipping_line: str
    iso_code: str
    cargo_status: CargoStatus
    gate_in: np.datetime64
    gate_out: np.datetime64 | None = None

    def __post_init__(self):
        if len(self.iso_code) != 4:
            raise ValueError(f"ISO code {self.iso_code!r} must have 4 characters")
        object.__setattr__(self, "cargo_status", CargoStatus(self.cargo_status))
        object.__setattr__(self, "gate_in", to_datetime64(self.gate_in))
        if self.gate_out is not None:
            out = to_datetime64(self.gate_out)
            if out < self.gate_in:
                raise ValueError(f"gate_out {out} precedes gate_in {self.gate_in}")
            object.__setattr__(self, "gate_out", out)

    @property
    def dwell(self) -> np.timedelta64 | None:
        if self.gate_out is None:
            return None
        return self.gate_out - self.gate_in


@dataclass(frozen=True)
class EventLog:
    events: tuple
    observation_end: np.datetime64

    def __post_init__(self):
        object.__setattr__(self, "events", tuple(self.events))
        end = to_datetime64(self.observation_end)
        object.__setattr__(self, "observation_end", end)
        late = [e.container_id for e in self.events if e.gate_in > end]
        if late:
            raise ValueError(f"events enter after observation end: {late[:5]}")

    def __len__(self) -> int:
        return len(self.events)

    def to_csv(self) -> str:
        buf = io.StringIO()
        w = csv.writer(buf, lineterminator="\n")
        w.writerow(LOG_COLUMNS)
        for e in self.events:
            w.writerow([
                e.container_id,
                e.shipping_line,
                e.iso_code,
                e.cargo_status.value,
                format_timestamp(e.gate_in),
                "" if e.gate_out is None else format_timestamp(e.gate_out),
            ])
        return buf.getvalue()


@dataclass(frozen=True)
class ClassificationTable:
    """Ordered ``(type-letter set, category)`` rules; first match wins.

    Rules key on the ISO 6346 type letter (third character of the code).
    Codes matching no rule fall through to UNKNOWN.
    """

    rules: tuple

    def classify(self, iso_code: str) -> ContainerCategory:
        letter = iso_code[2:3].upper()
        for letters, category in self.rules:
            if letter in letters:
                return category
        return ContainerCategory.UNKNOWN


DEFAULT_TABLE = ClassificationTable((
    (frozenset("GVB"), ContainerCategory.STANDARD),
    (frozenset("RH"), ContainerCategory.REEFER),
    (frozenset("TPUS"), ContainerCategory.SPECIAL),
))


def classify_container(iso_code: str, table: ClassificationTable = DEFAULT_TABLE) -> ContainerCategory:
    if len(iso_code) != 4:
        raise ValueError(f"ISO code {iso_code!r} must have 4 characters")
    return table.classify(iso_code)


def _parse_local(text: str, tz: ZoneInfo) -> np.datetime64:
    text = text.strip()
    if text.endswith("Z"):
        text = text[:-1] + "+00:00"
    ts = datetime.fromisoformat(text)
    if ts.tzinfo is None:
        ts = ts.replace(tzinfo=tz)
    return to_datetime64(ts)


def parse_event_log(source: IO | str | bytes, tz: str = "UTC", observation_end=None) -> EventLog:
    """Read a gate-event CSV into an :class:`EventLog`.

    Zoneless timestamps are interpreted in ``tz`` and converted to UTC.
    ``observation_end`` defaults to the latest timestamp in the file.
    """
    if isinstance(source, bytes):
        source = source.decode("utf-8")
    if isinstance(source, str):
        source = io.StringIO(source)
    elif hasattr(source, "mode") and "b" in getattr(source, "mode", ""):
        source = io.TextIOWrapper(source, encoding="utf-8")
    zone = ZoneInfo(tz)
    reader = csv.DictReader(source)
    header = [h.strip() for h in (reader.fieldnames or [])]
    missing = [c for c in LOG_COLUMNS if c not in header]
    if missing:
        raise FormatError(f"event log is missing required columns: {', '.join(missing)}")
    reader.fieldnames = header

    events = []
    latest = None
    for row in reader:
        line = reader.line_num
        try:
            gate_in = _parse_local(row["gate_in"], zone)
            out_text = (row["gate_out"] or "").strip()
            gate_out = _parse_local(out_text, zone) if out_text else None
            event = GateEvent(
                container_id=row["container_id"].strip(),
                shipping_line=row["shipping_line"].strip(),
                iso_code=row["iso_code"].strip(),
                cargo_status=row["cargo_status"].strip().upper(),
                gate_in=gate_in,
                gate_out=gate_out,
            )
        except (ValueError, TypeError, AttributeError) as exc:
            raise ParseError(str(exc), line=line) from exc
        events.append(event)
        for ts in (event.gate_in, event.gate_out):
            if ts is not None and (latest is None or ts > latest):
                latest = ts
    if observation_end is None:
        if latest is None:
            raise FormatError("event log has no rows and no observation end was given")
        observation_end = latest
    return EventLog(tuple(events), observation_end)


def _hour_ceil_offsets(stamps: np.ndarray, origin: np.datetime64) -> np.ndarray:
    """Offset in hours from ``origin`` of the first hour boundary >= each stamp."""
    secs = (stamps - origin.astype("datetime64[s]")).astype(np.int64)
    return -(-secs // 3600)


def build_stock_series(
    log: EventLog,
    category: ContainerCategory,
    index: TimeIndex,
    table: ClassificationTable = DEFAULT_TABLE,
) -> StockSeries:
    """Count empty containers of ``category`` present at each hour boundary.

    A container counts at hour ``h`` iff ``gate_in <= h < gate_out``; one with
    no gate-out counts through the end of the index.
    """
    category = ContainerCategory.parse(category)
    n = index.length
    selected = [
        e for e in log.events
        if e.cargo_status is CargoStatus.EMPTY and table.classify(e.iso_code) is category
    ]
    diff = np.zeros(n + 1, dtype=np.int64)
    if selected:
        gate_in = np.array([e.gate_in for e in selected], dtype="datetime64[s]")
        far = np.datetime64(index.end + np.timedelta64(1, "h"), "s")
        gate_out = np.array(
            [far if e.gate_out is None else e.gate_out for e in selected], dtype="datetime64[s]"
        )
        lo = np.clip(_hour_ceil_offsets(gate_in, index.start), 0, n)
        hi = np.clip(_hour_ceil_offsets(gate_out, index.start), 0, n)
        keep = hi > lo
        np.add.at(diff, lo[keep], 1)
        np.add.at(diff, hi[keep], -1)
    return StockSeries(index, np.cumsum(diff[:n]), category)


def category_totals(log: EventLog, index: TimeIndex, table: ClassificationTable = DEFAULT_TABLE,
                    categories: Sequence[ContainerCategory] | None = None) -> dict:
    cats: Iterable = categories or list(ContainerCategory)
    return {c: build_stock_series(log, c, index, table) for c in cats}
