"""Seeded synthetic stock series and gate-event logs."""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .ingest import CargoStatus, EventLog, GateEvent
from .series import ContainerCategory, StockSeries, make_hourly_index, to_datetime64

YEAR_HOURS = 8766.0
WEEK_HOURS = 168.0
DAY_HOURS = 24.0

ISO_CODES = {
    ContainerCategory.STANDARD: ("22G1", "45G1", "42G1", "22V0", "45B3"),
    ContainerCategory.REEFER: ("22R1", "45R1", "42R1"),
    ContainerCategory.SPECIAL: ("22T0", "22P1", "45P3", "22U1", "45U1"),
}
SHIPPING_LINES = ("MSC", "MAERSK", "CMA", "COSCO", "HAPAG", "ONE", "EVERGREEN")


@dataclass(frozen=True)
class SynthSpec:
    start: object = "2022-01-01T00:00"
    end: object = "2024-04-14T00:00"
    base_level: float = 400.0
    trend_per_hour: float = 0.0
    yearly_amp: float = 0.0
    weekly_amp: float = 0.0
    daily_amp: float = 0.0
    ar1_phi: float = 0.0
    noise_sigma: float = 0.0
    seed: int = 0
    category: ContainerCategory = ContainerCategory.STANDARD

    def __post_init__(self):
        if to_datetime64(self.end) <= to_datetime64(self.start):
            raise ValueError("end must be after start")
        if self.base_level < 0 or self.noise_sigma < 0:
            raise ValueError("base_level and noise_sigma must be non-negative")
        if not -1 < self.ar1_phi < 1:
            raise ValueError("ar1_phi must lie in (-1, 1)")


# Stand-in for the terminal data: 2022-01-01 .. 2024-04-13 23:00, hourly.
# The daily gate rhythm dominates, with a weaker weekly cycle, a slow yearly
# swing and persistent AR(1) disturbances (stationary sd about 11.5).
REFERENCE_SPEC = SynthSpec(
    base_level=420.0,
    trend_per_hour=0.002,
    yearly_amp=60.0,
    weekly_amp=20.0,
    daily_amp=60.0,
    ar1_phi=0.9,
    noise_sigma=5.0,
    seed=2024,
)


def _cycles(spec: SynthSpec):
    return ((spec.yearly_amp, YEAR_HOURS), (spec.weekly_amp, WEEK_HOURS),
            (spec.daily_amp, DAY_HOURS))


def expected_level(spec: SynthSpec, hours=None) -> np.ndarray:
    """Deterministic part of the stock level (no noise, no rounding).

    ``hours`` are offsets from ``spec.start``; by default every index hour.
    """
    if hours is None:
        hours = np.arange(make_hourly_index(spec.start, spec.end).length, dtype=float)
    t = np.asarray(hours, dtype=float)
    level = spec.base_level + spec.trend_per_hour * t
    for amp, period in _cycles(spec):
        level = level + amp * np.sin(2 * np.pi * t / period)
    return level


def level_slope(spec: SynthSpec, hours) -> np.ndarray:
    """Time derivative of :func:`expected_level` per hour."""
    t = np.asarray(hours, dtype=float)
    slope = np.full(t.shape, float(spec.trend_per_hour))
    for amp, period in _cycles(spec):
        slope = slope + amp * (2 * np.pi / period) * np.cos(2 * np.pi * t / period)
    return slope


def arrival_rate(spec: SynthSpec, mean_dwell_hours: float, hours) -> np.ndarray:
    """Hourly arrival rate whose expected stock equals the target level.

    With exponential dwell the expected stock obeys ``S' = rate - S / W``, so
    ``rate = L / W + L'`` keeps ``S = L``.  Negative rates are clipped to zero,
    which only matters when a cycle falls faster than ``L / W``.
    """
    mid = np.asarray(hours, dtype=float) + 0.5
    level = np.maximum(expected_level(spec, mid), 0.0)
    rate = level / mean_dwell_hours + np.where(level > 0, level_slope(spec, mid), 0.0)
    return np.maximum(rate, 0.0)


def ar1_noise(n: int, phi: float, sigma: float, rng: np.random.Generator) -> np.ndarray:
    if sigma == 0:
        return np.zeros(n)
    z = rng.normal(0.0, sigma, n)
    out = np.empty(n)
    out[0] = z[0] / np.sqrt(1.0 - phi * phi)
    for i in range(1, n):
        out[i] = phi * out[i - 1] + z[i]
    return out


def generate_series(spec: SynthSpec = REFERENCE_SPEC) -> StockSeries:
    index = make_hourly_index(spec.start, spec.end)
    rng = np.random.default_rng(spec.seed)
    level = expected_level(spec) + ar1_noise(index.length, spec.ar1_phi, spec.noise_sigma, rng)
    return StockSeries(index, np.round(np.maximum(level, 0.0)).astype(np.int64), spec.category)


@dataclass(frozen=True)
class LogMix:
    """Extra traffic generated alongside the target empty stream, as level fractions."""

    other_empty: dict = field(default_factory=lambda: {
        ContainerCategory.REEFER: 0.05, ContainerCategory.SPECIAL: 0.08})
    full_share: float = 0.3


def _stream(rate: np.ndarray, mean_dwell: float, rng, first_hour: int):
    """Arrival and departure times (seconds from the index start) for one Poisson stream."""
    counts = rng.poisson(rate)
    hours = np.repeat(np.arange(first_hour, first_hour + rate.size), counts)
    arrive = hours * 3600 + np.floor(rng.uniform(0, 60, hours.size)) * 60
    dwell = np.floor(rng.exponential(mean_dwell * 3600.0, hours.size) / 60.0) * 60
    return arrive.astype(np.int64), (arrive + dwell).astype(np.int64)


def generate_event_log(spec: SynthSpec = REFERENCE_SPEC, mean_dwell_hours: float = 12.0,
                       mix: LogMix | None = LogMix()) -> EventLog:
    """Gate events whose empty stock of ``spec.category`` follows :func:`expected_level`.

    Arrivals are Poisson with the rate from :func:`arrival_rate` and dwell
    times are exponential, so the stock at each hour is approximately Poisson
    with mean equal to the target level.  Arrivals start well before the
    index so the yard is already in equilibrium at its first hour.  Other
    categories and full containers are added according to ``mix``.
    """
    if not mean_dwell_hours > 0:
        raise ValueError("mean_dwell_hours must be positive")
    rng = np.random.default_rng(spec.seed)
    index = make_hourly_index(spec.start, spec.end)
    origin = index.start.astype("datetime64[s]")
    obs_end = origin + np.timedelta64(index.length * 3600, "s")
    warmup = int(np.ceil(10 * mean_dwell_hours))
    hours = np.arange(-warmup, index.length)
    rate = arrival_rate(spec, mean_dwell_hours, hours)

    streams = [(spec.category, CargoStatus.EMPTY, 1.0)]
    if mix is not None:
        for cat, share in mix.other_empty.items():
            streams.append((cat, CargoStatus.EMPTY, share))
        if mix.full_share > 0:
            streams.append((spec.category, CargoStatus.FULL, mix.full_share))

    rows = []
    for cat, status, share in streams:
        arrive, leave = _stream(share * rate, mean_dwell_hours, rng, -warmup)
        codes = ISO_CODES.get(cat, ("22G1",))
        code_idx = rng.integers(0, len(codes), arrive.size)
        line_idx = rng.integers(0, len(SHIPPING_LINES), arrive.size)
        for a, l, c, s in zip(arrive, leave, code_idx, line_idx):
            rows.append((int(a), int(l), codes[c], SHIPPING_LINES[s], status))
    rows.sort(key=lambda r: (r[0], r[1], r[2]))

    events = []
    for n, (a, l, code, line, status) in enumerate(rows):
        gate_in = origin + np.timedelta64(a, "s")
        gate_out = origin + np.timedelta64(l, "s")
        events.append(GateEvent(f"SYN{n:08d}", line, code, status, gate_in,
                                None if gate_out > obs_end else gate_out))
    return EventLog(tuple(events), obs_end)
