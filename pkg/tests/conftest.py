import numpy as np
import pytest
from hypothesis import settings

from ecforecast.series import ContainerCategory, StockSeries, TimeIndex

settings.register_profile("ecf", deadline=None, max_examples=60)
settings.load_profile("ecf")

# Acceptance outcomes, printed as one line per criterion at the end of the run.
ACCEPTANCE: dict = {}


def record(number: int, title: str, passed: bool, detail: str = "") -> None:
    ACCEPTANCE[number] = (title, bool(passed), detail)
    print(f"ACCEPTANCE {number:>2} {'PASS' if passed else 'FAIL'}  {title}  {detail}")


def pytest_terminal_summary(terminalreporter):
    if not ACCEPTANCE:
        return
    terminalreporter.section("acceptance criteria")
    for number in sorted(ACCEPTANCE):
        title, passed, detail = ACCEPTANCE[number]
        terminalreporter.write_line(
            f"criterion {number:>2}: {'PASS' if passed else 'FAIL'}  {title}  {detail}")


def make_series(values, start="2024-01-01T00", category=ContainerCategory.STANDARD) -> StockSeries:
    values = np.asarray(values)
    return StockSeries(TimeIndex(np.datetime64(start, "h"), values.size), values, category)


@pytest.fixture
def rng():
    return np.random.default_rng(12345)


def small_specs():
    """One cheap configuration per model family."""
    from ecforecast.models.arima import ArimaOrder
    from ecforecast.models.base import ModelFamily, ModelSpec
    from ecforecast.models.decomposable import DecomposableConfig
    from ecforecast.models.lstm import NetworkConfig

    return [
        ModelSpec(ModelFamily.NAIVE),
        ModelSpec(ModelFamily.ARIMA, ArimaOrder(2, 1, 1)),
        ModelSpec(ModelFamily.DECOMPOSABLE,
                  DecomposableConfig(n_changepoints=3).with_seasonality("yearly", False)
                  .with_seasonality("daily", True)),
        ModelSpec(ModelFamily.LSTM, NetworkConfig(timesteps=8, layers=1, hidden=4, epochs=2,
                                                  batch_size=16), seed=3),
    ]


def daily_series(n=24 * 30, seed=0, start="2024-01-01T00"):
    """Hourly counts with a daily cycle and rounding noise."""
    rng = np.random.default_rng(seed)
    t = np.arange(n)
    return make_series(np.round(200 + 30 * np.sin(2 * np.pi * t / 24) + rng.normal(0, 3, n)),
                       start=start)
