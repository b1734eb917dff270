import dataclasses
import warnings

import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from conftest import make_series
from ecforecast.errors import FitFailureError
from ecforecast.forecaster import naive_forecast
from ecforecast.models.arima import (
    ArimaFit,
    ArimaOrder,
    ArimaParams,
    ar_is_stationary,
    css_residuals,
    estimate_arma,
    fit_arima,
    forecast_arima,
    forecast_transformed,
    simulate_arima,
)
from ecforecast.stats import log_difference


def recursion_residuals(params, w, order):
    """The defining recursion with zero pre-sample values, one step at a time."""
    e = np.zeros(len(w))
    for t in range(len(w)):
        val = w[t] - params.theta0
        for i in range(1, order.p + 1):
            if t - i >= 0:
                val -= params.beta[i - 1] * w[t - i]
        for j in range(1, order.q + 1):
            if t - j >= 0:
                val -= params.theta[j - 1] * e[t - j]
        e[t] = val
    return e


def recursion_forecast(params, w, e, order, horizon):
    w, e = list(w), list(e)
    out = []
    for _ in range(horizon):
        val = params.theta0
        val += sum(params.beta[i - 1] * w[-i] for i in range(1, order.p + 1))
        val += sum(params.theta[j - 1] * e[-j] for j in range(1, order.q + 1))
        out.append(val)
        w.append(val)
        e.append(0.0)
    return np.array(out)


def test_zero_order_residuals_are_the_input():
    w = np.array([0.3, -1.0, 2.5])
    order = ArimaOrder(0, 0, 0)
    e, css = css_residuals(ArimaParams.zeros(order), w, order)
    assert np.array_equal(e, w) and css == pytest.approx(w @ w)


def test_unit_ar_residuals_by_hand():
    order = ArimaOrder(1, 0, 0)
    e, css = css_residuals(ArimaParams([1.0], 0.0, []), [1.0, 1.0, 1.0], order)
    assert np.array_equal(e, [1.0, 0.0, 0.0]) and css == 1.0


def test_mean_constant_centres_residuals(rng):
    w = rng.normal(3, 1, 50)
    order = ArimaOrder(0, 0, 0)
    _, css = css_residuals(ArimaParams([], w.mean(), []), w, order)
    assert css == pytest.approx(np.sum((w - w.mean()) ** 2), rel=1e-12)


@given(st.integers(0, 3), st.integers(0, 3), st.integers(0, 10_000))
def test_residuals_match_recursion(p, q, seed):
    rng = np.random.default_rng(seed)
    order = ArimaOrder(p, 0, q)
    params = ArimaParams(rng.uniform(-0.5, 0.5, p), rng.normal(), rng.uniform(-0.5, 0.5, q))
    w = rng.normal(size=60)
    e, css = css_residuals(params, w, order)
    oracle = recursion_residuals(params, w, order)
    assert np.allclose(e, oracle, rtol=0, atol=1e-10)
    assert css == pytest.approx(oracle @ oracle, rel=1e-10)


@given(st.integers(0, 3), st.integers(0, 3), st.integers(1, 24), st.integers(0, 10_000))
def test_forecast_matches_recursion(p, q, horizon, seed):
    rng = np.random.default_rng(seed)
    order = ArimaOrder(p, 0, q)
    params = ArimaParams(rng.uniform(-0.4, 0.4, p), rng.normal(0, 0.2), rng.uniform(-0.4, 0.4, q))
    w = simulate_arima(params, order, 80, seed=seed)
    e = recursion_residuals(params, w, order)
    k = max(p, q, 1)
    _, state = log_difference(w, 0, apply_log=False)
    fitted = ArimaFit(order, params, state, e, {"w": w[-k:], "residuals": e[-k:]}, float(e @ e),
                      1.0, np.datetime64("2024-01-01T00", "h"))
    oracle = recursion_forecast(params, w, e, order, horizon)
    assert np.allclose(forecast_transformed(fitted, horizon), oracle, rtol=0, atol=1e-10)


def test_ar1_forecast_closed_form(rng):
    order = ArimaOrder(1, 0, 0)
    w = rng.normal(size=100)
    base = fit_arima(w, order, apply_log=False)
    theta0, beta = 0.3, 0.8
    f = dataclasses.replace(base, params=ArimaParams([beta], theta0, []))
    h = np.arange(1, 31)
    expected = theta0 * (1 - beta**h) / (1 - beta) + beta**h * w[-1]
    assert np.allclose(forecast_transformed(f, 30), expected, rtol=0, atol=1e-8)
    assert forecast_transformed(f, 1)[0] == pytest.approx(theta0 + beta * w[-1], abs=1e-15)


def test_ar2_recovery():
    truth = ArimaParams([0.5, -0.3], 0.0, [])
    w = simulate_arima(truth, (2, 0, 0), 2000, sigma=1.0, seed=42)
    f = fit_arima(w, (2, 0, 0), apply_log=False)
    assert np.all(np.abs(f.params.beta - truth.beta) < 0.08)
    assert f.sigma2 == pytest.approx(1.0, abs=0.1)
    assert not f.nonstationary_ar


def test_white_noise_ma_coefficient_near_zero():
    w = np.random.default_rng(8).normal(size=3000)
    f = fit_arima(w, (0, 0, 1), apply_log=False)
    assert abs(f.params.theta[0]) < 0.08


def test_random_walk_order_estimates_mean_drift(rng):
    y = np.round(500 + np.cumsum(rng.normal(0.5, 3, 400)))
    f = fit_arima(y, (0, 1, 0))
    assert f.params.theta0 == pytest.approx(np.diff(np.log(y + 1)).mean(), abs=1e-7)


def test_driftless_random_walk_equals_naive(rng):
    s = make_series(np.round(500 + np.cumsum(rng.normal(0, 3, 400))))
    f = fit_arima(s, ArimaOrder(0, 1, 0, include_constant=False))
    naive = naive_forecast(s, 168).values
    assert np.allclose(forecast_arima(f, 168).values, naive, rtol=0, atol=1e-9)


def test_fit_never_worse_than_its_starts(rng):
    w = simulate_arima(ArimaParams([0.6], 0.1, [0.3]), (1, 0, 1), 500, seed=3)
    est = estimate_arma(w, ArimaOrder(1, 0, 1))
    assert est["css"] <= min(r["css_start"] for r in est["runs"]) + 1e-12


def test_fit_errors_and_warnings():
    with pytest.raises(ValueError):
        ArimaParams([np.nan], 0.0, [])
    with warnings.catch_warnings(record=True) as caught:
        warnings.simplefilter("always")
        simulate_arima(ArimaParams([1.2], 0.0, []), (1, 0, 0), 50)
    assert any("explosive" in str(w.message) for w in caught)


def test_horizon_must_be_positive(rng):
    f = fit_arima(rng.normal(size=100), (1, 0, 0), apply_log=False)
    with pytest.raises(ValueError):
        forecast_transformed(f, 0)


def test_simulated_noise_mean_within_clt_bound():
    n = 4000
    x = simulate_arima(ArimaParams([], 0.0, []), (0, 0, 0), n, sigma=2.0, seed=1)
    assert abs(x.mean()) < 4 * 2.0 / np.sqrt(n)


def test_simulation_is_seeded():
    params = ArimaParams([0.3], 0.1, [0.2])
    a = simulate_arima(params, (1, 1, 1), 300, seed=9)
    assert np.array_equal(a, simulate_arima(params, (1, 1, 1), 300, seed=9))
    assert not np.array_equal(a, simulate_arima(params, (1, 1, 1), 300, seed=10))


def test_simulated_ar1_lag_one_autocorrelation():
    x = simulate_arima(ArimaParams([0.7], 0.0, []), (1, 0, 0), 5000, seed=4)
    xc = x - x.mean()
    assert (xc[1:] @ xc[:-1]) / (xc @ xc) == pytest.approx(0.7, abs=0.05)


def test_stationarity_check():
    assert ar_is_stationary([0.5, -0.3])
    assert not ar_is_stationary([1.0])
    assert not ar_is_stationary([0.5, 0.6])


def test_round_trip_through_dict(rng):
    s = make_series(np.round(300 + 20 * np.sin(np.arange(300) / 4) + rng.normal(0, 2, 300)))
    f = fit_arima(s, (2, 1, 2))
    back = ArimaFit.from_dict(f.to_dict())
    assert np.array_equal(back.predict_values(48), f.predict_values(48))


def test_fit_failure_carries_diagnostics():
    err = FitFailureError("boom", {"runs": []})
    assert err.diagnostics == {"runs": []}
