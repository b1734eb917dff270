"""Decomposable trend + seasonality + holiday model fitted by penalised least squares.

The fit is the MAP estimate under Laplace priors on the changepoint rate
adjustments and Gaussian priors on the Fourier and holiday coefficients.
Working units are the training series divided by its standard deviation, so
prior scales are comparable across series.
"""

from __future__ import annotations

import enum
import logging
import warnings
from dataclasses import dataclass, field, replace

import numpy as np

from ..errors import FitFailureError, InsufficientDataError
from ..series import (
    HOUR,
    CalendarSpec,
    ContainerCategory,
    StockSeries,
    TimeIndex,
    date_mask,
)
from .base import ForecastResult, ModelFamily, ModelSpec

logger = logging.getLogger(__name__)

TREND_FLOOR = 1e-6


class SeasonalityMode(enum.Enum):
    ADDITIVE = "additive"
    MULTIPLICATIVE = "multiplicative"


class TrendKind(enum.Enum):
    PIECEWISE_LINEAR = "piecewise_linear"
    LOGISTIC = "logistic"


@dataclass(frozen=True)
class SeasonalityTerm:
    """Configuration stub for one Fourier seasonality."""

    name: str
    period_hours: float
    fourier_order: int
    enabled: bool = True

    def __post_init__(self):
        if not self.period_hours > 0:
            raise ValueError("seasonal period must be positive")
        if self.enabled and self.fourier_order < 1:
            raise ValueError("an enabled seasonality needs fourier_order >= 1")


YEARLY = SeasonalityTerm("yearly", 8766.0, 10, True)
WEEKLY = SeasonalityTerm("weekly", 168.0, 3, False)
DAILY = SeasonalityTerm("daily", 24.0, 4, False)


@dataclass(frozen=True)
class DecomposableConfig:
    changepoint_prior_scale: float = 0.05
    seasonality_prior_scale: float = 10.0
    holidays_prior_scale: float = 10.0
    mode: SeasonalityMode = SeasonalityMode.ADDITIVE
    seasonalities: tuple = (YEARLY, WEEKLY, DAILY)
    n_changepoints: int = 25
    changepoint_range: float = 0.8
    growth: TrendKind = TrendKind.PIECEWISE_LINEAR
    capacity: float | None = None
    max_iter: int = 2000
    tol: float = 1e-8

    def __post_init__(self):
        object.__setattr__(self, "mode", SeasonalityMode(self.mode))
        object.__setattr__(self, "growth", TrendKind(self.growth))
        object.__setattr__(self, "seasonalities", tuple(self.seasonalities))
        if not (self.changepoint_prior_scale > 0 and self.seasonality_prior_scale > 0
                and self.holidays_prior_scale > 0):
            raise ValueError("prior scales must be positive")
        if not 0 < self.changepoint_range <= 1:
            raise ValueError("changepoint_range must be in (0, 1]")
        if self.n_changepoints < 0:
            raise ValueError("n_changepoints must be >= 0")

    @property
    def enabled_seasonalities(self) -> tuple:
        return tuple(s for s in self.seasonalities if s.enabled)

    def with_seasonality(self, name: str, enabled: bool = True, **changes) -> "DecomposableConfig":
        terms = tuple(
            replace(s, enabled=enabled, **changes) if s.name == name else s
            for s in self.seasonalities
        )
        return replace(self, seasonalities=terms)


TUNED_CONFIG = DecomposableConfig(
    changepoint_prior_scale=0.01,
    seasonality_prior_scale=0.01,
    mode=SeasonalityMode.MULTIPLICATIVE,
)


@dataclass(frozen=True)
class TrendSpec:
    kind: TrendKind
    k: float
    m: float
    delta: np.ndarray
    gamma: np.ndarray
    changepoints: np.ndarray  # normalised time
    capacity: float | None = None


@dataclass(frozen=True)
class SeasonalitySpec:
    name: str
    period_hours: float
    fourier_order: int
    a: np.ndarray
    b: np.ndarray
    enabled: bool = True


@dataclass(frozen=True)
class HolidaySpec:
    names: tuple
    dates: tuple  # one tuple of datetime.date per holiday
    kappa: np.ndarray
    nu: float


@dataclass(frozen=True)
class TimeScale:
    """Maps hourly timestamps to normalised time ``(t - t0) / span``."""

    t0: np.datetime64
    span_hours: float

    def __call__(self, timestamps) -> np.ndarray:
        hours = (np.asarray(timestamps, dtype="datetime64[h]") - self.t0) / HOUR
        return hours.astype(float) / self.span_hours


@dataclass(frozen=True)
class Features:
    t: np.ndarray
    changepoints: np.ndarray
    hinge: np.ndarray  # (n, S): max(t - s_j, 0)
    seasonal: np.ndarray  # (n, 2 * sum N)
    holidays: np.ndarray  # (n, L)
    seasonal_blocks: tuple  # (term, start column)
    holiday_names: tuple

    @property
    def n_basis(self) -> int:
        return 2 + self.hinge.shape[1] + self.seasonal.shape[1] + self.holidays.shape[1]

    def changepoint_indicators(self) -> np.ndarray:
        """a(t): 1 where t is at or after each changepoint."""
        return (self.t[:, None] >= self.changepoints[None, :]).astype(float)


def fourier_columns(timestamps, period_hours: float, order: int) -> np.ndarray:
    hours = (np.asarray(timestamps, dtype="datetime64[h]").astype(np.int64)).astype(float)
    n = np.arange(1, order + 1)
    arg = 2.0 * np.pi * hours[:, None] * n[None, :] / period_hours
    cols = np.empty((hours.size, 2 * order))
    cols[:, 0::2] = np.cos(arg)
    cols[:, 1::2] = np.sin(arg)
    return cols


def default_changepoints(config: DecomposableConfig) -> np.ndarray:
    if config.n_changepoints == 0:
        return np.zeros(0)
    return np.linspace(0.0, config.changepoint_range, config.n_changepoints + 1)[1:]


def build_features(index: TimeIndex, config: DecomposableConfig, cal: CalendarSpec | None = None,
                   scale: TimeScale | None = None, changepoints=None) -> Features:
    """Trend, Fourier and holiday bases on ``index``.

    ``scale`` and ``changepoints`` default to those implied by ``index`` being
    the training span.
    """
    cal = cal or CalendarSpec()
    ts = index.timestamps
    if scale is None:
        scale = TimeScale(index.start, float(max(index.length - 1, 1)))
    t = scale(ts)
    cps = default_changepoints(config) if changepoints is None else np.asarray(changepoints, float)
    hinge = np.maximum(t[:, None] - cps[None, :], 0.0)
    blocks, cols, start = [], [], 0
    for term in config.enabled_seasonalities:
        cols.append(fourier_columns(ts, term.period_hours, term.fourier_order))
        blocks.append((term, start))
        start += 2 * term.fourier_order
    seasonal = np.hstack(cols) if cols else np.zeros((ts.size, 0))
    names = tuple(sorted(cal.holidays))
    hol = np.column_stack([date_mask(ts, cal.holidays[nm]) for nm in names]).astype(float) \
        if names else np.zeros((ts.size, 0))
    return Features(t, cps, hinge, seasonal, hol, tuple(blocks), names)


# -- trend evaluation -------------------------------------------------------

def _segment(t, cps):
    return np.searchsorted(cps, t, side="right")


def linear_trend(t, k, m, delta, cps):
    gamma = -cps * delta
    seg = _segment(t, cps)
    rate = k + np.concatenate([[0.0], np.cumsum(delta)])[seg]
    offset = m + np.concatenate([[0.0], np.cumsum(gamma)])[seg]
    return rate * t + offset


def logistic_gamma(k, m, delta, cps):
    """Offset adjustments keeping the logistic trend continuous at changepoints."""
    rates = k + np.concatenate([[0.0], np.cumsum(delta)])
    gamma = np.zeros(cps.size)
    m_pr = m
    for i in range(cps.size):
        if rates[i + 1] == 0:
            gamma[i] = 0.0
        else:
            gamma[i] = (cps[i] - m_pr) * (1.0 - rates[i] / rates[i + 1])
        m_pr += gamma[i]
    return gamma


def logistic_trend(t, k, m, delta, cps, capacity):
    gamma = logistic_gamma(k, m, delta, cps)
    seg = _segment(t, cps)
    rate = k + np.concatenate([[0.0], np.cumsum(delta)])[seg]
    offset = m + np.concatenate([[0.0], np.cumsum(gamma)])[seg]
    with np.errstate(over="ignore"):
        return capacity / (1.0 + np.exp(-rate * (t - offset)))


def trend_values(trend: TrendSpec, t) -> np.ndarray:
    if trend.kind is TrendKind.LOGISTIC:
        return logistic_trend(t, trend.k, trend.m, trend.delta, trend.changepoints, trend.capacity)
    return linear_trend(t, trend.k, trend.m, trend.delta, trend.changepoints)


# -- fitted model -----------------------------------------------------------

@dataclass(frozen=True, eq=False)
class DecomposableFit:
    trend: TrendSpec
    seasonalities: tuple
    holidays: HolidaySpec
    mode: SeasonalityMode
    sigma: float
    t_scale: TimeScale
    config: DecomposableConfig
    calendar: CalendarSpec
    origin: np.datetime64
    category: ContainerCategory = ContainerCategory.STANDARD
    seed: int = 0
    objective: float = float("nan")
    diagnostics: dict = field(default_factory=dict)

    @property
    def spec(self) -> ModelSpec:
        return ModelSpec(ModelFamily.DECOMPOSABLE, self.config, self.seed)

    def components(self, index: TimeIndex) -> dict:
        ts = index.timestamps
        g = trend_values(self.trend, self.t_scale(ts))
        s = np.zeros(ts.size)
        for term in self.seasonalities:
            if term.enabled:
                cols = fourier_columns(ts, term.period_hours, term.fourier_order)
                s += cols[:, 0::2] @ term.a + cols[:, 1::2] @ term.b
        h = np.zeros(ts.size)
        for dates, kappa in zip(self.holidays.dates, self.holidays.kappa):
            h += kappa * date_mask(ts, dates)
        if self.mode is SeasonalityMode.MULTIPLICATIVE:
            if np.any(g <= 0):
                warnings.warn("multiplicative trend reaches zero; flooring it", RuntimeWarning,
                              stacklevel=2)
                g = np.maximum(g, TREND_FLOOR)
            yhat = g * (1.0 + s + h)
        else:
            yhat = g + s + h
        return {"trend": g, "seasonal": s, "holidays": h, "yhat": yhat}

    def predict_values(self, horizon_hours: int) -> np.ndarray:
        index = TimeIndex(self.origin + HOUR, horizon_hours)
        return self.components(index)["yhat"]


@dataclass(frozen=True, eq=False)
class ComponentForecast(ForecastResult):
    components: dict | None = None


def predict_decomposable(fit: DecomposableFit, index: TimeIndex) -> ComponentForecast:
    comp = fit.components(index)
    origin = index.start - HOUR
    return ComponentForecast(origin, comp["yhat"], fit.spec, fit.category, None,
                             {k: comp[k] for k in ("trend", "seasonal", "holidays")})


# -- estimation -------------------------------------------------------------

@dataclass
class _Problem:
    """Penalised least-squares objective in working (scaled) units."""

    y: np.ndarray
    feats: Features
    mode: SeasonalityMode
    kind: TrendKind
    lam_delta: float
    lam_season: float
    lam_holiday: float
    capacity: float | None

    def __post_init__(self):
        f = self.feats
        self.S = f.hinge.shape[1]
        self.F = f.seasonal.shape[1]
        self.L = f.holidays.shape[1]
        self.n_par = 2 + self.S + self.F + self.L
        self.sl_delta = slice(2, 2 + self.S)
        self.sl_season = slice(2 + self.S, 2 + self.S + self.F)
        self.sl_hol = slice(2 + self.S + self.F, self.n_par)
        self.ridge = np.zeros(self.n_par)
        self.ridge[self.sl_season] = self.lam_season
        self.ridge[self.sl_hol] = self.lam_holiday
        self.l1 = np.zeros(self.n_par)
        self.l1[self.sl_delta] = self.lam_delta
        self.linear = self.mode is SeasonalityMode.ADDITIVE and self.kind is TrendKind.PIECEWISE_LINEAR
        self.X_trend = np.column_stack([f.t, np.ones_like(f.t), f.hinge])
        self.X_other = np.hstack([f.seasonal, f.holidays])
        if self.linear:
            X = np.hstack([self.X_trend, self.X_other])
            self.gram = X.T @ X
            self.xty = X.T @ self.y
            self.yty = float(self.y @ self.y)

    def trend(self, x):
        if self.kind is TrendKind.LOGISTIC:
            return logistic_trend(self.feats.t, x[0], x[1], x[self.sl_delta],
                                  self.feats.changepoints, self.capacity)
        return self.X_trend @ x[: 2 + self.S]

    def predict(self, x):
        g = self.trend(x)
        other = self.X_other @ x[2 + self.S:]
        if self.mode is SeasonalityMode.MULTIPLICATIVE:
            return g * (1.0 + other)
        return g + other

    def smooth(self, x, need_grad=True):
        """Value and gradient of the squared-error and ridge terms."""
        ridge_val = 0.5 * float(self.ridge @ (x * x))
        if self.linear:
            gx = self.gram @ x
            val = 0.5 * (float(x @ gx) - 2.0 * float(x @ self.xty) + self.yty) + ridge_val
            return val, (gx - self.xty + self.ridge * x) if need_grad else None
        r = self.y - self.predict(x)
        val = 0.5 * float(r @ r) + ridge_val
        if not need_grad:
            return val, None
        grad = np.empty(self.n_par)
        other = self.X_other @ x[2 + self.S:]
        mult = self.mode is SeasonalityMode.MULTIPLICATIVE
        trend_weight = r * (1.0 + other) if mult else r
        if self.kind is TrendKind.LOGISTIC:
            grad[: 2 + self.S] = -self._logistic_jac(x).T @ trend_weight
        else:
            grad[: 2 + self.S] = -self.X_trend.T @ trend_weight
        other_weight = r * self.trend(x) if mult else r
        grad[2 + self.S:] = -self.X_other.T @ other_weight
        return val, grad + self.ridge * x

    def _logistic_jac(self, x):
        cols = []
        for i in range(2 + self.S):
            h = 1e-6 * max(1.0, abs(x[i]))
            xp, xm = x.copy(), x.copy()
            xp[i] += h
            xm[i] -= h
            cols.append((self.trend(xp) - self.trend(xm)) / (2 * h))
        return np.column_stack(cols)

    def objective(self, x):
        return self.smooth(x, need_grad=False)[0] + float(self.l1 @ np.abs(x))


def _soft(x, thresh):
    return np.sign(x) * np.maximum(np.abs(x) - thresh, 0.0)


def _proximal_gradient(prob: _Problem, x0, max_iter, tol, precond):
    """FISTA with backtracking, a diagonal metric and monotone restarts."""
    x = x0.copy()
    z = x.copy()
    t_mom = 1.0
    step = 1.0
    f_x = prob.objective(x)
    restarted = False
    it = 0
    for it in range(1, max_iter + 1):
        fz, gz = prob.smooth(z)
        while True:
            cand = _soft(z - step * precond * gz, step * precond * prob.l1)
            diff = cand - z
            f_c, _ = prob.smooth(cand, need_grad=False)
            bound = fz + gz @ diff + 0.5 / step * float(diff @ (diff / precond))
            if f_c <= bound + 1e-12 * max(1.0, abs(bound)) or step < 1e-20:
                break
            step *= 0.5
        f_new = f_c + float(prob.l1 @ np.abs(cand))
        if f_new > f_x:
            # restart momentum from the last accepted point; a plain proximal
            # step that still fails means no further progress is possible
            if restarted:
                break
            z, t_mom, restarted = x.copy(), 1.0, True
            continue
        restarted = False
        t_next = 0.5 * (1.0 + np.sqrt(1.0 + 4.0 * t_mom * t_mom))
        z = cand + ((t_mom - 1.0) / t_next) * (cand - x)
        rel = abs(f_x - f_new) / max(abs(f_new), 1e-300)
        x, f_x, t_mom = cand, f_new, t_next
        step *= 1.5
        if rel < tol and it > 5:
            break
    return x, f_x, it


def _polish_linear(prob: _Problem, x):
    """Solve the additive problem exactly on the active set found by FISTA.

    Returns the polished point when it satisfies the optimality conditions,
    otherwise the input unchanged.
    """
    if not prob.linear:
        return x
    is_delta = np.zeros(prob.n_par, dtype=bool)
    is_delta[prob.sl_delta] = True
    active = ~is_delta | (x != 0)
    sign = np.sign(x) * is_delta
    A = prob.gram[np.ix_(active, active)] + np.diag(prob.ridge[active])
    rhs = prob.xty[active] - (prob.l1 * sign)[active]
    try:
        sol = np.linalg.solve(A, rhs)
    except np.linalg.LinAlgError:
        return x
    cand = np.zeros_like(x)
    cand[active] = sol
    if np.any((np.sign(cand) != sign)[is_delta & active]):
        return x
    grad = prob.gram @ cand - prob.xty + prob.ridge * cand
    inactive = is_delta & ~active
    if np.any(np.abs(grad[inactive]) > prob.l1[inactive] * (1 + 1e-9) + 1e-12):
        return x
    return cand if prob.objective(cand) <= prob.objective(x) else x


def min_length(config: DecomposableConfig, cal: CalendarSpec | None = None) -> int:
    n_hol = len((cal or CalendarSpec()).holidays)
    n_basis = 2 + config.n_changepoints + n_hol + sum(
        2 * s.fourier_order for s in config.enabled_seasonalities)
    longest = max((s.period_hours for s in config.enabled_seasonalities), default=0)
    return int(max(2 * n_basis, np.ceil(longest)))


def fit_decomposable(series, config: DecomposableConfig = DecomposableConfig(),
                     cal: CalendarSpec | None = None, seed: int = 0) -> DecomposableFit:
    """MAP fit of trend, seasonality and holiday effects.

    ``series`` is a :class:`StockSeries` or an ``(index, values)`` pair for
    real-valued data.
    """
    cal = cal or CalendarSpec()
    if isinstance(series, StockSeries):
        index, y_raw, category = series.index, series.values.astype(float), series.category
    else:
        index, values = series
        y_raw, category = np.asarray(values, dtype=float), ContainerCategory.STANDARD
    need = min_length(config, cal)
    if y_raw.size < need:
        raise InsufficientDataError(
            f"decomposable model needs at least {need} hourly points, got {y_raw.size}")
    scale = float(y_raw.std())
    if not scale > 0:
        scale = 1.0
    y = y_raw / scale
    feats = build_features(index, config, cal)
    capacity = None
    if config.growth is TrendKind.LOGISTIC:
        cap_raw = config.capacity if config.capacity is not None else 1.2 * float(y_raw.max())
        if not cap_raw > 0:
            raise ValueError("logistic capacity must be positive")
        capacity = cap_raw / scale
    prob = _Problem(y, feats, config.mode, config.growth,
                    1.0 / config.changepoint_prior_scale,
                    1.0 / config.seasonality_prior_scale ** 2,
                    1.0 / config.holidays_prior_scale ** 2, capacity)

    x0 = np.zeros(prob.n_par)
    if config.growth is TrendKind.LOGISTIC:
        x0[0], x0[1] = 4.0, 0.5
    else:
        coef, *_ = np.linalg.lstsq(prob.X_trend[:, :2], y, rcond=None)
        x0[:2] = coef

    if prob.linear:
        diag = np.diag(prob.gram) + prob.ridge
    else:
        _, g0 = prob.smooth(x0)
        base = prob.trend(x0)
        weight = np.ones_like(y)
        if config.mode is SeasonalityMode.MULTIPLICATIVE:
            weight = np.maximum(np.abs(base), 1e-3)
        trend_cols = (prob._logistic_jac(x0) if config.growth is TrendKind.LOGISTIC
                      else prob.X_trend)
        diag = np.concatenate([
            (trend_cols ** 2).sum(axis=0),
            ((prob.X_other * weight[:, None]) ** 2).sum(axis=0),
        ]) + prob.ridge
    precond = 1.0 / np.maximum(diag, 1e-12)

    x, obj, n_iter = _proximal_gradient(prob, x0, config.max_iter, config.tol, precond)
    x = _polish_linear(prob, x)
    obj = prob.objective(x)
    if not np.isfinite(obj):
        raise FitFailureError("decomposable objective is not finite", {"iterations": n_iter})

    return _assemble(x, prob, feats, config, cal, index, category, scale, capacity, seed, obj,
                     n_iter)


def _assemble(x, prob, feats, config, cal, index, category, scale, capacity, seed, obj, n_iter):
    mult = config.mode is SeasonalityMode.MULTIPLICATIVE
    delta = x[prob.sl_delta]
    if config.growth is TrendKind.LOGISTIC:
        trend = TrendSpec(TrendKind.LOGISTIC, float(x[0]), float(x[1]), delta.copy(),
                          logistic_gamma(x[0], x[1], delta, feats.changepoints),
                          feats.changepoints.copy(), capacity * scale)
    else:
        trend = TrendSpec(TrendKind.PIECEWISE_LINEAR, float(x[0]) * scale, float(x[1]) * scale,
                          delta * scale, -feats.changepoints * delta * scale,
                          feats.changepoints.copy())
    other_scale = 1.0 if mult else scale
    coefs = x[prob.sl_season] * other_scale
    terms = []
    for term in config.seasonalities:
        if not term.enabled:
            terms.append(SeasonalitySpec(term.name, term.period_hours, term.fourier_order,
                                         np.zeros(0), np.zeros(0), False))
            continue
        start = dict((t.name, s) for t, s in feats.seasonal_blocks)[term.name]
        block = coefs[start:start + 2 * term.fourier_order]
        terms.append(SeasonalitySpec(term.name, term.period_hours, term.fourier_order,
                                     block[0::2].copy(), block[1::2].copy(), True))
    kappa = x[prob.sl_hol] * other_scale
    holidays = HolidaySpec(feats.holiday_names,
                           tuple(tuple(sorted(cal.holidays[n])) for n in feats.holiday_names),
                           kappa.copy(), config.holidays_prior_scale)
    resid = prob.y - prob.predict(x)
    fit = DecomposableFit(
        trend=trend,
        seasonalities=tuple(terms),
        holidays=holidays,
        mode=config.mode,
        sigma=float(resid.std()) * scale,
        t_scale=TimeScale(index.start, float(max(index.length - 1, 1))),
        config=config,
        calendar=cal,
        origin=index.end,
        category=category,
        seed=seed,
        objective=float(obj),
        diagnostics={"iterations": n_iter, "y_scale": scale},
    )
    if mult:
        g_train = trend_values(trend, feats.t)
        if np.any(g_train <= 0):
            warnings.warn("multiplicative trend crosses zero on the training span",
                          RuntimeWarning, stacklevel=3)
    return fit


def forecast_decomposable(fit: DecomposableFit, horizon_hours: int) -> ForecastResult:
    if horizon_hours < 1:
        raise ValueError("horizon must be at least one hour")
    return predict_decomposable(fit, TimeIndex(fit.origin + HOUR, horizon_hours))


# -- (de)serialisation ------------------------------------------------------

def config_to_dict(c: DecomposableConfig) -> dict:
    return {
        "changepoint_prior_scale": c.changepoint_prior_scale,
        "seasonality_prior_scale": c.seasonality_prior_scale,
        "holidays_prior_scale": c.holidays_prior_scale,
        "mode": c.mode.value,
        "seasonalities": [
            {"name": s.name, "period_hours": s.period_hours, "fourier_order": s.fourier_order,
             "enabled": s.enabled} for s in c.seasonalities
        ],
        "n_changepoints": c.n_changepoints,
        "changepoint_range": c.changepoint_range,
        "growth": c.growth.value,
        "capacity": c.capacity,
        "max_iter": c.max_iter,
        "tol": c.tol,
    }


def config_from_dict(d: dict) -> DecomposableConfig:
    d = dict(d)
    if "seasonalities" in d:
        d["seasonalities"] = tuple(SeasonalityTerm(**s) for s in d["seasonalities"])
    return DecomposableConfig(**d)


def fit_to_dict(fit: DecomposableFit) -> dict:
    tr = fit.trend
    return {
        "trend": {"kind": tr.kind.value, "k": tr.k, "m": tr.m, "delta": tr.delta.tolist(),
                  "gamma": tr.gamma.tolist(), "changepoints": tr.changepoints.tolist(),
                  "capacity": tr.capacity},
        "seasonalities": [
            {"name": s.name, "period_hours": s.period_hours, "fourier_order": s.fourier_order,
             "a": s.a.tolist(), "b": s.b.tolist(), "enabled": s.enabled}
            for s in fit.seasonalities
        ],
        "holidays": {"names": list(fit.holidays.names),
                     "dates": [[d.isoformat() for d in ds] for ds in fit.holidays.dates],
                     "kappa": fit.holidays.kappa.tolist(), "nu": fit.holidays.nu},
        "mode": fit.mode.value,
        "sigma": fit.sigma,
        "t_scale": {"t0": str(fit.t_scale.t0), "span_hours": fit.t_scale.span_hours},
        "config": config_to_dict(fit.config),
        "calendar": {"weekend_days": sorted(fit.calendar.weekend_days),
                     "holidays": {k: sorted(d.isoformat() for d in v)
                                  for k, v in fit.calendar.holidays.items()}},
        "origin": str(fit.origin),
        "category": fit.category.value,
        "seed": fit.seed,
        "objective": fit.objective,
    }


def fit_from_dict(d: dict) -> DecomposableFit:
    from datetime import date

    tr = d["trend"]
    trend = TrendSpec(TrendKind(tr["kind"]), tr["k"], tr["m"], np.asarray(tr["delta"], float),
                      np.asarray(tr["gamma"], float), np.asarray(tr["changepoints"], float),
                      tr["capacity"])
    seas = tuple(
        SeasonalitySpec(s["name"], s["period_hours"], s["fourier_order"],
                        np.asarray(s["a"], float), np.asarray(s["b"], float), s["enabled"])
        for s in d["seasonalities"]
    )
    h = d["holidays"]
    holidays = HolidaySpec(tuple(h["names"]),
                           tuple(tuple(date.fromisoformat(x) for x in ds) for ds in h["dates"]),
                           np.asarray(h["kappa"], float), h["nu"])
    cal = CalendarSpec(
        frozenset(d["calendar"]["weekend_days"]),
        {k: frozenset(date.fromisoformat(x) for x in v)
         for k, v in d["calendar"]["holidays"].items()},
    )
    return DecomposableFit(
        trend=trend,
        seasonalities=seas,
        holidays=holidays,
        mode=SeasonalityMode(d["mode"]),
        sigma=d["sigma"],
        t_scale=TimeScale(np.datetime64(d["t_scale"]["t0"], "h"), d["t_scale"]["span_hours"]),
        config=config_from_dict(d["config"]),
        calendar=cal,
        origin=np.datetime64(d["origin"], "h"),
        category=ContainerCategory.parse(d["category"]),
        seed=d.get("seed", 0),
        objective=d.get("objective", float("nan")),
    )
