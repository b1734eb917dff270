"""ARIMA(p, d, q) on the log-differenced stock series.

Estimation minimises the conditional sum of squares (pre-sample values and
errors set to zero) with a limited-memory quasi-Newton method driven by
central-difference gradients.
"""

from __future__ import annotations

import logging
import warnings
from dataclasses import dataclass, field

import numpy as np
from scipy.linalg import solve_toeplitz
from scipy.optimize import minimize
from scipy.signal import lfilter

from ..errors import FitFailureError
from ..series import ContainerCategory, StockSeries
from ..stats import TransformState, acf, invert_log_difference, log_difference
from .base import ForecastResult, ModelFamily, ModelSpec

logger = logging.getLogger(__name__)

MAX_ORDER = 24
TUNED_ORDER = (2, 1, 5)


@dataclass(frozen=True)
class ArimaOrder:
    p: int = 2
    d: int = 1
    q: int = 5
    include_constant: bool = True

    def __post_init__(self):
        for name in ("p", "d", "q"):
            v = getattr(self, name)
            if not 0 <= int(v) <= MAX_ORDER:
                raise ValueError(f"ARIMA order {name}={v} outside [0, {MAX_ORDER}]")
            object.__setattr__(self, name, int(v))

    @property
    def min_length(self) -> int:
        return max(10 * (self.p + self.q + self.d), 10)

    def as_tuple(self) -> tuple:
        return (self.p, self.d, self.q)


@dataclass(frozen=True)
class ArimaParams:
    beta: np.ndarray
    theta0: float
    theta: np.ndarray

    def __post_init__(self):
        object.__setattr__(self, "beta", np.atleast_1d(np.asarray(self.beta, dtype=float)))
        object.__setattr__(self, "theta", np.atleast_1d(np.asarray(self.theta, dtype=float)))
        object.__setattr__(self, "theta0", float(self.theta0))
        if not (np.all(np.isfinite(self.beta)) and np.all(np.isfinite(self.theta))
                and np.isfinite(self.theta0)):
            raise ValueError("ARIMA parameters must be finite")

    @classmethod
    def zeros(cls, order: ArimaOrder) -> "ArimaParams":
        return cls(np.zeros(order.p), 0.0, np.zeros(order.q))

    def pack(self) -> np.ndarray:
        return np.concatenate([self.beta, [self.theta0], self.theta])

    @classmethod
    def unpack(cls, x, order: ArimaOrder) -> "ArimaParams":
        x = np.asarray(x, dtype=float)
        return cls(x[: order.p], x[order.p], x[order.p + 1:])


@dataclass(frozen=True, eq=False)
class ArimaFit:
    order: ArimaOrder
    params: ArimaParams
    transform: TransformState
    residuals: np.ndarray
    train_tail: dict
    css: float
    sigma2: float
    origin: np.datetime64
    category: ContainerCategory = ContainerCategory.STANDARD
    seed: int = 0
    nonstationary_ar: bool = False
    diagnostics: dict = field(default_factory=dict)

    @property
    def spec(self) -> ModelSpec:
        return ModelSpec(ModelFamily.ARIMA, self.order, self.seed)

    def predict_values(self, horizon_hours: int) -> np.ndarray:
        return invert_log_difference(forecast_transformed(self, horizon_hours), self.transform)

    def to_dict(self) -> dict:
        return {
            "order": {"p": self.order.p, "d": self.order.d, "q": self.order.q,
                      "include_constant": self.order.include_constant},
            "params": {"beta": self.params.beta.tolist(), "theta0": self.params.theta0,
                       "theta": self.params.theta.tolist()},
            "transform": self.transform.to_dict(),
            "train_tail": {k: list(map(float, v)) for k, v in self.train_tail.items()},
            "css": self.css,
            "sigma2": self.sigma2,
            "origin": str(self.origin),
            "category": self.category.value,
            "seed": self.seed,
            "nonstationary_ar": self.nonstationary_ar,
        }

    @classmethod
    def from_dict(cls, d: dict) -> "ArimaFit":
        order = ArimaOrder(**d["order"])
        tail = {k: np.asarray(v, dtype=float) for k, v in d["train_tail"].items()}
        return cls(
            order=order,
            params=ArimaParams(d["params"]["beta"], d["params"]["theta0"], d["params"]["theta"]),
            transform=TransformState.from_dict(d["transform"]),
            residuals=tail["residuals"],
            train_tail=tail,
            css=d["css"],
            sigma2=d["sigma2"],
            origin=np.datetime64(d["origin"], "h"),
            category=ContainerCategory.parse(d["category"]),
            seed=d.get("seed", 0),
            nonstationary_ar=d.get("nonstationary_ar", False),
        )


def css_residuals(params: ArimaParams, w, order: ArimaOrder) -> tuple[np.ndarray, float]:
    """Conditional one-step residuals of the ARMA recursion and their sum of squares."""
    w = np.asarray(w, dtype=float)
    ar = np.concatenate([[1.0], -params.beta[: order.p]])
    with np.errstate(over="ignore", invalid="ignore"):
        e = lfilter(ar, [1.0], w) - params.theta0
        if order.q:
            e = lfilter([1.0], np.concatenate([[1.0], params.theta[: order.q]]), e)
        return e, float(e @ e)


def yule_walker(w, p: int) -> np.ndarray:
    if p == 0:
        return np.zeros(0)
    rho = acf(w, p)
    return solve_toeplitz(rho[:p], rho[1:p + 1])


def _central_gradient(f, x, rel_step=1e-6):
    g = np.empty_like(x)
    for i in range(x.size):
        h = rel_step * max(1.0, abs(x[i]))
        xp, xm = x.copy(), x.copy()
        xp[i] += h
        xm[i] -= h
        g[i] = (f(xp) - f(xm)) / (2 * h)
    return g


def ar_is_stationary(beta) -> bool:
    beta = np.asarray(beta, dtype=float)
    if beta.size == 0 or not np.any(beta):
        return True
    # roots of 1 - b1 z - ... - bp z^p must lie outside the unit circle
    roots = np.roots(np.concatenate([-beta[::-1], [1.0]]))
    return bool(np.all(np.abs(roots) > 1.0))


def estimate_arma(w, order: ArimaOrder, maxiter: int = 500, ftol: float = 1e-10,
                  max_restarts: int = 50) -> dict:
    """Minimise the CSS of an ARMA(p, q) model with constant on the series ``w``."""
    w = np.asarray(w, dtype=float)
    p, q = order.p, order.q
    mean = float(w.mean())
    free = np.ones(p + 1 + q, dtype=bool)
    if not order.include_constant:
        free[p] = False

    def full(x):
        out = np.zeros(p + 1 + q)
        out[free] = x
        return out

    def objective(x):
        _, css = css_residuals(ArimaParams.unpack(full(x), order), w, order)
        return css if np.isfinite(css) else np.inf

    # Search in rescaled coordinates u = x * scale so the curvature of the
    # constant (order n) and of the lag coefficients (order n * var(w)) match.
    root_n = np.sqrt(w.size)
    spread = float(w.std()) or 1.0
    scale = np.concatenate([np.full(p, root_n * spread), [root_n], np.full(q, root_n * spread)])
    scale = scale[free]

    def scaled(u):
        return objective(u / scale)

    starts = []
    zero = np.zeros(p + 1 + q)
    zero[p] = mean if order.include_constant else 0.0
    starts.append(zero)
    if p:
        yw = np.zeros(p + 1 + q)
        try:
            yw[:p] = yule_walker(w, p)
        except Exception:  # degenerate autocovariance; zero start still runs
            yw[:p] = 0.0
        yw[p] = mean * (1.0 - yw[:p].sum()) if order.include_constant else 0.0
        starts.append(yw)

    best_x, best_f, runs = None, np.inf, []
    for x0 in starts:
        x0f = x0[free]
        f0 = objective(x0f)
        runs.append({"start": x0.tolist(), "css_start": f0})
        if np.isfinite(f0) and f0 < best_f:
            best_x, best_f = x0f, f0
        if x0f.size == 0:
            continue
        # L-BFGS-B ends on the first step that gains less than ftol, which in
        # the narrow valleys of this objective is often far from stationary.
        # Warm restarts (fresh curvature memory) continue until a whole run
        # gains less than ftol.
        x, prev, nit, restarts = x0f * scale, f0, 0, 0
        while True:
            res = minimize(
                scaled, x, jac=lambda z: _central_gradient(scaled, z),
                method="L-BFGS-B",
                options={"maxiter": maxiter - nit, "ftol": ftol, "gtol": 1e-12},
            )
            nit += int(res.nit)
            if np.isfinite(res.fun) and res.fun <= prev:
                x = res.x
            gain = prev - res.fun
            prev = min(prev, float(res.fun))
            if not gain > ftol * abs(prev) or nit >= maxiter or restarts >= max_restarts:
                break
            restarts += 1
        res.x, res.fun = x / scale, prev
        runs[-1].update(css_end=float(res.fun), nit=nit, restarts=restarts,
                        message=str(res.message))
        if np.isfinite(res.fun) and res.fun < best_f:
            best_x, best_f = res.x, float(res.fun)

    if best_x is None or not np.isfinite(best_f):
        raise FitFailureError("CSS objective is not finite at any start", {"runs": runs})
    params = ArimaParams.unpack(full(best_x), order)
    resid, css = css_residuals(params, w, order)
    return {"params": params, "residuals": resid, "css": css, "runs": runs}


def fit_arima(series, order: ArimaOrder | tuple = ArimaOrder(), apply_log: bool = True,
              seed: int = 0) -> ArimaFit:
    """Fit ARIMA by CSS after ``log(y + 1)`` (optional) and ``d`` differences.

    ``series`` is a :class:`StockSeries` or a plain vector.
    """
    if isinstance(order, tuple):
        order = ArimaOrder(*order)
    if isinstance(series, StockSeries):
        values, origin, category = series.values, series.origin, series.category
    else:
        values = np.asarray(series, dtype=float)
        origin, category = np.datetime64(0, "h") + (values.size - 1), ContainerCategory.STANDARD
    w, state = log_difference(values, order.d, apply_log=apply_log)
    est = estimate_arma(w, order)
    params, resid, css = est["params"], est["residuals"], est["css"]
    n_eff = w.size
    sigma2 = css / n_eff
    if not sigma2 > 0:
        raise FitFailureError("fitted innovation variance is not positive", {"css": css})
    stationary = ar_is_stationary(params.beta)
    if not stationary:
        warnings.warn("fitted AR polynomial has roots on or inside the unit circle",
                      RuntimeWarning, stacklevel=2)
    k = max(order.p, order.q, 1)
    tail = {"w": w[-k:].copy(), "residuals": resid[-k:].copy()}
    logger.debug("ARIMA%s css=%.6g sigma2=%.6g", order.as_tuple(), css, sigma2)
    return ArimaFit(order, params, state, resid, tail, css, sigma2, origin, category, seed,
                    not stationary, {"runs": est["runs"]})


def forecast_transformed(fit: ArimaFit, horizon_hours: int) -> np.ndarray:
    """Iterate the ARMA recursion forward with zero future errors."""
    if horizon_hours < 1:
        raise ValueError("horizon must be at least one hour")
    p, q = fit.order.p, fit.order.q
    beta, theta, c = fit.params.beta, fit.params.theta, fit.params.theta0
    w_hist = list(fit.train_tail["w"])
    e_hist = list(fit.train_tail["residuals"])
    out = np.empty(horizon_hours)
    for h in range(horizon_hours):
        val = c
        for i in range(1, p + 1):
            val += beta[i - 1] * w_hist[-i]
        for j in range(1, q + 1):
            val += theta[j - 1] * e_hist[-j]
        out[h] = val
        w_hist.append(val)
        e_hist.append(0.0)
    return out


def forecast_arima(fit: ArimaFit, horizon_hours: int) -> ForecastResult:
    return ForecastResult(fit.origin, fit.predict_values(horizon_hours), fit.spec, fit.category)


def simulate_arima(params: ArimaParams, order: ArimaOrder | tuple, n: int, sigma: float = 1.0,
                   seed: int = 0, burn_in: int = 200) -> np.ndarray:
    """Simulate the ARMA recursion with Gaussian errors, integrated ``d`` times."""
    if isinstance(order, tuple):
        order = ArimaOrder(*order)
    if n < 1 or not sigma > 0:
        raise ValueError("need n >= 1 and sigma > 0")
    if not ar_is_stationary(params.beta[: order.p]):
        warnings.warn("simulating an explosive AR process", RuntimeWarning, stacklevel=2)
    rng = np.random.default_rng(seed)
    eps = rng.normal(0.0, sigma, n + burn_in)
    ma = np.concatenate([[1.0], params.theta[: order.q]])
    ar = np.concatenate([[1.0], -params.beta[: order.p]])
    w = lfilter(ma, ar, eps + 0.0) + lfilter([1.0], ar, np.full(n + burn_in, params.theta0))
    w = w[burn_in:]
    for _ in range(order.d):
        w = np.cumsum(w)
    return w
