"""Stationarity testing, correlograms and invertible transforms."""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np
from scipy.stats import norm

from .errors import DegenerateError, DomainError, InsufficientDataError

# MacKinnon (1994) response surface for the tau statistic, one variable,
# constant and no trend.  Polynomials in the statistic, lowest order first.
_TAU_SMALLP = (2.1659, 1.4412, 0.038269)
_TAU_LARGEP = (1.7339, 0.93202, -0.12745, -0.010368)
_TAU_STAR = -1.61
_TAU_MIN = -18.83
_TAU_MAX = 2.74
P_VALUE_FLOOR = 1e-10


@dataclass(frozen=True)
class AdfResult:
    statistic: float
    p_value: float
    lags_used: int
    n_obs: int


def schwert_lag(n: int) -> int:
    return int(math.floor(12.0 * (n / 100.0) ** 0.25))


def mackinnon_p(stat: float) -> float:
    """Approximate p-value of an ADF tau statistic (constant, no trend)."""
    if stat > _TAU_MAX:
        return 1.0
    if stat < _TAU_MIN:
        return P_VALUE_FLOOR
    coef = _TAU_SMALLP if stat <= _TAU_STAR else _TAU_LARGEP
    z = sum(c * stat**i for i, c in enumerate(coef))
    return float(min(1.0, max(P_VALUE_FLOOR, norm.cdf(z))))


def adf_test(series, max_lag: int | None = None) -> AdfResult:
    """Augmented Dickey-Fuller test with a constant and ``max_lag`` lagged differences.

    The lag order is fixed (no information-criterion search); when
    ``max_lag`` is None the Schwert rule ``floor(12 (n/100)^(1/4))`` is used.
    """
    y = np.asarray(series, dtype=float)
    n = y.size
    lags = schwert_lag(n) if max_lag is None else int(max_lag)
    if lags < 0:
        raise ValueError("max_lag must be >= 0")
    if n < lags + 10:
        raise InsufficientDataError(f"ADF needs at least {lags + 10} points, got {n}")
    if np.ptp(y) == 0:
        raise DegenerateError("ADF regression is degenerate on a constant series")

    dy = np.diff(y)
    target = dy[lags:]
    cols = [np.ones_like(target), y[lags:-1]]
    cols += [dy[lags - i:-i] for i in range(1, lags + 1)]
    X = np.column_stack(cols)
    nobs, k = X.shape
    beta, _, rank, _ = np.linalg.lstsq(X, target, rcond=None)
    if rank < k:
        raise DegenerateError("ADF regression design is rank deficient")
    resid = target - X @ beta
    s2 = resid @ resid / (nobs - k)
    cov = s2 * np.linalg.inv(X.T @ X)
    stat = float(beta[1] / math.sqrt(cov[1, 1]))
    return AdfResult(stat, mackinnon_p(stat), lags, nobs)


def acf(series, n_lags: int) -> np.ndarray:
    x = np.asarray(series, dtype=float)
    if not 0 <= n_lags < x.size:
        raise ValueError(f"n_lags must be in [0, {x.size - 1}]")
    xc = x - x.mean()
    denom = xc @ xc
    if denom == 0:
        raise DegenerateError("autocorrelation undefined for a constant series")
    out = np.empty(n_lags + 1)
    out[0] = 1.0
    for k in range(1, n_lags + 1):
        out[k] = (xc[:-k] @ xc[k:]) / denom
    return out


def pacf_from_acf(rho: np.ndarray) -> np.ndarray:
    """Partial autocorrelations by the Durbin-Levinson recursion."""
    n_lags = rho.size - 1
    pacf = np.empty(n_lags + 1)
    pacf[0] = 1.0
    phi = np.zeros(n_lags + 1)
    v = 1.0
    for k in range(1, n_lags + 1):
        a = (rho[k] - phi[1:k] @ rho[k - 1:0:-1]) / v
        new = phi.copy()
        new[k] = a
        new[1:k] = phi[1:k] - a * phi[k - 1:0:-1]
        phi = new
        v *= 1.0 - a * a
        pacf[k] = a
    return pacf


def correlogram(series, n_lags: int) -> tuple[np.ndarray, np.ndarray]:
    rho = acf(series, n_lags)
    return rho, pacf_from_acf(rho)


@dataclass(frozen=True)
class TransformState:
    """What is needed to undo ``log(y + offset)`` followed by ``d`` differences.

    ``retained_values[k]`` is the last value at differencing level ``k``
    (level 0 is the log series); ``initial_values[k]`` is the first.
    """

    applied_log: bool
    diff_order: int
    retained_values: tuple
    initial_values: tuple = ()
    offset: float = 1.0

    def __post_init__(self):
        object.__setattr__(self, "retained_values", tuple(float(v) for v in self.retained_values))
        object.__setattr__(self, "initial_values", tuple(float(v) for v in self.initial_values))
        if len(self.retained_values) != self.diff_order:
            raise ValueError("retained_values must hold one value per differencing order")

    def to_dict(self) -> dict:
        return {
            "applied_log": self.applied_log,
            "diff_order": self.diff_order,
            "retained_values": list(self.retained_values),
            "initial_values": list(self.initial_values),
            "offset": self.offset,
        }

    @classmethod
    def from_dict(cls, d: dict) -> "TransformState":
        return cls(d["applied_log"], d["diff_order"], tuple(d["retained_values"]),
                   tuple(d.get("initial_values", ())), d.get("offset", 1.0))


def log_difference(values, d: int, offset: float = 1.0, apply_log: bool = True):
    """Return ``w = diff^d log(y + offset)`` and the state needed to invert it."""
    if d < 0:
        raise ValueError("differencing order must be >= 0")
    y = np.asarray(values, dtype=float)
    if apply_log:
        if np.any(y < 0):
            raise DomainError("log transform needs non-negative values")
        z = np.log(y + offset)
    else:
        z = y.copy()
    if y.size <= d:
        raise InsufficientDataError(f"need more than {d} points to difference {d} times")
    tails, heads = [], []
    for _ in range(d):
        tails.append(z[-1])
        heads.append(z[0])
        z = np.diff(z)
    return z, TransformState(apply_log, d, tuple(tails), tuple(heads), offset)


def _integrate(w: np.ndarray, state: TransformState) -> np.ndarray:
    z = np.asarray(w, dtype=float)
    for k in range(state.diff_order - 1, -1, -1):
        z = state.retained_values[k] + np.cumsum(z)
    return z


def _untransform(z: np.ndarray, state: TransformState) -> np.ndarray:
    if not state.applied_log:
        return z
    with np.errstate(over="ignore"):
        return np.maximum(np.exp(z) - state.offset, 0.0)


def invert_log_difference(w_forecast, state: TransformState, diff_order: int | None = None) -> np.ndarray:
    """Continue the series past its last observation from forecast increments."""
    if diff_order is not None and diff_order != state.diff_order:
        raise ValueError(f"state was built for d={state.diff_order}, not d={diff_order}")
    if len(state.retained_values) != state.diff_order:
        raise ValueError("transform state is inconsistent with its differencing order")
    return _untransform(_integrate(w_forecast, state), state)


def restore_log_difference(w, state: TransformState) -> np.ndarray:
    """Rebuild the full original series from its transformed values."""
    if len(state.initial_values) != state.diff_order:
        raise ValueError("transform state does not carry initial values")
    z = np.asarray(w, dtype=float)
    for k in range(state.diff_order - 1, -1, -1):
        z = np.concatenate([[state.initial_values[k]], state.initial_values[k] + np.cumsum(z)])
    return _untransform(z, state)


@dataclass(frozen=True)
class ScalerState:
    min: float
    max: float

    def __post_init__(self):
        if not self.max > self.min:
            raise DegenerateError("scaler needs max > min")

    def transform(self, values) -> np.ndarray:
        return (np.asarray(values, dtype=float) - self.min) / (self.max - self.min)

    def inverse(self, scaled) -> np.ndarray:
        return np.asarray(scaled, dtype=float) * (self.max - self.min) + self.min


def minmax_scale(series) -> tuple[np.ndarray, ScalerState]:
    y = np.asarray(series, dtype=float)
    lo, hi = float(y.min()), float(y.max())
    if lo == hi:
        raise DegenerateError("cannot min-max scale a constant series")
    state = ScalerState(lo, hi)
    return state.transform(y), state


def minmax_invert(scaled, state: ScalerState) -> np.ndarray:
    return state.inverse(scaled)
