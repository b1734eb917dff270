"""Stacked LSTM regressor in numpy: gate equations, BPTT, Adam training and
recursive multi-step forecasting.

Each layer keeps its four gates packed column-wise in the order
forget, input, output, candidate: ``U`` is ``(input_dim, 4H)``, ``W`` is
``(H, 4H)`` and ``b`` is ``(4H,)``.
"""

from __future__ import annotations

import logging
from dataclasses import dataclass, field, replace

import numpy as np

from ..errors import FitFailureError, InsufficientDataError
from ..series import ContainerCategory, StockSeries
from ..stats import ScalerState, minmax_scale
from .base import ForecastResult, ModelFamily, ModelSpec

logger = logging.getLogger(__name__)

GATES = ("f", "i", "o", "c")


@dataclass(frozen=True)
class NetworkConfig:
    timesteps: int = 150
    layers: int = 5
    hidden: int = 32
    epochs: int = 200
    learning_rate: float = 1e-3
    batch_size: int = 32
    seed: int = 0
    # Use only the most recent hours of the training series (None = all).
    train_window_hours: int | None = None

    def __post_init__(self):
        for name in ("timesteps", "layers", "hidden", "batch_size"):
            if int(getattr(self, name)) < 1:
                raise ValueError(f"{name} must be positive")
        if self.epochs < 0 or not self.learning_rate > 0:
            raise ValueError("epochs must be >= 0 and learning_rate > 0")

    @property
    def min_length(self) -> int:
        return 2 * self.timesteps


TUNED_NETWORK = NetworkConfig(timesteps=150, epochs=200, layers=5)

# Desktop-scale settings for full cross-validation runs: two days of context,
# a small two-layer network and the latest eight weeks of training data.
REDUCED_NETWORK = NetworkConfig(timesteps=48, layers=2, hidden=16, epochs=50, batch_size=64,
                                train_window_hours=1344)


@dataclass
class LstmLayerParams:
    U: np.ndarray
    W: np.ndarray
    b: np.ndarray

    def __post_init__(self):
        hidden4 = self.W.shape[1]
        if (hidden4 % 4 or self.W.shape[0] * 4 != hidden4 or self.U.shape[1] != hidden4
                or self.b.shape != (hidden4,)):
            raise ValueError("inconsistent LSTM layer shapes")

    @property
    def hidden(self) -> int:
        return self.W.shape[0]

    @property
    def input_dim(self) -> int:
        return self.U.shape[0]

    def gate(self, name: str) -> tuple:
        """``(U, W, b)`` blocks of one gate as views."""
        H = self.hidden
        k = GATES.index(name)
        sl = slice(k * H, (k + 1) * H)
        return self.U[:, sl], self.W[:, sl], self.b[sl]

    def arrays(self) -> tuple:
        return (self.U, self.W, self.b)

    def copy(self) -> "LstmLayerParams":
        return LstmLayerParams(self.U.copy(), self.W.copy(), self.b.copy())

    @classmethod
    def zeros(cls, input_dim: int, hidden: int) -> "LstmLayerParams":
        return cls(np.zeros((input_dim, 4 * hidden)), np.zeros((hidden, 4 * hidden)),
                   np.zeros(4 * hidden))


@dataclass
class Network:
    layers: list
    head_w: np.ndarray
    head_b: float

    def arrays(self) -> list:
        out = []
        for layer in self.layers:
            out.extend(layer.arrays())
        out.append(self.head_w)
        return out

    def copy(self) -> "Network":
        return Network([l.copy() for l in self.layers], self.head_w.copy(), float(self.head_b))

    @classmethod
    def zeros(cls, layers: int, hidden: int, input_dim: int = 1) -> "Network":
        stack = [LstmLayerParams.zeros(input_dim if i == 0 else hidden, hidden)
                 for i in range(layers)]
        return cls(stack, np.zeros(hidden), 0.0)

    @classmethod
    def initialise(cls, config: NetworkConfig, rng: np.random.Generator,
                   input_dim: int = 1, random_head: bool = False) -> "Network":
        H = config.hidden
        bound = 1.0 / np.sqrt(H)
        stack = []
        for i in range(config.layers):
            d = input_dim if i == 0 else H
            b = np.zeros(4 * H)
            b[:H] = 1.0  # forget gate
            stack.append(LstmLayerParams(rng.uniform(-bound, bound, (d, 4 * H)),
                                         rng.uniform(-bound, bound, (H, 4 * H)), b))
        head_w = rng.uniform(-bound, bound, H) if random_head else np.zeros(H)
        return cls(stack, head_w, 0.0)


@dataclass(frozen=True)
class LstmState:
    S: np.ndarray
    C: np.ndarray


def _sigmoid(x):
    return 0.5 * (1.0 + np.tanh(0.5 * x))


def cell_forward(x, prev: LstmState, params: LstmLayerParams):
    """One LSTM step; works on a single vector or a batch of rows."""
    x = np.asarray(x, dtype=float)
    if x.shape[-1] != params.input_dim or prev.S.shape[-1] != params.hidden:
        raise ValueError("input or state shape does not match layer parameters")
    H = params.hidden
    a = x @ params.U + prev.S @ params.W + params.b
    f = _sigmoid(a[..., :H])
    i = _sigmoid(a[..., H:2 * H])
    o = _sigmoid(a[..., 2 * H:3 * H])
    c_tilde = np.tanh(a[..., 3 * H:])
    C = prev.C * f + i * c_tilde
    tanh_C = np.tanh(C)
    S = o * tanh_C
    cache = (x, prev.S, prev.C, f, i, o, c_tilde, tanh_C)
    return LstmState(S, C), cache


def forward(sequence, net: Network):
    """Run the stack over ``sequence`` of shape ``(B, T)``/``(B, T, d)`` or ``(T,)``.

    Returns predictions of shape ``(B,)`` (a scalar for a single sequence)
    and the per-layer caches needed by :func:`bptt_gradients`.
    """
    seq = np.asarray(sequence, dtype=float)
    single = seq.ndim == 1
    if single:
        seq = seq[None, :, None]
    elif seq.ndim == 2:
        seq = seq[:, :, None]
    B, T, _ = seq.shape
    inputs = [seq[:, t, :] for t in range(T)]
    caches = []
    for depth, layer in enumerate(net.layers):
        state = LstmState(np.zeros((B, layer.hidden)), np.zeros((B, layer.hidden)))
        layer_cache, outputs = [], []
        for t in range(T):
            state, cache = cell_forward(inputs[t], state, layer)
            layer_cache.append(cache)
            outputs.append(state.S)
        stacked = np.stack(outputs)
        if not np.all(np.isfinite(stacked)):
            bad = int(np.argmax(~np.all(np.isfinite(stacked), axis=(1, 2))))
            raise FitFailureError(f"non-finite activation in layer {depth} at timestep {bad}",
                                  {"layer": depth, "timestep": bad})
        caches.append(layer_cache)
        inputs = outputs
    top = inputs[-1]
    pred = top @ net.head_w + net.head_b
    return (float(pred[0]) if single else pred), (caches, top)


def loss_value(pred, target) -> float:
    """Half the mean squared error over the batch."""
    r = np.asarray(pred, dtype=float) - np.asarray(target, dtype=float)
    return 0.5 * float(np.mean(r * r))


def bptt_gradients(sequences, targets, net: Network):
    """Exact gradients of half the batch-mean squared error.

    Returns ``(loss, grads)`` where ``grads`` mirrors :class:`Network`.
    """
    seqs = np.asarray(sequences, dtype=float)
    if seqs.ndim == 1:
        seqs = seqs[None, :]
    targets = np.atleast_1d(np.asarray(targets, dtype=float))
    B = seqs.shape[0]
    pred, (caches, top) = forward(seqs, net)
    dpred = (pred - targets) / B
    loss = loss_value(pred, targets)

    grads = Network.zeros(0, net.head_w.size)
    grads.head_w = top.T @ dpred
    grads.head_b = float(dpred.sum())
    T = len(caches[0]) if caches else 0
    d_out = [np.zeros_like(top) for _ in range(T)]
    d_out[-1] = dpred[:, None] * net.head_w[None, :]

    layer_grads = []
    for layer, cache in zip(reversed(net.layers), reversed(caches)):
        H = layer.hidden
        gU, gW, gb = np.zeros_like(layer.U), np.zeros_like(layer.W), np.zeros_like(layer.b)
        dS_next = np.zeros((B, H))
        dC_next = np.zeros((B, H))
        d_in = [None] * T
        for t in range(T - 1, -1, -1):
            x, S_prev, C_prev, f, i, o, c_tilde, tanh_C = cache[t]
            dS = d_out[t] + dS_next
            do = dS * tanh_C
            dC = dC_next + dS * o * (1.0 - tanh_C * tanh_C)
            df = dC * C_prev
            di = dC * c_tilde
            dc = dC * i
            da = np.concatenate([
                df * f * (1.0 - f),
                di * i * (1.0 - i),
                do * o * (1.0 - o),
                dc * (1.0 - c_tilde * c_tilde),
            ], axis=1)
            gU += x.T @ da
            gW += S_prev.T @ da
            gb += da.sum(axis=0)
            d_in[t] = da @ layer.U.T
            dS_next = da @ layer.W.T
            dC_next = dC * f
        layer_grads.append(LstmLayerParams(gU, gW, gb))
        d_out = d_in
    grads.layers = layer_grads[::-1]
    return loss, grads


def _flat_views(net: Network):
    """(array, index) handles for every scalar parameter, head bias last."""
    handles = []
    for arr in net.arrays():
        for idx in np.ndindex(arr.shape):
            handles.append((arr, idx))
    return handles


def gradient_check(config: NetworkConfig | None = None, seed: int = 0, batch: int = 4,
                   eps: float = 1e-5, net: Network | None = None, data=None,
                   return_details: bool = False):
    """Largest relative gap between BPTT and central-difference gradients."""
    config = config or NetworkConfig(timesteps=10, hidden=8, layers=2)
    rng = np.random.default_rng(seed)
    if net is None:
        net = Network.initialise(config, rng, random_head=True)
        net.head_b = float(rng.uniform(-0.5, 0.5))
    if data is None:
        seqs = rng.uniform(0.0, 1.0, (batch, config.timesteps))
        targets = rng.uniform(0.0, 1.0, batch)
    else:
        seqs, targets = data
    _, grads = bptt_gradients(seqs, targets, net)

    def loss_at():
        pred, _ = forward(seqs, net)
        return loss_value(pred, targets)

    analytic, numeric = [], []
    for (arr, idx), (garr, _) in zip(_flat_views(net), _flat_views(grads)):
        orig = arr[idx]
        arr[idx] = orig + eps
        lp = loss_at()
        arr[idx] = orig - eps
        lm = loss_at()
        arr[idx] = orig
        analytic.append(garr[idx])
        numeric.append((lp - lm) / (2 * eps))
    orig = net.head_b
    net.head_b = orig + eps
    lp = loss_at()
    net.head_b = orig - eps
    lm = loss_at()
    net.head_b = orig
    analytic.append(grads.head_b)
    numeric.append((lp - lm) / (2 * eps))

    a, n = np.array(analytic), np.array(numeric)
    rel = np.abs(a - n) / np.maximum(np.maximum(np.abs(a), np.abs(n)), 1e-8)
    worst = float(rel.max())
    if return_details:
        return worst, {"analytic": a, "numeric": n, "relative": rel}
    return worst


class _Adam:
    def __init__(self, net: Network, lr: float, beta1=0.9, beta2=0.999, eps=1e-8):
        self.lr, self.beta1, self.beta2, self.eps = lr, beta1, beta2, eps
        self.m = [np.zeros_like(a) for a in net.arrays()] + [0.0]
        self.v = [np.zeros_like(a) for a in net.arrays()] + [0.0]
        self.t = 0

    def step(self, net: Network, grads: Network):
        self.t += 1
        c1 = 1.0 - self.beta1 ** self.t
        c2 = 1.0 - self.beta2 ** self.t
        params = net.arrays()
        gs = grads.arrays()
        for k, (p, g) in enumerate(zip(params, gs)):
            self.m[k] = self.beta1 * self.m[k] + (1 - self.beta1) * g
            self.v[k] = self.beta2 * self.v[k] + (1 - self.beta2) * g * g
            p -= self.lr * (self.m[k] / c1) / (np.sqrt(self.v[k] / c2) + self.eps)
        g = grads.head_b
        self.m[-1] = self.beta1 * self.m[-1] + (1 - self.beta1) * g
        self.v[-1] = self.beta2 * self.v[-1] + (1 - self.beta2) * g * g
        net.head_b -= self.lr * (self.m[-1] / c1) / (np.sqrt(self.v[-1] / c2) + self.eps)


def make_windows(scaled, timesteps: int):
    """Supervised pairs: ``timesteps`` inputs, next value as target."""
    scaled = np.asarray(scaled, dtype=float)
    n = scaled.size - timesteps
    idx = np.arange(timesteps)[None, :] + np.arange(n)[:, None]
    return scaled[idx], scaled[timesteps:]


@dataclass(eq=False)
class LstmFit:
    net: Network
    scaler: ScalerState
    config: NetworkConfig
    final_train_loss: float
    history: np.ndarray  # last `timesteps` raw observations
    origin: np.datetime64
    category: ContainerCategory = ContainerCategory.STANDARD
    loss_history: list = field(default_factory=list)

    @property
    def layers(self) -> list:
        return self.net.layers

    @property
    def spec(self) -> ModelSpec:
        return ModelSpec(ModelFamily.LSTM, self.config, self.config.seed)

    def predict_values(self, horizon_hours: int, history=None) -> np.ndarray:
        hist = self.history if history is None else np.asarray(history, dtype=float)
        T = self.config.timesteps
        if hist.size < T:
            raise InsufficientDataError(f"forecasting needs the last {T} observations")
        if horizon_hours < 1:
            raise ValueError("horizon must be at least one hour")
        window = list(self.scaler.transform(hist[-T:]))
        out = np.empty(horizon_hours)
        for h in range(horizon_hours):
            pred, _ = forward(np.asarray(window), self.net)
            out[h] = pred
            window.pop(0)
            window.append(pred)
        return np.maximum(self.scaler.inverse(out), 0.0)

    def to_dict(self) -> dict:
        return {
            "config": config_to_dict(self.config),
            "layers": [{"U": l.U.tolist(), "W": l.W.tolist(), "b": l.b.tolist(),
                        "shape": [l.input_dim, l.hidden]} for l in self.net.layers],
            "head": {"w": self.net.head_w.tolist(), "b": self.net.head_b},
            "scaler": {"min": self.scaler.min, "max": self.scaler.max},
            "final_train_loss": self.final_train_loss,
            "history": self.history.tolist(),
            "origin": str(self.origin),
            "category": self.category.value,
        }

    @classmethod
    def from_dict(cls, d: dict) -> "LstmFit":
        layers = [LstmLayerParams(np.asarray(l["U"], float).reshape(l["shape"][0], -1),
                                  np.asarray(l["W"], float).reshape(l["shape"][1], -1),
                                  np.asarray(l["b"], float)) for l in d["layers"]]
        net = Network(layers, np.asarray(d["head"]["w"], float), float(d["head"]["b"]))
        return cls(net, ScalerState(d["scaler"]["min"], d["scaler"]["max"]),
                   config_from_dict(d["config"]), d["final_train_loss"],
                   np.asarray(d["history"], float), np.datetime64(d["origin"], "h"),
                   ContainerCategory.parse(d["category"]))


def config_to_dict(c: NetworkConfig) -> dict:
    return {"timesteps": c.timesteps, "layers": c.layers, "hidden": c.hidden, "epochs": c.epochs,
            "learning_rate": c.learning_rate, "batch_size": c.batch_size, "seed": c.seed,
            "train_window_hours": c.train_window_hours}


def config_from_dict(d: dict) -> NetworkConfig:
    return NetworkConfig(**d)


def train(series, config: NetworkConfig = NetworkConfig()) -> LstmFit:
    """Fit the network on one-step-ahead windows of the min-max scaled series.

    ``series`` is a :class:`StockSeries` or a plain vector of values.
    """
    if isinstance(series, StockSeries):
        values, origin, category = series.values.astype(float), series.origin, series.category
    else:
        values = np.asarray(series, dtype=float)
        origin, category = np.datetime64(0, "h") + (values.size - 1), ContainerCategory.STANDARD
    if config.train_window_hours is not None:
        values_fit = values[-max(config.train_window_hours, config.min_length):]
    else:
        values_fit = values
    if values_fit.size < config.min_length:
        raise InsufficientDataError(
            f"LSTM with {config.timesteps} timesteps needs at least {config.min_length} points, "
            f"got {values_fit.size}")
    scaled, scaler = minmax_scale(values_fit)
    X, y = make_windows(scaled, config.timesteps)
    rng = np.random.default_rng(config.seed)
    net = Network.initialise(config, rng)
    opt = _Adam(net, config.learning_rate)
    n = X.shape[0]
    losses = []
    for epoch in range(config.epochs):
        order = rng.permutation(n)
        total = 0.0
        for lo in range(0, n, config.batch_size):
            batch = order[lo:lo + config.batch_size]
            loss, grads = bptt_gradients(X[batch], y[batch], net)
            if not np.isfinite(loss):
                raise FitFailureError(f"non-finite loss at epoch {epoch}, batch {lo // config.batch_size}",
                                      {"epoch": epoch, "batch": lo // config.batch_size})
            opt.step(net, grads)
            total += loss * batch.size
        losses.append(2.0 * total / n)
        logger.debug("epoch %d mse %.6g", epoch, losses[-1])
    pred, _ = forward(X, net)
    final = float(np.mean((pred - y) ** 2))
    return LstmFit(net, scaler, config, final, values[-config.timesteps:].copy(), origin,
                   category, losses)


def forecast_lstm(fit: LstmFit, series: StockSeries | None = None, horizon_hours: int = 168) -> ForecastResult:
    """Recursive one-step forecasts seeded with the last ``timesteps`` observations."""
    history = None if series is None else series.values.astype(float)
    origin = fit.origin if series is None else series.origin
    values = fit.predict_values(horizon_hours, history)
    return ForecastResult(origin, values, fit.spec, fit.category)


def with_seed(config: NetworkConfig, seed: int) -> NetworkConfig:
    return replace(config, seed=seed)
