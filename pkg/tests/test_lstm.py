import numpy as np
import pytest

from conftest import make_series
from ecforecast.errors import DegenerateError, FitFailureError, InsufficientDataError
from ecforecast.models.lstm import (
    LstmFit,
    LstmLayerParams,
    LstmState,
    Network,
    NetworkConfig,
    bptt_gradients,
    cell_forward,
    forecast_lstm,
    forward,
    gradient_check,
    make_windows,
    train,
)
from ecforecast.stats import ScalerState

SMALL = NetworkConfig(timesteps=10, hidden=8, layers=2)


def straight_line_cell(x, S_prev, C_prev, U, W, b):
    """The six gate equations written out gate by gate with scipy-free math."""
    H = W.shape[0]

    def sig(v):
        return 1.0 / (1.0 + np.exp(-v))

    Uf, Ui, Uo, Uc = (U[:, k * H:(k + 1) * H] for k in range(4))
    Wf, Wi, Wo, Wc = (W[:, k * H:(k + 1) * H] for k in range(4))
    bf, bi, bo, bc = (b[k * H:(k + 1) * H] for k in range(4))
    f = sig(x @ Uf + S_prev @ Wf + bf)
    i = sig(x @ Ui + S_prev @ Wi + bi)
    o = sig(x @ Uo + S_prev @ Wo + bo)
    c_tilde = np.tanh(x @ Uc + S_prev @ Wc + bc)
    C = f * C_prev + i * c_tilde
    S = o * np.tanh(C)
    return S, C, (f, i, o, c_tilde)


def zero_state(h, batch=None):
    shape = (h,) if batch is None else (batch, h)
    return LstmState(np.zeros(shape), np.zeros(shape))


def test_zero_parameters_give_half_gates():
    params = LstmLayerParams.zeros(1, 4)
    state, cache = cell_forward(np.array([0.7]), zero_state(4), params)
    _, _, _, f, i, o, c_tilde, _ = cache
    assert np.all(f == 0.5) and np.all(i == 0.5) and np.all(o == 0.5)
    assert np.all(c_tilde == 0.0)
    assert np.all(state.C == 0.0) and np.all(state.S == 0.0)


def test_zero_parameters_halve_previous_cell():
    c = np.array([0.4, -1.2, 2.0])
    state, _ = cell_forward(np.array([3.0]), LstmState(np.zeros(3), c), LstmLayerParams.zeros(1, 3))
    assert np.array_equal(state.C, 0.5 * c)
    assert np.allclose(state.S, 0.5 * np.tanh(0.5 * c), rtol=0, atol=1e-15)


@pytest.mark.parametrize("seed", range(5))
def test_cell_matches_straight_line_equations(seed):
    rng = np.random.default_rng(seed)
    d, H = 3, 5
    params = LstmLayerParams(rng.normal(size=(d, 4 * H)), rng.normal(size=(H, 4 * H)),
                             rng.normal(size=4 * H))
    x, S, C = rng.normal(size=d), rng.normal(size=H), rng.normal(size=H)
    state, cache = cell_forward(x, LstmState(S, C), params)
    S2, C2, gates = straight_line_cell(x, S, C, params.U, params.W, params.b)
    assert np.allclose(state.S, S2, rtol=0, atol=1e-12)
    assert np.allclose(state.C, C2, rtol=0, atol=1e-12)
    for ours, theirs in zip(cache[3:7], gates):
        assert np.allclose(ours, theirs, rtol=0, atol=1e-12)
    f, i, o, c_tilde = cache[3:7]
    assert np.all((f > 0) & (f < 1) & (i > 0) & (i < 1) & (o > 0) & (o < 1))
    assert np.all(np.abs(c_tilde) < 1) and np.all(np.abs(state.S) < 1)


def test_cell_shape_mismatch():
    with pytest.raises(ValueError):
        cell_forward(np.zeros(2), zero_state(4), LstmLayerParams.zeros(1, 4))


def test_zero_network_outputs_bias():
    net = Network.zeros(1, 6)
    net.head_b = 0.37
    pred, _ = forward(np.linspace(0, 1, 12), net)
    assert pred == 0.37


def test_zeroed_second_layer_hides_first_layer():
    rng = np.random.default_rng(1)
    net = Network.initialise(SMALL, rng, random_head=True)
    net.layers[1] = LstmLayerParams.zeros(8, 8)
    net.head_b = -0.2
    pred, _ = forward(rng.uniform(size=10), net)
    assert pred == -0.2


def test_forward_is_bitwise_repeatable():
    rng = np.random.default_rng(2)
    net = Network.initialise(SMALL, rng, random_head=True)
    seq = rng.uniform(size=(4, 10))
    a, _ = forward(seq, net)
    b, _ = forward(seq, net)
    assert a.tobytes() == b.tobytes()


def test_batched_forward_matches_single_sequences():
    rng = np.random.default_rng(3)
    net = Network.initialise(SMALL, rng, random_head=True)
    seq = rng.uniform(size=(3, 10))
    batch, _ = forward(seq, net)
    assert np.allclose(batch, [forward(s, net)[0] for s in seq], rtol=0, atol=1e-14)


def test_non_finite_activation_reports_timestep():
    net = Network.zeros(1, 2)
    seq = np.zeros(6)
    seq[4] = np.nan
    net.layers[0].U[:] = 1.0
    with pytest.raises(FitFailureError) as info:
        forward(seq, net)
    assert info.value.diagnostics["timestep"] == 4


def test_zero_network_gradients():
    net = Network.zeros(2, 4)
    net.head_b = 0.8
    loss, g = bptt_gradients(np.full((3, 5), 0.5), np.zeros(3), net)
    assert loss == pytest.approx(0.5 * 0.8**2)
    assert g.head_b == pytest.approx(0.8)
    assert not any(a.any() for a in g.arrays())


def test_doubling_targets_moves_only_head_bias_at_zero_weights():
    net = Network.zeros(2, 4)
    seqs = np.random.default_rng(4).uniform(size=(5, 6))
    t = np.random.default_rng(5).uniform(size=5)
    _, g1 = bptt_gradients(seqs, t, net)
    _, g2 = bptt_gradients(seqs, 2 * t, net)
    assert g2.head_b - g1.head_b == pytest.approx(-t.mean())
    assert all(np.array_equal(a, b) for a, b in zip(g1.arrays(), g2.arrays()))


def test_gradient_check_seeded_network():
    assert gradient_check(SMALL, seed=0) < 1e-4


@pytest.mark.parametrize("seed", range(1, 6))
def test_gradient_check_other_seeds_on_material_gradients(seed):
    _, d = gradient_check(SMALL, seed=seed, return_details=True)
    big = np.maximum(np.abs(d["analytic"]), np.abs(d["numeric"])) > 1e-6
    assert d["relative"][big].max() < 1e-4
    assert np.abs(d["analytic"] - d["numeric"]).max() < 1e-9


def test_gradient_check_zero_network_is_exact():
    net = Network.zeros(2, 3)
    data = (np.random.default_rng(0).uniform(size=(4, 10)), np.zeros(4))
    worst, d = gradient_check(SMALL, net=net, data=data, return_details=True)
    zero = d["analytic"] == 0
    assert zero.sum() > 0 and np.all(d["numeric"][zero] == 0)


def test_gradient_independent_of_batch_order():
    rng = np.random.default_rng(6)
    net = Network.initialise(SMALL, rng, random_head=True)
    seqs, t = rng.uniform(size=(6, 10)), rng.uniform(size=6)
    perm = rng.permutation(6)
    _, g1 = bptt_gradients(seqs, t, net)
    _, g2 = bptt_gradients(seqs[perm], t[perm], net)
    for a, b in zip(g1.arrays() + [np.array(g1.head_b)], g2.arrays() + [np.array(g2.head_b)]):
        assert np.allclose(a, b, rtol=1e-12, atol=1e-15)


def test_windows_pair_inputs_with_next_value():
    X, y = make_windows(np.arange(6.0), 3)
    assert X.tolist() == [[0, 1, 2], [1, 2, 3], [2, 3, 4]] and y.tolist() == [3, 4, 5]


def test_sine_overfit():
    t = np.arange(200)
    y = 100 + 50 * np.sin(2 * np.pi * t / 50)
    cfg = NetworkConfig(timesteps=20, hidden=16, layers=2, epochs=500,
                        batch_size=32, seed=0)
    fit = train(y, cfg)
    assert fit.final_train_loss < 1e-3


def test_training_is_deterministic():
    y = 100 + 20 * np.sin(np.arange(120) / 4.0)
    cfg = NetworkConfig(timesteps=12, hidden=6, layers=2, epochs=5, batch_size=16, seed=11)
    a, b = train(y, cfg), train(y, cfg)
    assert a.final_train_loss == b.final_train_loss
    assert a.loss_history == b.loss_history
    assert a.predict_values(24).tobytes() == b.predict_values(24).tobytes()


def test_zero_epochs_forecasts_unscaled_bias():
    y = np.arange(50.0) + 10
    fit = train(y, NetworkConfig(timesteps=5, hidden=4, layers=1, epochs=0))
    assert not fit.net.head_w.any() and fit.net.head_b == 0.0
    assert np.all(fit.predict_values(10) == fit.scaler.inverse(0.0)) and fit.scaler.min == 10.0


def test_single_step_is_direct_forward():
    y = 50 + 10 * np.cos(np.arange(80) / 3.0)
    fit = train(y, NetworkConfig(timesteps=8, hidden=4, layers=2, epochs=3))
    direct, _ = forward(fit.scaler.transform(y[-8:]), fit.net)
    assert fit.predict_values(1)[0] == pytest.approx(max(0.0, fit.scaler.inverse(direct)), abs=1e-12)


def test_identity_network_on_constant_history_stays_flat():
    level = 420.0
    scaler = ScalerState(300.0, 500.0)
    net = Network.zeros(2, 4)
    net.head_b = float(scaler.transform(level))
    fit = LstmFit(net, scaler, NetworkConfig(timesteps=6, hidden=4, layers=2), 0.0,
                  np.full(6, level), np.datetime64("2024-01-01T00", "h"))
    out = forecast_lstm(fit, make_series(np.full(30, 420)), 48).values
    assert np.allclose(out, level, rtol=0, atol=1e-6)


def test_constant_training_series_is_degenerate():
    with pytest.raises(DegenerateError):
        train(np.full(60, 5.0), NetworkConfig(timesteps=5, hidden=2, layers=1, epochs=1))


def test_training_errors():
    with pytest.raises(InsufficientDataError):
        train(np.arange(15.0), NetworkConfig(timesteps=10))
    fit = train(np.arange(30.0), NetworkConfig(timesteps=5, hidden=2, layers=1, epochs=1))
    with pytest.raises(ValueError):
        fit.predict_values(0)
    with pytest.raises(InsufficientDataError):
        fit.predict_values(3, history=np.ones(2))


def test_training_window_uses_latest_hours():
    y = np.r_[np.full(100, 1000.0), 10 + np.arange(40.0)]
    fit = train(y, NetworkConfig(timesteps=5, hidden=2, layers=1, epochs=1, train_window_hours=40))
    assert fit.scaler.max == 49.0 and fit.scaler.min == 10.0


def test_dict_round_trip():
    y = 50 + 10 * np.cos(np.arange(80) / 3.0)
    fit = train(y, NetworkConfig(timesteps=8, hidden=4, layers=2, epochs=2))
    back = LstmFit.from_dict(fit.to_dict())
    assert np.array_equal(back.predict_values(30), fit.predict_values(30))
