from datetime import date
from pathlib import Path

import pytest

from ecforecast.config import PRESETS, load_config, preset_params
from ecforecast.errors import ConfigurationError
from ecforecast.forecaster import default_params, tuned_spec
from ecforecast.ingest import classify_container as classify
from ecforecast.models.base import ModelFamily
from ecforecast.models.lstm import REDUCED_NETWORK
from ecforecast.series import ContainerCategory


def write_ini(tmp_path, text, name="ecf.ini"):
    path = tmp_path / name
    path.write_text(text)
    return path


def test_defaults_without_file(tmp_path, monkeypatch):
    monkeypatch.chdir(tmp_path)
    cfg = load_config(environ={})
    assert cfg.timezone == "UTC" and cfg.seed == 0 and cfg.port == 8080
    assert cfg.calendar.weekend_days == frozenset({5, 6})
    for family in ModelFamily:
        assert cfg.models[family].params == tuned_spec(family).params
    assert cfg.artifacts_dir == tmp_path / "artifacts"


def test_full_file(tmp_path):
    (tmp_path / "stock.csv").write_text("timestamp,stock\n")
    (tmp_path / "hol.csv").write_text("name,date\nnatal_day,2023-08-07\n")
    path = write_ini(tmp_path, """
[general]
timezone = America/Halifax
seed = 7
[calendar]
weekend_days = 6
holidays_file = hol.csv
[holidays]
canada_day = 2023-07-01, 2024-07-01  ; inline comment
[paths]
data = stock.csv
artifacts = store
[service]
port = 9001
[model_arima]
q = 3
[model_lstm]
preset = reduced
epochs = 4
[model_decomposable]
preset = default
daily = true
""")
    cfg = load_config(path, environ={})
    assert cfg.timezone == "America/Halifax" and cfg.seed == 7 and cfg.port == 9001
    assert cfg.calendar.weekend_days == frozenset({6})
    assert cfg.calendar.holidays["natal_day"] == frozenset({date(2023, 8, 7)})
    assert cfg.calendar.holidays["canada_day"] == frozenset({date(2023, 7, 1), date(2024, 7, 1)})
    assert cfg.data_path == tmp_path / "stock.csv"
    assert cfg.artifacts_dir == tmp_path / "store"
    arima = cfg.models[ModelFamily.ARIMA].params
    assert arima.q == 3 and arima.p == tuned_spec("arima").params.p
    lstm = cfg.models[ModelFamily.LSTM].params
    assert lstm.epochs == 4 and lstm.timesteps == REDUCED_NETWORK.timesteps
    dec = cfg.models[ModelFamily.DECOMPOSABLE].params
    assert {s.name: s.enabled for s in dec.seasonalities}["daily"]
    assert cfg.model_spec("lstm").seed == 7 and cfg.model_spec("lstm", 3).seed == 3


def test_environment_overrides_file(tmp_path):
    path = write_ini(tmp_path, "[service]\nport = 9001\n")
    cfg = load_config(path, environ={"ECF_SERVICE__PORT": "9100", "ECF_MODEL_LSTM__EPOCHS": "3",
                                     "OTHER": "x"})
    assert cfg.port == 9100 and cfg.models[ModelFamily.LSTM].params.epochs == 3


def test_classification_override_takes_precedence(tmp_path):
    path = write_ini(tmp_path, "[classification]\nR = special\n")
    cfg = load_config(path, environ={})
    assert classify("45R1", cfg.classification) is ContainerCategory.SPECIAL
    assert classify("22G1", cfg.classification) is ContainerCategory.STANDARD


def test_presets():
    assert PRESETS == ("paper", "default", "reduced")
    assert preset_params("lstm", "reduced") == REDUCED_NETWORK
    assert preset_params("arima", "default") == default_params(ModelFamily.ARIMA)
    with pytest.raises(ConfigurationError):
        preset_params("arima", "reduced")


@pytest.mark.parametrize("text", [
    "[general]\ntimezone = Mars/Olympus\n",
    "[general]\nseed = many\n",
    "[model_arima]\npreset = huge\n",
    "[model_arima]\nwarp = 9\n",
    "[model_lstm]\nhidden = 0\n",
    "[model_naive]\nx = 1\n",
    "[holidays]\nbad = 2023-13-01\n",
    "[classification]\nRT = reefer\n",
    "[classification]\nR = frozen\n",
    "[service]\nport = 70000\n",
    "[paths]\ndata = missing.csv\n",
    "[calendar]\nholidays_file = nope.csv\n",
    "not an ini file",
])
def test_bad_settings_are_configuration_errors(tmp_path, text):
    with pytest.raises((ConfigurationError, OSError)) as info:
        load_config(write_ini(tmp_path, text), environ={})
    if text.startswith("[calendar]"):
        assert isinstance(info.value, (ConfigurationError, FileNotFoundError))
    else:
        assert isinstance(info.value, ConfigurationError)


def test_missing_config_file(tmp_path):
    with pytest.raises(ConfigurationError, match="not found"):
        load_config(Path(tmp_path / "absent.ini"), environ={})
