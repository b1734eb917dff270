import json
import warnings

import numpy as np
import pytest

from conftest import daily_series, small_specs
from ecforecast.artifacts import (
    FORMAT_VERSION,
    artifact_bytes,
    artifact_path,
    load_artifact,
    make_artifact,
    parse_artifact,
    save_artifact,
    series_fingerprint,
)
from ecforecast.errors import ArtifactVersionError, IntegrityError
from ecforecast.forecaster import fit

SPECS = small_specs()
IDS = [s.family.value for s in SPECS]


@pytest.fixture(scope="module")
def fitted():
    series = daily_series()
    return series, {s.family: fit(s, series) for s in SPECS}


@pytest.mark.parametrize("spec", SPECS, ids=IDS)
def test_round_trip_predicts_identically(fitted, spec, tmp_path):
    series, fits = fitted
    original = fits[spec.family]
    path = artifact_path(tmp_path, "standard", spec.family)
    save_artifact(original, path, series)
    back = load_artifact(path, series)
    assert back.family is spec.family and back.format_version == FORMAT_VERSION
    a, b = original.predict_values(168), back.fit.predict_values(168)
    assert np.allclose(a, b, rtol=0, atol=1e-12)
    assert back.fit.origin == original.origin and back.category is series.category


@pytest.mark.parametrize("spec", SPECS, ids=IDS)
def test_resaving_is_byte_identical(fitted, spec, tmp_path):
    series, fits = fitted
    first = tmp_path / "a.json"
    save_artifact(fits[spec.family], first, series)
    second = tmp_path / "b.json"
    save_artifact(load_artifact(first), second)
    assert first.read_bytes() == second.read_bytes()


def saved(fitted, tmp_path, family="arima"):
    series, fits = fitted
    path = tmp_path / "m.json"
    save_artifact(make_artifact(fits[next(s.family for s in SPECS if s.family.value == family)],
                                series, "2024-01-01T00:00:00Z"), path)
    return path


def test_truncated_file_is_integrity_error(fitted, tmp_path):
    path = saved(fitted, tmp_path)
    data = path.read_bytes()
    path.write_bytes(data[: len(data) // 2])
    with pytest.raises(IntegrityError):
        load_artifact(path)


def test_tampered_value_fails_hash(fitted, tmp_path):
    path = saved(fitted, tmp_path)
    doc = json.loads(path.read_bytes())
    doc["payload"]["params"]["theta0"] = 0.5
    path.write_text(json.dumps(doc))
    with pytest.raises(IntegrityError, match="hash"):
        load_artifact(path)


def test_missing_hash_is_integrity_error():
    with pytest.raises(IntegrityError):
        parse_artifact(b'{"format_version": 1}')


def test_other_version_is_rejected(fitted, tmp_path):
    path = saved(fitted, tmp_path)
    doc = json.loads(path.read_bytes())
    doc["format_version"] = FORMAT_VERSION + 1
    path.write_text(json.dumps(doc))
    with pytest.raises(ArtifactVersionError, match="version"):
        load_artifact(path)


def test_fingerprint_mismatch_warns(fitted, tmp_path):
    path = saved(fitted, tmp_path)
    other = daily_series(seed=1)
    with pytest.warns(UserWarning, match="fingerprint"):
        load_artifact(path, other)
    series, _ = fitted
    with warnings.catch_warnings():
        warnings.simplefilter("error")
        assert load_artifact(path, series).check_series(series)


def test_fingerprint_sensitive_to_values_and_start():
    a = daily_series()
    assert series_fingerprint(a) == series_fingerprint(daily_series())
    assert series_fingerprint(a) != series_fingerprint(daily_series(start="2024-01-01T01"))
    assert series_fingerprint(a) != series_fingerprint(daily_series(seed=2))


def test_bytes_are_deterministic(fitted):
    series, fits = fitted
    a = make_artifact(fits[SPECS[1].family], series, "2024-01-01T00:00:00Z")
    assert artifact_bytes(a) == artifact_bytes(parse_artifact(artifact_bytes(a)))


def test_conventional_path(tmp_path):
    assert artifact_path(tmp_path, "reefer", "lstm") == tmp_path / "reefer" / "lstm.json"
