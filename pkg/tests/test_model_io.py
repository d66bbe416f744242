"""Model persistence: round trips, version gating, corruption handling."""

import json

import numpy as np
import pytest

from sqnn.datasets import Dataset, gen_two_moons
from sqnn.model_io import (FORMAT_VERSION, ModelFormatError, UnsupportedFormat,
                           load, save)
from sqnn.training import GdConfig, LlsConfig, gd_train, lls_train


@pytest.fixture
def lls_model():
    return lls_train(gen_two_moons(n=80, noise=0.07, seed=1), LlsConfig(K=3))


@pytest.fixture
def full_model():
    rng = np.random.default_rng(2)
    data = Dataset(inputs=rng.uniform(-1, 1, (15, 2)),
                   targets=rng.uniform(-1, 1, 15))
    model, _ = gd_train(data, GdConfig(max_epochs=5, seed=4), model_shape="full")
    return model


def test_round_trip_predictions_bit_exact(tmp_path, lls_model):
    path = tmp_path / "m.json"
    save(lls_model, path)
    reloaded = load(path)
    rng = np.random.default_rng(3)
    X = rng.uniform(-3, 3, (100, 2))
    np.testing.assert_array_equal(reloaded.predict(X), lls_model.predict(X))
    np.testing.assert_array_equal(reloaded.beta.flat(), lls_model.beta.flat())


def test_round_trip_full_model(tmp_path, full_model):
    path = tmp_path / "m.json"
    save(full_model, path)
    reloaded = load(path)
    rng = np.random.default_rng(4)
    X = rng.uniform(-2, 2, (50, 2))
    np.testing.assert_array_equal(reloaded.predict(X), full_model.predict(X))
    assert reloaded.theta == full_model.theta
    assert reloaded.omega == full_model.omega
    assert reloaded.config == full_model.config


def test_round_trip_with_target_scaling(tmp_path):
    data = Dataset(inputs=np.array([[0.0], [1.0]]), targets=np.array([-1.0, 1.0]),
                   target_range=(420.0, 495.0))
    model = lls_train(data, LlsConfig(K=1))
    path = tmp_path / "m.json"
    save(model, path)
    reloaded = load(path)
    assert reloaded.normalization.feature_max[0] == 1.0
    assert reloaded.normalization.target_min == 420.0
    assert reloaded.normalization.target_max == 495.0
    # recalibration to the original units survives the round trip
    np.testing.assert_allclose(
        reloaded.normalization.invert_target(reloaded.predict(data.inputs)),
        model.normalization.invert_target(model.predict(data.inputs)))


def test_target_range_without_feature_scaling(tmp_path):
    data = Dataset(inputs=np.array([[0.0], [1.0]]), targets=np.array([-1.0, 1.0]),
                   target_range=(0.0, 10.0))
    model = lls_train(data, LlsConfig(K=1, normalize=False))
    assert model.normalization.feature_min is None
    path = tmp_path / "m.json"
    save(model, path)
    reloaded = load(path)
    assert reloaded.normalization.feature_min is None
    assert reloaded.normalization.target_max == 10.0
    np.testing.assert_array_equal(reloaded.predict(data.inputs),
                                  model.predict(data.inputs))


def test_unknown_version_rejected(tmp_path, lls_model):
    path = tmp_path / "m.json"
    save(lls_model, path)
    doc = json.loads(path.read_text())
    doc["format_version"] = 999
    path.write_text(json.dumps(doc))
    with pytest.raises(UnsupportedFormat, match="999"):
        load(path)


def test_truncated_file_rejected(tmp_path, lls_model):
    path = tmp_path / "m.json"
    save(lls_model, path)
    text = path.read_text()
    path.write_text(text[:len(text) // 2])
    with pytest.raises(ModelFormatError, match="JSON"):
        load(path)


def test_corrupted_coefficient_names_field(tmp_path, lls_model):
    path = tmp_path / "m.json"
    save(lls_model, path)
    doc = json.loads(path.read_text())
    doc["coefficients"][2] = "not-a-float"
    path.write_text(json.dumps(doc))
    with pytest.raises(ModelFormatError, match="coefficients"):
        load(path)


def test_wrong_coefficient_count_names_field(tmp_path, lls_model):
    path = tmp_path / "m.json"
    save(lls_model, path)
    doc = json.loads(path.read_text())
    doc["coefficients"] = doc["coefficients"][:-1]
    path.write_text(json.dumps(doc))
    with pytest.raises(ModelFormatError, match="coefficients"):
        load(path)


def test_bad_kind_rejected(tmp_path, lls_model):
    path = tmp_path / "m.json"
    save(lls_model, path)
    doc = json.loads(path.read_text())
    doc["kind"] = "mystery"
    path.write_text(json.dumps(doc))
    with pytest.raises(ModelFormatError, match="kind"):
        load(path)


def test_save_is_atomic_enough(tmp_path, lls_model):
    # overwriting an existing file never leaves a partial document behind
    path = tmp_path / "m.json"
    save(lls_model, path)
    first = path.read_text()
    save(lls_model, path)
    second = path.read_text()
    assert json.loads(first)["coefficients"] == json.loads(second)["coefficients"]
    assert not list(tmp_path.glob(".model-*"))  # no temp litter


def test_format_version_written(tmp_path, lls_model):
    path = tmp_path / "m.json"
    save(lls_model, path)
    assert json.loads(path.read_text())["format_version"] == FORMAT_VERSION
