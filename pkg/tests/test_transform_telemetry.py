import numpy as np
import pytest

from pdmtools.exceptions import DegenerateFeatureError, StateError
from pdmtools.frame_utils import FEATURE_NAMES, FeatureFrame, Origin
from pdmtools.transform_telemetry import (Scaler, apply_scaler, fit_scaler, invert_scaler, read_scaler,
                                          write_scaler)


def fused(values):
    return FeatureFrame(values, FEATURE_NAMES, Origin.FUSED, (Origin.RAW, Origin.SMOOTHED, Origin.FUSED))


def test_scaler_maps_bounds():
    frame = fused(np.array([[10.0, 0.0, 5.0, 1.0],
                            [30.0, 4.0, 7.0, 3.0],
                            [20.0, 2.0, 6.0, 2.0]]))
    scaler = fit_scaler(frame)
    np.testing.assert_array_equal(scaler.per_feature_min, [10.0, 0.0, 5.0, 1.0])
    np.testing.assert_array_equal(scaler.per_feature_max, [30.0, 4.0, 7.0, 3.0])

    scaled = apply_scaler(frame, scaler)
    assert scaled.origin is Origin.SCALED
    np.testing.assert_allclose(scaled.values[0], -1.0, atol=1e-12)
    np.testing.assert_allclose(scaled.values[1], 1.0, atol=1e-12)
    np.testing.assert_allclose(scaled.values[2], 0.0, atol=1e-12)


def test_training_partition_lies_in_range(rng):
    frame = fused(rng.normal(100.0, 20.0, size=(50, 4)))
    scaled = apply_scaler(frame, fit_scaler(frame))
    assert scaled.values.min() >= -1.0 - 1e-12
    assert scaled.values.max() <= 1.0 + 1e-12


def test_inverse_round_trip(rng):
    train = fused(rng.normal(100.0, 20.0, size=(1000, 4)))
    scaler = fit_scaler(train)
    other = fused(rng.normal(100.0, 40.0, size=(200, 4)))
    restored = invert_scaler(apply_scaler(other, scaler), scaler)
    assert restored.origin is Origin.FUSED
    np.testing.assert_allclose(restored.values, other.values, rtol=1e-12)


def test_degenerate_feature_is_named():
    values = np.array([[1.0, 2.0, 3.0, 4.0], [2.0, 2.0, 4.0, 5.0]])
    with pytest.raises(DegenerateFeatureError) as e:
        fit_scaler(fused(values))
    assert e.value.feature == "rotate"
    with pytest.raises(DegenerateFeatureError):
        Scaler(np.zeros(4), np.array([1.0, 1.0, 0.0, 1.0]))


def test_state_errors(rng):
    frame = fused(rng.normal(size=(10, 4)))
    scaler = fit_scaler(frame)
    scaled = apply_scaler(frame, scaler)
    with pytest.raises(StateError):
        fit_scaler(scaled)
    with pytest.raises(StateError):
        apply_scaler(scaled, scaler)
    with pytest.raises(StateError):
        invert_scaler(frame, scaler)
    with pytest.raises(StateError):
        apply_scaler(frame, None)


def test_scaler_file(tmp_path, rng):
    scaler = fit_scaler(fused(rng.normal(size=(10, 4))))
    path = str(tmp_path / "scaler.csv")
    write_scaler(scaler, path)
    with open(path) as f:
        assert f.readline().strip() == "feature,min,max"
    loaded = read_scaler(path)
    assert loaded.feature_names == FEATURE_NAMES
    np.testing.assert_array_equal(loaded.per_feature_min, scaler.per_feature_min)
    np.testing.assert_array_equal(loaded.per_feature_max, scaler.per_feature_max)
