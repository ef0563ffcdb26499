import numpy as np
import pytest

from pdmtools.chunk import make_windows
from pdmtools.exceptions import InsufficientDataError, ParameterError, StateError
from pdmtools.frame_utils import (FEATURE_NAMES, FeatureFrame, Origin, fusion_windows, read_frame, rolling_average,
                                  split_train_test, write_frame)


def column(values):
    return FeatureFrame(np.asarray(values, dtype=np.float64).reshape(-1, 1), ("x",))


def test_rolling_average_example():
    smoothed = rolling_average(column([1, 2, 3, 4]), window_len=2)
    np.testing.assert_allclose(smoothed.values[:, 0], [1.5, 2.5, 3.5])
    assert smoothed.origin is Origin.SMOOTHED
    assert smoothed.lineage == (Origin.RAW, Origin.SMOOTHED)


def test_rolling_average_constant_is_exact():
    frame = FeatureFrame(np.tile([176.217853015625, 418.5, 113.07, 45.1], (30, 1)))
    smoothed = rolling_average(frame, window_len=24)
    assert len(smoothed) == 7
    assert np.array_equal(smoothed.values, frame.values[:7])


@pytest.mark.parametrize("length,window", [(5, 1), (30, 24), (57, 7), (200, 24)])
def test_rolling_average_matches_brute_force(rng, length, window):
    frame = FeatureFrame(rng.normal(100.0, 10.0, size=(length, 4)))
    smoothed = rolling_average(frame, window_len=window)
    assert len(smoothed) == length - window + 1
    expected = np.array([frame.values[k:k + window].mean(axis=0) for k in range(length - window + 1)])
    np.testing.assert_allclose(smoothed.values, expected, rtol=1e-12)


def test_rolling_average_year_of_hours(rng):
    frame = FeatureFrame(rng.normal(size=(8760, 4)))
    assert len(rolling_average(frame, 24)) == 8737


def test_rolling_average_window_too_long():
    with pytest.raises(InsufficientDataError):
        rolling_average(column([1, 2, 3]), window_len=4)
    with pytest.raises(ParameterError):
        rolling_average(column([1, 2, 3]), window_len=0)


def test_fusion_examples():
    np.testing.assert_allclose(fusion_windows(column([1, 2, 3, 4, 5, 6]), 3).values[:, 0], [2.0, 5.0])
    np.testing.assert_allclose(fusion_windows(column([1, 2, 3, 4]), 3).values[:, 0], [2.0])


def test_fusion_constant_is_exact():
    frame = FeatureFrame(np.tile([0.1, 0.2, 0.3, 0.7], (10, 1)))
    fused = fusion_windows(frame, 3)
    assert len(fused) == 3
    assert np.array_equal(fused.values, frame.values[:3])


def test_fusion_lengths(rng):
    assert len(fusion_windows(FeatureFrame(rng.normal(size=(8737, 4))), 3)) == 2912
    with pytest.raises(InsufficientDataError):
        fusion_windows(column([1, 2]), 3)


def test_fusion_matches_block_means(rng):
    frame = FeatureFrame(rng.normal(size=(20, 4)))
    fused = fusion_windows(frame, 4)
    expected = frame.values.reshape(5, 4, 4).mean(axis=1)
    np.testing.assert_allclose(fused.values, expected, rtol=1e-12, atol=1e-12)


def test_split_examples(rng):
    train, test = split_train_test(FeatureFrame(rng.normal(size=(10, 4))), 0.7)
    assert (len(train), len(test)) == (7, 3)
    train, test = split_train_test(FeatureFrame(rng.normal(size=(2912, 4))), 0.7)
    assert (len(train), len(test)) == (2038, 874)


def test_split_keeps_order(rng):
    frame = FeatureFrame(rng.normal(size=(13, 4)))
    train, test = split_train_test(frame, 0.5)
    assert np.array_equal(np.concatenate([train.values, test.values]), frame.values)
    assert train.lineage == frame.lineage


def test_split_single_row_gives_empty_train():
    train, test = split_train_test(column([1.0]), 0.7)
    assert (len(train), len(test)) == (0, 1)
    with pytest.raises(InsufficientDataError):
        make_windows(train, 9)


def test_split_fraction_bounds():
    with pytest.raises(ParameterError):
        split_train_test(column([1, 2, 3]), 1.0)
    with pytest.raises(ParameterError):
        split_train_test(column([1, 2, 3]), 0.0)


def test_stages_apply_at_most_once():
    frame = column(np.arange(10.0))
    smoothed = rolling_average(frame, 2)
    with pytest.raises(StateError):
        rolling_average(smoothed, 2)
    # fuse then smooth is a valid order
    assert rolling_average(fusion_windows(frame, 2), 2).lineage == (Origin.RAW, Origin.FUSED, Origin.SMOOTHED)


def test_nothing_follows_scaling():
    scaled = FeatureFrame(np.zeros((5, 1)), ("x",), Origin.SCALED, (Origin.RAW, Origin.SCALED))
    with pytest.raises(StateError):
        rolling_average(scaled, 2)


def test_write_read_frame(tmp_path, rng):
    frame = FeatureFrame(rng.normal(size=(6, 4)), FEATURE_NAMES, Origin.FUSED,
                         (Origin.RAW, Origin.SMOOTHED, Origin.FUSED))
    path = str(tmp_path / "fused.csv")
    write_frame(frame, path)
    with open(path) as f:
        assert f.readline().strip() == "t,volt,rotate,pressure,vibration"
    loaded = read_frame(path, Origin.FUSED, frame.lineage)
    assert np.array_equal(loaded.values, frame.values)
    assert loaded.feature_names == FEATURE_NAMES
    assert loaded.lineage == frame.lineage
