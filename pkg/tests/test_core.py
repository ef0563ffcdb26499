import numpy as np
import pytest

from pdmtools.core import FRAME_FILES, SCALER_FILE, TelemetryCore
from pdmtools.exceptions import ArtifactIOError, StateError
from pdmtools.frame_utils import Origin
from tests.conftest import SMOKE_CSV


def smoke_core(order="smooth_then_fuse"):
    core = TelemetryCore(SMOKE_CSV, machine_id=1)
    core.process(smooth=True, smoothing_window=4, fuse=True, fusion_window=2, pipeline_order=order,
                 split=True, train_fraction=0.7, scale=True)
    return core


def test_stage_row_counts():
    core = smoke_core()
    assert list(core.row_counts().items()) == [("raw", 200), ("smoothed", 197), ("fused", 98),
                                               ("train", 68), ("test", 30)]
    assert all(core.params[k] for k in ("smoothing_applied", "fusion_applied", "split_applied", "scaling_applied"))
    assert core.train_scaled.origin is Origin.SCALED
    assert core.train_scaled.values.min() == pytest.approx(-1.0)
    assert core.train_scaled.values.max() == pytest.approx(1.0)


def test_fuse_then_smooth():
    core = smoke_core("fuse_then_smooth")
    assert list(core.row_counts().items()) == [("raw", 200), ("fused", 100), ("smoothed", 97),
                                               ("train", 67), ("test", 30)]
    assert core.train.lineage == (Origin.RAW, Origin.FUSED, Origin.SMOOTHED)


def test_stages_apply_once():
    core = smoke_core()
    core.smooth(window_len=4)
    core.fuse(window_len=2)
    assert len(core.fused) == 98
    assert len(core.train) == 68


def test_stage_order_errors():
    with pytest.raises(StateError):
        TelemetryCore().smooth()
    with pytest.raises(StateError):
        TelemetryCore(SMOKE_CSV).scale()


def test_frames_written_and_restored(tmp_path):
    core = smoke_core()
    written = core.write_frames(str(tmp_path))
    assert len(written) == len(FRAME_FILES) + 1
    assert (tmp_path / SCALER_FILE).is_file()

    restored = TelemetryCore()
    restored.read_frames(str(tmp_path))
    np.testing.assert_array_equal(restored.train.values, core.train.values)
    np.testing.assert_array_equal(restored.test.values, core.test.values)
    np.testing.assert_array_equal(restored.train_scaled.values, core.train_scaled.values)
    np.testing.assert_array_equal(restored.scaler.per_feature_min, core.scaler.per_feature_min)
    assert restored.train_scaled.lineage == core.train_scaled.lineage
    assert restored.row_counts() == {"train": 68, "test": 30}


def test_missing_frames(tmp_path):
    with pytest.raises(ArtifactIOError) as e:
        TelemetryCore().read_frames(str(tmp_path))
    assert "forecaster ingest" in str(e.value)


def test_summary(tmp_path):
    path = tmp_path / "summary.txt"
    smoke_core().write_summary(str(path))
    assert path.read_text().splitlines() == ["raw=200", "smoothed=197", "fused=98", "train=68", "test=30"]
