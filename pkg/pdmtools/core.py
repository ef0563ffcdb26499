"""
Stateful telemetry processing: one machine's series taken from raw rows to the scaled training
partition, each stage applied at most once.

Date: Oct 2026

"""

import io
import os

from pdmtools.exceptions import ArtifactIOError, StateError
from pdmtools.frame_utils import Origin, fusion_windows, read_frame, rolling_average, split_train_test, write_frame
from pdmtools.read_telemetry import filter_machine, load_telemetry
from pdmtools.transform_telemetry import apply_scaler, fit_scaler, read_scaler, write_scaler

FRAME_FILES = {
    "smoothed": "smoothed.csv",
    "fused": "fused.csv",
    "train": "train.csv",
    "test": "test.csv",
    "train_scaled": "train_scaled.csv",
}
SCALER_FILE = "scaler.csv"


class TelemetryCore:

    def __init__(self, data_path=None, machine_id=1):
        """
        Initialise new object
        :param data_path: telemetry CSV with header datetime,machineID,volt,rotate,pressure,vibration
        :param machine_id: the machine to select
        """

        self.machine_id = machine_id
        self.raw = None
        self.frame = None
        self.smoothed = None
        self.fused = None
        self.train = None
        self.test = None
        self.train_scaled = None
        self.scaler = None
        self.params = {"pipeline_order": "smooth_then_fuse",
                       "smoothing_applied": False,
                       "fusion_applied": False,
                       "split_applied": False,
                       "scaling_applied": False}

        if data_path:
            self.read_telemetry(data_path)

    def process(self,
                smooth=False, smoothing_window=None,
                fuse=False, fusion_window=None,
                pipeline_order="smooth_then_fuse",
                split=False, train_fraction=None,
                scale=False):
        """

        :param smooth: apply the rolling average
        :param smoothing_window: rows per rolling mean, defaults to 24
        :param fuse: apply the non-overlapping fusion windows
        :param fusion_window: rows per fusion window, defaults to 3
        :param pipeline_order: "smooth_then_fuse" or "fuse_then_smooth"
        :param split: split into train and test partitions
        :param train_fraction: defaults to 0.7
        :param scale: fit the scaler on the train partition and scale it to [-1, 1]
        :return:
        """

        stages = [("smooth", smooth), ("fuse", fuse)]
        if pipeline_order == "fuse_then_smooth":
            stages.reverse()
        self.params["pipeline_order"] = pipeline_order

        for stage, wanted in stages:
            if stage == "smooth" and wanted:
                self.smooth(window_len=smoothing_window or 24)
            elif stage == "fuse" and wanted:
                self.fuse(window_len=fusion_window or 3)

        if split:
            self.split(train_fraction=train_fraction or 0.7)

            if scale:  # the scaler is fitted on the training partition only
                self.scale()

    def read_telemetry(self, path):
        self.raw = filter_machine(load_telemetry(path), self.machine_id)
        self.frame = self.raw

    def _require_frame(self):
        if self.frame is None:
            raise StateError("no telemetry loaded")

    def smooth(self, window_len=24):
        self._require_frame()
        if not self.params["smoothing_applied"]:
            self.frame = self.smoothed = rolling_average(self.frame, window_len=window_len)
            self.params["smoothing_applied"] = True

    def fuse(self, window_len=3):
        self._require_frame()
        if not self.params["fusion_applied"]:
            self.frame = self.fused = fusion_windows(self.frame, window_len=window_len)
            self.params["fusion_applied"] = True

    def split(self, train_fraction=0.7):
        self._require_frame()
        if not self.params["split_applied"]:
            self.train, self.test = split_train_test(self.frame, train_fraction=train_fraction)
            self.params["split_applied"] = True

    def scale(self):
        if not self.params["split_applied"]:
            raise StateError("split the frame before fitting the scaler")
        if not self.params["scaling_applied"]:
            self.scaler = fit_scaler(self.train)
            self.train_scaled = apply_scaler(self.train, self.scaler)
            self.params["scaling_applied"] = True

    def row_counts(self):
        """
        Rows after each applied stage, in application order.
        """
        counts = {}
        if self.raw is not None:
            counts["raw"] = len(self.raw)
        for origin in (self.frame.lineage if self.frame is not None else ())[1:]:
            counts[origin.value] = len(self.smoothed if origin is Origin.SMOOTHED else self.fused)
        if self.params["split_applied"]:
            counts["train"] = len(self.train)
            counts["test"] = len(self.test)
        return counts

    def write_frames(self, directory):
        """
        Write every computed frame and the scaler into directory.
        :return: list of written file paths
        """
        os.makedirs(directory, exist_ok=True)
        written = []
        for name, file in FRAME_FILES.items():
            frame = getattr(self, name)
            if frame is not None:
                path = os.path.join(directory, file)
                write_frame(frame, path)
                written.append(path)
        if self.scaler is not None:
            path = os.path.join(directory, SCALER_FILE)
            write_scaler(self.scaler, path)
            written.append(path)
        return written

    def read_frames(self, directory, pipeline_order="smooth_then_fuse"):
        """
        Restore the partitions and the scaler written by write_frames.
        :param directory:
        :param pipeline_order: the order the frames were produced in, to rebuild their lineage
        :return:
        """
        middle = (Origin.SMOOTHED, Origin.FUSED)
        if pipeline_order == "fuse_then_smooth":
            middle = middle[::-1]
        lineage = (Origin.RAW,) + middle

        for file in (FRAME_FILES["train"], FRAME_FILES["test"], FRAME_FILES["train_scaled"], SCALER_FILE):
            path = os.path.join(directory, file)
            if not os.path.isfile(path):
                raise ArtifactIOError("missing %s; run `forecaster ingest` first" % path)

        self.train = read_frame(os.path.join(directory, FRAME_FILES["train"]), lineage[-1], lineage)
        self.test = read_frame(os.path.join(directory, FRAME_FILES["test"]), lineage[-1], lineage)
        self.train_scaled = read_frame(os.path.join(directory, FRAME_FILES["train_scaled"]), Origin.SCALED,
                                       lineage + (Origin.SCALED,))
        self.scaler = read_scaler(os.path.join(directory, SCALER_FILE))
        self.params.update(pipeline_order=pipeline_order, smoothing_applied=True, fusion_applied=True,
                           split_applied=True, scaling_applied=True)
        self.frame = None

    def write_summary(self, file):
        """
        Row counts per stage, one "stage=count" line each.
        :param file:
        :return:
        """
        with io.open(file, mode="w", encoding="utf-8", newline="\n") as summary:
            for stage, count in self.row_counts().items():
                summary.write("%s=%d\n" % (stage, count))
