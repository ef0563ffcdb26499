"""
Feature frame utilities including:
 the FeatureFrame container and its processing lineage
 a function to smooth a frame with a trailing rolling average
 a function to fuse consecutive rows into non-overlapping block means
 a function to split a frame into temporal train and test partitions
 functions to write and read frames as CSV

Date: Oct 2026

"""

import enum
import logging
from dataclasses import dataclass, field

import numpy as np
import pandas as pd
from skimage.measure import block_reduce

from pdmtools.exceptions import (InsufficientDataError, ParameterError, ShapeError, StateError,
                                 ValidationError)

logger = logging.getLogger(__name__)

FEATURE_NAMES = ("volt", "rotate", "pressure", "vibration")


class Origin(enum.Enum):
    RAW = "raw"
    SMOOTHED = "smoothed"
    FUSED = "fused"
    SCALED = "scaled"


@dataclass(frozen=True)
class FeatureFrame:
    """
    An ordered table of per-step feature vectors.

    :param values: (length, m) float64 array
    :param feature_names: one label per column
    :param origin: the last processing stage applied
    :param lineage: every origin applied so far, oldest first
    """
    values: np.ndarray
    feature_names: tuple = FEATURE_NAMES
    origin: Origin = Origin.RAW
    lineage: tuple = field(default=())

    def __post_init__(self):
        values = np.asarray(self.values, dtype=np.float64)
        if values.ndim != 2:
            raise ShapeError("frame values must be 2-dimensional, got shape %s" % (values.shape,))
        if values.shape[1] != len(self.feature_names):
            raise ShapeError("frame has %d columns but %d feature names"
                             % (values.shape[1], len(self.feature_names)))
        if not np.all(np.isfinite(values)):
            raise ValidationError("frame contains non-finite values")
        object.__setattr__(self, "values", values)
        object.__setattr__(self, "feature_names", tuple(self.feature_names))
        if not self.lineage:
            object.__setattr__(self, "lineage", (self.origin,))

    def __len__(self):
        return self.values.shape[0]

    @property
    def num_features(self):
        return self.values.shape[1]

    def derive(self, values, origin):
        """
        Build the frame produced by applying stage `origin` to this one.
        Stages never repeat and nothing follows scaling.
        """
        if self.origin is Origin.SCALED:
            raise StateError("frame is already scaled; no further stage may be applied")
        if origin in self.lineage:
            raise StateError("stage '%s' has already been applied" % origin.value)
        return FeatureFrame(values, self.feature_names, origin, self.lineage + (origin,))

    def revert(self, values):
        """
        Build the frame that undoes the last stage (used when inverting the scaler).
        """
        if len(self.lineage) < 2:
            raise StateError("frame of origin '%s' has no earlier stage" % self.origin.value)
        return FeatureFrame(values, self.feature_names, self.lineage[-2], self.lineage[:-1])

    def tail(self, rows):
        return FeatureFrame(self.values[-rows:], self.feature_names, self.origin, self.lineage)


def _check_window(frame, window_len):
    if int(window_len) != window_len or window_len < 1:
        raise ParameterError("window length must be a positive integer, got %r" % (window_len,))
    if len(frame) < window_len:
        raise InsufficientDataError("window of %d rows needs at least as many rows, frame has %d"
                                    % (window_len, len(frame)))


def rolling_average(frame, window_len=24):
    """
    Smooth a frame with a trailing rolling mean. Only complete windows are kept, so output row k
    is the mean of input rows k..k+window_len-1 and the output is window_len-1 rows shorter.

    :param frame: FeatureFrame
    :param window_len: number of rows averaged, e.g. 24 hourly rows
    :return: FeatureFrame of origin smoothed
    """
    _check_window(frame, window_len)

    # means are taken on deviations from the first row so constant columns stay exact
    anchor = frame.values[0]
    deviations = pd.DataFrame(frame.values - anchor)
    smoothed = deviations.rolling(window=window_len).mean().to_numpy()[window_len - 1:] + anchor

    return frame.derive(smoothed, Origin.SMOOTHED)


def fusion_windows(frame, window_len=3):
    """
    Fuse non-overlapping blocks of consecutive rows into their per-feature mean.
    Trailing rows that do not fill a block are discarded.

    :param frame: FeatureFrame
    :param window_len: block length in rows, e.g. 3 hours
    :return: FeatureFrame of origin fused with floor(len / window_len) rows
    """
    _check_window(frame, window_len)

    num_blocks = len(frame) // window_len
    trimmed = frame.values[:num_blocks * window_len]

    anchors = trimmed[::window_len]
    deviations = trimmed - np.repeat(anchors, window_len, axis=0)
    fused = block_reduce(deviations, block_size=(window_len, 1), func=np.mean) + anchors

    return frame.derive(fused, Origin.FUSED)


def split_train_test(frame, train_fraction=0.7):
    """
    Split a frame in temporal order. The first floor(fraction * length) rows are the training
    partition; nothing is shuffled.

    :param frame: FeatureFrame
    :param train_fraction: real in (0, 1)
    :return: (train frame, test frame)
    """
    if not 0.0 < train_fraction < 1.0:
        raise ParameterError("train fraction must lie in (0, 1), got %r" % (train_fraction,))
    if len(frame) == 0:
        raise InsufficientDataError("cannot split an empty frame")

    cut = int(np.floor(train_fraction * len(frame)))
    train = FeatureFrame(frame.values[:cut], frame.feature_names, frame.origin, frame.lineage)
    test = FeatureFrame(frame.values[cut:], frame.feature_names, frame.origin, frame.lineage)
    return train, test


def write_frame(frame, file):
    """
    Write a frame as CSV with header t,<feature names>, t being the integer step index.
    """
    df = pd.DataFrame(frame.values, columns=list(frame.feature_names))
    df.insert(0, "t", np.arange(len(frame)))
    df.to_csv(file, index=False, float_format="%.17g", lineterminator="\n")


def read_frame(file, origin=Origin.FUSED, lineage=None):
    """
    Read a frame written by write_frame.

    :param file:
    :param origin: the stage the stored frame had reached
    :param lineage: full stage history, defaults to (origin,)
    :return: FeatureFrame
    """
    df = pd.read_csv(file)
    if "t" not in df.columns:
        raise ValidationError("frame file %s has no 't' column" % file)
    names = tuple(c for c in df.columns if c != "t")
    return FeatureFrame(df[list(names)].to_numpy(dtype=np.float64), names, origin,
                        tuple(lineage) if lineage else (origin,))
