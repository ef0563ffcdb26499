"""
Cutting a feature frame into fixed-size windows, the training unit of both the GAN and the BiLSTM.

Date: Oct 2026

"""

from dataclasses import dataclass

import numpy as np
from numpy.lib.stride_tricks import sliding_window_view

from pdmtools.exceptions import InsufficientDataError, ParameterError, ShapeError

WINDOW_SIZE = 9


@dataclass(frozen=True)
class WindowSample:
    values: np.ndarray
    start_index: int

    def __post_init__(self):
        values = np.asarray(self.values, dtype=np.float64)
        if values.ndim != 2:
            raise ShapeError("window sample must be an n x m matrix, got shape %s" % (values.shape,))
        object.__setattr__(self, "values", values)

    @property
    def shape(self):
        return self.values.shape


def _check_positive(name, value):
    if int(value) != value or value < 1:
        raise ParameterError("%s must be a positive integer, got %r" % (name, value))


def window_array(values, window_length, stride=1):
    """
    Read-only view of every window of window_length consecutive rows, starting every stride rows.
    Windows that would run past the end are not produced.

    :param values: array with time along the first axis
    :param window_length: rows per window
    :param stride: rows between window starts
    :return: array of shape (num_windows, window_length, ...)
    """
    _check_positive("window length", window_length)
    _check_positive("stride", stride)
    values = np.asarray(values)
    if len(values) < window_length:
        raise InsufficientDataError("need at least %d rows for one window, got %d" % (window_length, len(values)))
    view = sliding_window_view(values, window_length, axis=0)[::stride]
    return np.moveaxis(view, -1, 1)


def make_windows(frame, n=WINDOW_SIZE, stride=1):
    """
    Windows of n consecutive rows at start indices 0, stride, 2*stride, ... while start + n <= length.

    :param frame: FeatureFrame
    :param n: rows per window
    :param stride:
    :return: list of WindowSample, floor((length - n) / stride) + 1 of them
    """
    if len(frame) < n:
        raise InsufficientDataError("need at least %d rows to make a window, frame has %d" % (n, len(frame)))

    chunks = window_array(frame.values, n, stride)
    return [WindowSample(chunk.copy(), i * stride) for i, chunk in enumerate(chunks)]


def stack_windows(samples):
    """
    :param samples: list of WindowSample
    :return: array (num_samples, n, m)
    """
    return np.stack([s.values for s in samples])


def make_training_pairs(frame, n=WINDOW_SIZE, stride=1):
    """
    Input/target pairs for sequence training: the target is the window that starts n rows after
    the input's start.

    :param frame: FeatureFrame
    :param n: rows per window
    :param stride: 1 for sliding pairs, n for non-overlapping pairs
    :return: (inputs, targets), each an array (num_pairs, n, m)
    """
    _check_positive("window size", n)
    _check_positive("stride", stride)
    if len(frame) < 2 * n:
        raise InsufficientDataError("need at least %d rows to make a training pair, frame has %d"
                                    % (2 * n, len(frame)))

    windows = window_array(frame.values, n)
    starts = np.arange(0, len(windows) - n, stride)
    return windows[starts], windows[starts + n]
