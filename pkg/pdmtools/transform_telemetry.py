"""
Functions to transform telemetry between physical units and the generator's tanh range [-1, 1].

Date: Oct 2026

"""

from dataclasses import dataclass

import numpy as np
import pandas as pd
from sklearn.preprocessing import MinMaxScaler

from pdmtools.exceptions import DegenerateFeatureError, ShapeError, StateError, ValidationError
from pdmtools.frame_utils import FEATURE_NAMES, Origin

FEATURE_RANGE = (-1.0, 1.0)


@dataclass(frozen=True)
class Scaler:
    """
    Per-feature min-max scaling fitted on the training partition only.
    """
    per_feature_min: np.ndarray
    per_feature_max: np.ndarray
    feature_names: tuple = FEATURE_NAMES

    def __post_init__(self):
        lo = np.asarray(self.per_feature_min, dtype=np.float64)
        hi = np.asarray(self.per_feature_max, dtype=np.float64)
        if lo.shape != hi.shape or lo.shape != (len(self.feature_names),):
            raise ShapeError("scaler bounds must have one entry per feature")
        for name, a, b in zip(self.feature_names, lo, hi):
            if not a < b:
                raise DegenerateFeatureError(name)
        object.__setattr__(self, "per_feature_min", lo)
        object.__setattr__(self, "per_feature_max", hi)
        object.__setattr__(self, "feature_names", tuple(self.feature_names))

    def _as_sklearn(self):
        # fitting on the two bound rows reproduces the stored scaler exactly
        return MinMaxScaler(feature_range=FEATURE_RANGE).fit(np.vstack([self.per_feature_min,
                                                                        self.per_feature_max]))

    def transform(self, values):
        values = np.asarray(values, dtype=np.float64)
        return self._as_sklearn().transform(values.reshape(-1, values.shape[-1])).reshape(values.shape)

    def inverse_transform(self, values):
        values = np.asarray(values, dtype=np.float64)
        return self._as_sklearn().inverse_transform(values.reshape(-1, values.shape[-1])).reshape(values.shape)


def fit_scaler(frame):
    """
    Fit the scaler on a (training) frame.

    :param frame: FeatureFrame, not yet scaled
    :return: Scaler
    """
    if frame.origin is Origin.SCALED:
        raise StateError("scaler must be fitted on unscaled data")
    if len(frame) == 0:
        raise ValidationError("cannot fit a scaler on an empty frame")

    lo = frame.values.min(axis=0)
    hi = frame.values.max(axis=0)
    for name, a, b in zip(frame.feature_names, lo, hi):
        if a == b:
            raise DegenerateFeatureError(name)

    fitted = MinMaxScaler(feature_range=FEATURE_RANGE).fit(frame.values)
    return Scaler(fitted.data_min_, fitted.data_max_, frame.feature_names)


def apply_scaler(frame, scaler):
    """
    Map feature j affinely so that its training min goes to -1 and its max to +1.

    :param frame: FeatureFrame
    :param scaler: fitted Scaler
    :return: FeatureFrame of origin scaled
    """
    if scaler is None:
        raise StateError("scaler has not been fitted")
    if frame.feature_names != scaler.feature_names:
        raise ShapeError("frame features %s do not match scaler features %s"
                         % (frame.feature_names, scaler.feature_names))
    return frame.derive(scaler.transform(frame.values), Origin.SCALED)


def invert_scaler(frame, scaler):
    """
    Undo apply_scaler.

    :param frame: FeatureFrame of origin scaled
    :param scaler:
    :return: FeatureFrame of the origin preceding scaling
    """
    if frame.origin is not Origin.SCALED:
        raise StateError("frame is not scaled")
    return frame.revert(scaler.inverse_transform(frame.values))


def write_scaler(scaler, file):
    df = pd.DataFrame({"feature": list(scaler.feature_names),
                       "min": scaler.per_feature_min,
                       "max": scaler.per_feature_max})
    df.to_csv(file, index=False, float_format="%.17g", lineterminator="\n")


def read_scaler(file):
    df = pd.read_csv(file)
    return Scaler(df["min"].to_numpy(), df["max"].to_numpy(), tuple(df["feature"]))
