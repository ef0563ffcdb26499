"""
Alternating BiLSTM / Predictive GAN forecasting over an unbounded horizon.

    BiLSTM window 1   <- last n training rows
    PredGAN window 1  <- last n - 1 training rows
    BiLSTM window k   <- PredGAN window k - 1
    PredGAN window k  <- last n - 1 rows of BiLSTM window k - 1

Both paths run in lockstep until each has t windows. The series whose windows are emitted by the
BiLSTM is "predgan_to_bilstm" and is the primary forecast; the other is "bilstm_to_predgan".

Date: Oct 2026

"""

import enum
import logging
from dataclasses import dataclass, field, replace
from typing import Optional

import numpy as np
import pandas as pd

from pdmtools.bilstm import bilstm_forward
from pdmtools.exceptions import InsufficientDataError, ParameterError, ShapeError, StateError
from pdmtools.frame_utils import FEATURE_NAMES, FeatureFrame, Origin
from pdmtools.predictive_gan import FeatureWeights, LatentOptConfig, predict_window

logger = logging.getLogger(__name__)

PREDGAN_TO_BILSTM = "predgan_to_bilstm"
BILSTM_TO_PREDGAN = "bilstm_to_predgan"
SERIES_COLUMNS = ["step", "feature", "value", "path", "scale"]


class Scale(enum.Enum):
    MODEL = "model"
    PHYSICAL = "physical"


@dataclass(frozen=True)
class ForecastSeries:
    windows: tuple
    path: str
    scale: Scale = Scale.MODEL
    feature_names: tuple = FEATURE_NAMES

    def __post_init__(self):
        if self.path not in (PREDGAN_TO_BILSTM, BILSTM_TO_PREDGAN):
            raise ParameterError("unknown forecast path %r" % (self.path,))
        windows = tuple(np.asarray(w, dtype=np.float64) for w in self.windows)
        if windows and any(w.ndim != 2 or w.shape != windows[0].shape for w in windows):
            raise ShapeError("forecast windows must all be n x m")
        if windows and windows[0].shape[1] != len(self.feature_names):
            raise ShapeError("windows have %d features, %d names given"
                             % (windows[0].shape[1], len(self.feature_names)))
        object.__setattr__(self, "windows", windows)

    def __len__(self):
        return sum(len(w) for w in self.windows)

    @property
    def values(self):
        """
        All windows stacked, (count * n) x m.
        """
        if not self.windows:
            return np.zeros((0, len(self.feature_names)))
        return np.concatenate(self.windows)

    def to_frame(self):
        """
        Long format: one row per step and feature.
        """
        values = self.values
        steps, features = np.meshgrid(np.arange(len(values)), np.arange(values.shape[1]), indexing="ij")
        return pd.DataFrame({"step": steps.ravel(),
                             "feature": np.array(self.feature_names)[features.ravel()],
                             "value": values.ravel(),
                             "path": self.path,
                             "scale": self.scale.value}, columns=SERIES_COLUMNS)


@dataclass(frozen=True)
class InterleaveConfig:
    horizon_windows: int = 3
    latent: LatentOptConfig = field(default_factory=LatentOptConfig)
    weights: Optional[FeatureWeights] = None
    seed: int = 0

    def __post_init__(self):
        if self.horizon_windows < 1:
            raise ParameterError("horizon must be at least one window")


def _tail_values(train_tail):
    if isinstance(train_tail, FeatureFrame):
        if train_tail.origin is not Origin.SCALED:
            raise StateError("forecasting needs the scaled training frame, got origin '%s'"
                             % train_tail.origin.value)
        return train_tail.values, train_tail.feature_names
    values = np.asarray(train_tail, dtype=np.float64)
    return values, FEATURE_NAMES[:values.shape[1]]


def forecast(generator, bilstm, train_tail, config, trace=None):
    """
    Run both interleaved paths for config.horizon_windows windows.

    :param generator: trained GeneratorModel
    :param bilstm: trained BiLstmModel
    :param train_tail: the end of the scaled training frame, at least n rows
    :param config: InterleaveConfig
    :param trace: optional list receiving the latent-search trace of the first prediction level
    :return: (predgan_to_bilstm series, bilstm_to_predgan series), both in model scale
    """
    values, names = _tail_values(train_tail)
    n, m = generator.window_shape
    if values.ndim != 2 or values.shape[1] != m:
        raise ShapeError("training tail must have %d features" % m)
    if len(values) < n:
        raise InsufficientDataError("forecasting needs the last %d training rows, got %d" % (n, len(values)))

    weights = config.weights or FeatureWeights.ones(m)
    latent = replace(config.latent, seed=config.seed)

    bilstm_windows = [bilstm_forward(values[-n:], bilstm)]
    predgan_windows = [predict_window(generator, values[-(n - 1):], weights, latent, trace=trace)]
    for k in range(2, config.horizon_windows + 1):
        previous_bilstm = bilstm_windows[-1]
        bilstm_windows.append(bilstm_forward(predgan_windows[-1], bilstm))
        predgan_windows.append(predict_window(generator, previous_bilstm[-(n - 1):], weights, latent,
                                              level_offset=(k - 1) * n))
        logger.info("forecast window %d of %d", k, config.horizon_windows)

    return (ForecastSeries(tuple(bilstm_windows), PREDGAN_TO_BILSTM, Scale.MODEL, names),
            ForecastSeries(tuple(predgan_windows), BILSTM_TO_PREDGAN, Scale.MODEL, names))


def to_physical(series, scaler):
    """
    Undo the training scaler on every row.

    :param series: ForecastSeries in model scale
    :param scaler: the Scaler fitted on the training partition
    :return: ForecastSeries in physical scale
    """
    if series.scale is Scale.PHYSICAL:
        raise StateError("series '%s' is already in physical scale" % series.path)
    windows = tuple(scaler.inverse_transform(w) for w in series.windows)
    return ForecastSeries(windows, series.path, Scale.PHYSICAL, series.feature_names)


def write_series(series, file):
    series.to_frame().to_csv(file, index=False, float_format="%.17g", lineterminator="\n")


def read_series(file, window_size):
    """
    Read a series written by write_series back into windows of window_size rows.
    """
    df = pd.read_csv(file)
    missing = [c for c in SERIES_COLUMNS if c not in df.columns]
    if missing:
        raise ShapeError("series file %s lacks columns %s" % (file, missing))
    names = tuple(pd.unique(df["feature"]))
    table = df.pivot(index="step", columns="feature", values="value")[list(names)].to_numpy()
    if len(table) % window_size:
        raise ShapeError("series of %d rows is not a whole number of %d-row windows" % (len(table), window_size))
    windows = tuple(np.split(table, len(table) // window_size)) if len(table) else ()
    return ForecastSeries(windows, df["path"].iloc[0], Scale(df["scale"].iloc[0]), names)
