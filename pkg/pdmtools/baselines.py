"""
Classical baselines and the RMSE comparison between forecasting methods.

The autoregressive baseline differences each feature d times, fits AR(p) with an intercept by
ordinary least squares on lagged values, forecasts recursively and integrates back. There is no
moving-average term.

Date: Oct 2026

"""

import logging
from dataclasses import dataclass

import numpy as np
import pandas as pd
from scipy import linalg, stats
from sklearn.metrics import mean_squared_error

from pdmtools.exceptions import AlignmentError, ArFitError, InsufficientDataError, ParameterError, ShapeError
from pdmtools.frame_utils import FEATURE_NAMES, FeatureFrame

logger = logging.getLogger(__name__)

ARIMA = "arima"
MEAN = "mean"
METHOD_ORDER = (ARIMA, "bilstm_to_predgan", "predgan_to_bilstm")


def _values(series):
    if isinstance(series, FeatureFrame):
        return series.values, series.feature_names
    values = np.asarray(series, dtype=np.float64)
    if values.ndim == 1:
        values = values[:, None]
    return values, FEATURE_NAMES[:values.shape[1]]


def rmse(predicted, actual):
    """
    Per-feature root mean squared error.

    :param predicted: k x m
    :param actual: k x m
    :return: m-vector
    """
    predicted = np.asarray(predicted, dtype=np.float64)
    actual = np.asarray(actual, dtype=np.float64)
    if predicted.shape != actual.shape or predicted.ndim != 2 or len(predicted) == 0:
        raise ShapeError("predicted %s and actual %s must be equal k x m arrays with k >= 1"
                         % (predicted.shape, actual.shape))
    return np.sqrt(mean_squared_error(actual, predicted, multioutput="raw_values"))


@dataclass(frozen=True)
class ArModel:
    """
    One AR(p) model per feature on the d-times differenced series.

    :param coefficients: m x p lag coefficients, column i multiplies lag i + 1
    :param intercept: m-vector
    :param lags: m x p, the last p differenced values, most recent last
    :param levels: m x d, the last value of the series at each differencing level (0 .. d-1)
    """
    order: int
    difference: int
    coefficients: np.ndarray
    intercept: np.ndarray
    lags: np.ndarray
    levels: np.ndarray
    feature_names: tuple = FEATURE_NAMES

    def __post_init__(self):
        if not (np.all(np.isfinite(self.coefficients)) and np.all(np.isfinite(self.intercept))):
            raise ArFitError("fitted AR coefficients are not finite; try an order smaller than %d" % self.order)


def _fit_one(y, p):
    if np.ptp(y) == 0.0:
        return np.zeros(p), float(y[0])
    if p == 0:
        return np.zeros(0), float(np.mean(y))

    rows = len(y) - p
    design = np.ones((rows, p + 1))
    for lag in range(1, p + 1):
        design[:, lag] = y[p - lag:len(y) - lag]
    solution, _, rank, _ = linalg.lstsq(design, y[p:])
    if rank < p + 1:
        raise ArFitError("singular least-squares system for AR(%d); try a smaller order" % p)
    return solution[1:], float(solution[0])


def ar_fit(series, p=1, d=0):
    """
    Fit AR(p) with d-fold differencing independently per feature.

    :param series: training frame (FeatureFrame or length x m array) in physical scale
    :param p: autoregressive order
    :param d: number of differences
    :return: ArModel
    """
    values, names = _values(series)
    if p < 0 or d < 0:
        raise ParameterError("AR order and difference order must be non-negative")
    if len(values) <= p + d + 1:
        raise InsufficientDataError("AR(%d) with %d differences needs more than %d rows, got %d"
                                    % (p, d, p + d + 1, len(values)))

    coefficients, intercept, lags, levels = [], [], [], []
    for j in range(values.shape[1]):
        y = values[:, j]
        tops = []
        for _ in range(d):
            tops.append(y[-1])
            y = np.diff(y)
        coef, const = _fit_one(y, p)
        coefficients.append(coef)
        intercept.append(const)
        lags.append(y[len(y) - p:])
        levels.append(tops)
        logger.debug("AR(%d, %d) %s: coefficients %s intercept %.6g", p, d, names[j], coef, const)

    m = values.shape[1]
    return ArModel(p, d, np.array(coefficients).reshape(m, p), np.array(intercept),
                   np.array(lags).reshape(m, p), np.array(levels).reshape(m, d), names)


def ar_forecast(model, horizon):
    """
    Recursive k-step forecast, integrated back to the original level.

    :return: horizon x m
    """
    if horizon < 1:
        raise ParameterError("forecast horizon must be positive")
    out = np.empty((horizon, len(model.feature_names)))
    for j in range(out.shape[1]):
        history = list(model.lags[j])
        steps = []
        for _ in range(horizon):
            recent = history[::-1][:model.order]
            value = model.intercept[j] + float(np.dot(model.coefficients[j], recent))
            history.append(value)
            steps.append(value)
        steps = np.array(steps)
        for level in reversed(range(model.difference)):
            steps = model.levels[j, level] + np.cumsum(steps)
        out[:, j] = steps
    return out


def mean_forecast(series, horizon):
    """
    Flat forecast at the per-feature training mean.
    """
    values, _ = _values(series)
    if len(values) == 0:
        raise InsufficientDataError("mean baseline needs at least one row")
    return np.tile(values.mean(axis=0), (horizon, 1))


@dataclass(frozen=True)
class RmseReport:
    """
    :param methods: method names in column order
    :param values: dict method -> per-feature RMSE
    :param sample_count: number of scored rows
    """
    methods: tuple
    values: dict
    sample_count: int
    feature_names: tuple = FEATURE_NAMES

    def average(self, method):
        return float(np.mean(self.values[method]))

    def to_frame(self):
        table = pd.DataFrame({method: self.values[method] for method in self.methods},
                             index=list(self.feature_names))
        table.loc["average"] = [self.average(method) for method in self.methods]
        table.index.name = "feature"
        return table

    def to_text(self):
        return self.to_frame().to_string(float_format=lambda v: "%.3f" % v)


def align_forecasts(forecasts, available):
    """
    Cut every method's forecast to the rows the test partition provides.
    """
    return {method: np.asarray(values)[:available] for method, values in forecasts.items()}


def evaluate(forecasts, test_frame, methods=None):
    """
    Score each method against the matching prefix of the test partition.

    :param forecasts: dict method -> k x m forecast in physical scale
    :param test_frame: FeatureFrame (or array) of the test partition in physical scale
    :param methods: column order, default the forecasts' order
    :return: RmseReport
    """
    actual, names = _values(test_frame)
    lengths = {method: len(values) for method, values in forecasts.items()}
    if not lengths:
        raise ParameterError("no forecasts to evaluate")
    if len(set(lengths.values())) != 1 or next(iter(lengths.values())) > len(actual):
        raise AlignmentError(lengths, expected=len(actual))

    k = next(iter(lengths.values()))
    values = {method: rmse(forecast, actual[:k]) for method, forecast in forecasts.items()}
    return RmseReport(tuple(methods or forecasts), values, k, names)


def write_report(report, text_file, csv_file):
    with open(text_file, "w", encoding="utf-8", newline="\n") as f:
        f.write(report.to_text() + "\n")
    report.to_frame().to_csv(csv_file, float_format="%.17g", lineterminator="\n")


def plot_frame(feature, actual, forecasts):
    """
    Per-feature plot data in long format: step, actual, predicted, method.

    :param feature: feature index
    :param actual: k x m
    :param forecasts: dict method -> k x m
    """
    parts = []
    for method, values in forecasts.items():
        values = np.asarray(values)
        parts.append(pd.DataFrame({"step": np.arange(len(values)),
                                   "actual": np.asarray(actual)[:len(values), feature],
                                   "predicted": values[:, feature],
                                   "method": method}))
    return pd.concat(parts, ignore_index=True)


def windowed_rmse(predicted, actual, window_size):
    """
    Mean-over-features RMSE of each consecutive window.

    :return: vector, one value per whole window
    """
    predicted = np.asarray(predicted, dtype=np.float64)
    actual = np.asarray(actual, dtype=np.float64)
    count = min(len(predicted), len(actual)) // window_size
    if count == 0:
        raise InsufficientDataError("need at least one whole window of %d rows" % window_size)
    return np.array([np.mean(rmse(predicted[i * window_size:(i + 1) * window_size],
                                  actual[i * window_size:(i + 1) * window_size])) for i in range(count)])


def degradation_trend(window_errors):
    """
    Spearman rank correlation between window index and window error; positive when the error grows.
    """
    window_errors = np.asarray(window_errors, dtype=np.float64)
    if len(window_errors) < 2 or np.ptp(window_errors) == 0.0:
        return 0.0
    return float(stats.spearmanr(np.arange(len(window_errors)), window_errors).correlation)
