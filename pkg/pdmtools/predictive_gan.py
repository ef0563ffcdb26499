"""
Predictive GAN: the trained generator used as a one-step-ahead predictor.

For each time level a latent vector is drawn at random and optimised with Adam so that the first
n - 1 rows of G(z) match the n - 1 known rows (weighted mean squared error). Row n of the best
G(z) is the prediction. predict_window repeats this n times, sliding the conditioning block over
its own predictions.

Any object with a latent_dim, a window_shape, forward_window(z) and backward_window(d_window) can
stand in for the generator.

Date: Oct 2026

"""

import logging
from dataclasses import dataclass
from typing import Optional

import numpy as np
import pandas as pd

from pdmtools.exceptions import OptimizationDivergedError, ParameterError, ShapeError, ValidationError
from pdmtools.optimizers import Adam

logger = logging.getLogger(__name__)

TRACE_COLUMNS = ["restart", "iteration", "loss", "best_loss"]


@dataclass(frozen=True)
class LatentVector:
    values: np.ndarray

    def __post_init__(self):
        values = np.asarray(self.values, dtype=np.float64)
        if values.ndim != 1 or not np.all(np.isfinite(values)):
            raise ValidationError("latent vector must be a finite 1-D array")
        object.__setattr__(self, "values", values)

    def __len__(self):
        return len(self.values)


@dataclass(frozen=True)
class FeatureWeights:
    """
    Per-feature weights of the latent-search loss, all ones unless given.
    """
    weights: np.ndarray

    def __post_init__(self):
        weights = np.asarray(self.weights, dtype=np.float64)
        if weights.ndim != 1 or len(weights) == 0 or not np.all(np.isfinite(weights)) or np.any(weights <= 0):
            raise ParameterError("feature weights must be strictly positive, got %s" % (self.weights,))
        object.__setattr__(self, "weights", weights)

    @classmethod
    def ones(cls, num_features=4):
        return cls(np.ones(num_features))

    def __len__(self):
        return len(self.weights)


@dataclass(frozen=True)
class LatentOptConfig:
    iterations: int = 10000
    lr: float = 1e-2
    tolerance: Optional[float] = None
    patience: int = 200
    min_improvement: float = 1e-6
    restarts: int = 1
    warm_start: bool = False
    seed: int = 0

    def __post_init__(self):
        if self.iterations < 1:
            raise ParameterError("latent iterations must be at least 1")
        if self.lr <= 0:
            raise ParameterError("latent learning rate must be positive")
        if self.restarts < 1:
            raise ParameterError("latent restarts must be at least 1")
        if self.patience < 1:
            raise ParameterError("latent patience must be at least 1")


def weighted_mse(predicted, known, weights):
    """
    (1 / (k m)) sum_t sum_j w_j (predicted[t, j] - known[t, j])^2

    :param predicted: k x m
    :param known: k x m
    :param weights: FeatureWeights of length m
    :return: float
    """
    predicted = np.asarray(predicted, dtype=np.float64)
    known = np.asarray(known, dtype=np.float64)
    if predicted.shape != known.shape or predicted.ndim != 2 or len(predicted) == 0:
        raise ShapeError("predicted %s and known %s must be equal k x m blocks with k >= 1"
                         % (predicted.shape, known.shape))
    if predicted.shape[1] != len(weights):
        raise ShapeError("%d weights for %d features" % (len(weights), predicted.shape[1]))
    return float(np.mean(weights.weights * (predicted - known) ** 2))


def latent_loss_and_gradient(generator, z, known, weights):
    """
    Weighted MSE between the first k rows of G(z) and the known block, and its gradient in z.
    """
    window = generator.forward_window(z)
    k = len(known)
    loss = weighted_mse(window[:k], known, weights)
    d_window = np.zeros_like(window)
    d_window[:k] = 2.0 * weights.weights * (window[:k] - known) / known.size
    return loss, generator.backward_window(d_window)


def _check_known(generator, known, weights):
    known = np.asarray(known, dtype=np.float64)
    n, m = generator.window_shape
    if known.shape != (n - 1, m):
        raise ShapeError("known block must be %d x %d, got %s" % (n - 1, m, known.shape))
    if len(weights) != m:
        raise ShapeError("%d weights for %d features" % (len(weights), m))
    return known


def _entropy(seed):
    return [int(s) for s in np.atleast_1d(seed)]


def optimize_latent(generator, known, weights, config, seed=None, initial=None, trace=None):
    """
    Adam descent on the latent vector with keep-best semantics.

    Each restart starts from a fresh standard normal draw (restart 0 starts from `initial` when
    given). A restart stops after config.iterations steps, when the loss drops below
    config.tolerance, or when the best loss has not improved by config.min_improvement over
    config.patience iterations.

    :param generator: GeneratorModel or any object with the same window interface
    :param known: (n - 1) x m block in generator scale
    :param weights: FeatureWeights
    :param config: LatentOptConfig
    :param seed: int or sequence of ints, defaults to config.seed
    :param initial: optional starting latent for the first restart
    :param trace: optional list that receives (restart, iteration, loss, best_loss) per iteration
    :return: (LatentVector, best loss)
    """
    known = _check_known(generator, known, weights)
    entropy = _entropy(config.seed if seed is None else seed)
    best_z, best_loss = None, np.inf

    for restart in range(config.restarts):
        if restart == 0 and initial is not None:
            z = np.array(initial.values if isinstance(initial, LatentVector) else initial, dtype=np.float64)
        else:
            z = np.random.default_rng(entropy + [restart]).standard_normal(generator.latent_dim)
        params = {"z": z}
        optimizer = Adam(lr=config.lr)
        run_best_z, run_best = z.copy(), np.inf
        mark, mark_iteration = np.inf, 0

        for iteration in range(1, config.iterations + 1):
            loss, dz = latent_loss_and_gradient(generator, params["z"], known, weights)
            if not (np.isfinite(loss) and np.all(np.isfinite(dz))):
                raise OptimizationDivergedError(iteration)
            if loss < run_best:
                run_best, run_best_z = loss, params["z"].copy()
            if trace is not None:
                trace.append((restart, iteration, loss, run_best))

            if config.tolerance is not None and run_best < config.tolerance:
                break
            if run_best < mark - config.min_improvement:
                mark, mark_iteration = run_best, iteration
            elif iteration - mark_iteration >= config.patience:
                break
            optimizer.step(params, {"z": dz})

        logger.debug("restart %d stopped after %d iterations at loss %.6g", restart, iteration, run_best)
        if run_best < best_loss:
            best_z, best_loss = run_best_z, run_best

    return LatentVector(best_z), float(best_loss)


def _predict(generator, known, weights, config, seed, initial=None, trace=None):
    z, loss = optimize_latent(generator, known, weights, config, seed=seed, initial=initial, trace=trace)
    return generator.forward_window(z.values)[-1].copy(), z, loss


def predict_next(generator, known, weights, config, seed=None, trace=None):
    """
    Predict the n-th time level from the n - 1 levels before it.

    :return: m-vector in generator scale
    """
    row, _, _ = _predict(generator, known, weights, config, config.seed if seed is None else seed, trace=trace)
    return row


def predict_window(generator, seed_rows, weights, config, trace=None, level_offset=0):
    """
    Autoregressive roll-out of n predictions. Prediction i conditions on the latest n - 1 rows:
    n - i seed rows followed by the i - 1 predictions made so far.

    Level l (counted from level_offset + 1) draws its latents from seed (config.seed, l). With
    config.warm_start the optimised latent of a level starts the next one.

    :param seed_rows: (n - 1) x m, the last known values in generator scale
    :param trace: optional list receiving the latent-search trace of the first level only
    :return: n x m window
    """
    seed_rows = _check_known(generator, seed_rows, weights)
    n = generator.window_shape[0]
    rows = list(seed_rows)
    predictions = []
    z = None
    for i in range(1, n + 1):
        level = level_offset + i
        known = np.array(rows[-(n - 1):])
        row, z, loss = _predict(generator, known, weights, config, (config.seed, level),
                                initial=z if config.warm_start else None,
                                trace=trace if i == 1 else None)
        logger.debug("level %d: latent loss %.6g", level, loss)
        rows.append(row)
        predictions.append(row)
    return np.array(predictions)


def predgan_rollout(generator, seed_rows, weights, config, windows):
    """
    Predictive GAN alone over several windows, each seeded by the last n - 1 rows of the previous.

    :return: list of n x m windows
    """
    if windows < 1:
        raise ParameterError("rollout needs at least one window")
    n = generator.window_shape[0]
    out = []
    block = np.asarray(seed_rows, dtype=np.float64)
    for w in range(windows):
        window = predict_window(generator, block, weights, config, level_offset=w * n)
        logger.info("predictive gan rollout: window %d of %d", w + 1, windows)
        out.append(window)
        block = window[1:]
    return out


def trace_frame(trace):
    return pd.DataFrame(trace, columns=TRACE_COLUMNS).astype({"restart": int, "iteration": int})


def write_trace(trace, file):
    """
    Write the winning restart's trace as CSV iteration,loss.
    """
    frame = trace_frame(trace)
    if len(frame):
        final = frame.groupby("restart")["best_loss"].last()
        frame = frame[frame["restart"] == final.idxmin()]
    frame[["iteration", "loss"]].to_csv(file, index=False, float_format="%.17g", lineterminator="\n")
