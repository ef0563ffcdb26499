"""
Run configuration: a flat key = value file, command-line overrides and the hash recorded in
every manifest.

Date: Oct 2026

"""

import dataclasses
import hashlib
import io
import typing
from dataclasses import dataclass
from typing import Optional

from pdmtools.bilstm import SeqTrainConfig
from pdmtools.exceptions import ArtifactIOError, ConfigError, PdmToolsError
from pdmtools.gan import GanTrainConfig
from pdmtools.interleave import InterleaveConfig
from pdmtools.predictive_gan import FeatureWeights, LatentOptConfig

PIPELINE_ORDERS = ("smooth_then_fuse", "fuse_then_smooth")
TRUE_WORDS = ("true", "yes", "1", "on")
FALSE_WORDS = ("false", "no", "0", "off")


@dataclass(frozen=True)
class RunConfig:
    data_path: Optional[str] = None
    machine_id: int = 1
    smoothing_window: int = 24
    fusion_window: int = 3
    pipeline_order: str = "smooth_then_fuse"
    train_fraction: float = 0.7
    window_size: int = 9
    stride: int = 1

    latent_dim: int = 100
    gan_epochs: int = 50000
    gan_batch_size: int = 32
    gan_lr: float = 1e-4
    gan_beta1: float = 0.5
    epoch_semantics: str = "batch"
    leaky_slope: float = 0.3
    dropout_rate: float = 0.3

    bilstm_epochs: int = 200
    bilstm_batch_size: int = 32
    bilstm_lr: float = 1e-3
    hidden_size: int = 64
    pair_stride: int = 1
    cell_activation: str = "tanh"
    output_activation: str = "identity"

    latent_iterations: int = 10000
    latent_lr: float = 1e-2
    latent_tolerance: Optional[float] = None
    latent_patience: int = 200
    latent_min_improvement: float = 1e-6
    latent_restarts: int = 1
    latent_warm_start: bool = False
    feature_weights: Optional[tuple] = None

    horizon_windows: int = 3
    ar_order: int = 1
    ar_difference: int = 0
    include_mean_baseline: bool = False
    rollout_windows: int = 0

    seed: int = 0
    output_dir: str = "output"
    log_every: int = 100

    def __post_init__(self):
        positive = ("machine_id", "smoothing_window", "fusion_window", "window_size", "stride", "latent_dim",
                    "gan_batch_size", "bilstm_batch_size", "hidden_size", "pair_stride", "latent_iterations",
                    "latent_patience", "latent_restarts", "horizon_windows", "log_every")
        for key in positive:
            if getattr(self, key) < 1:
                raise ConfigError(key, "must be a positive integer")
        for key in ("gan_epochs", "bilstm_epochs", "ar_order", "ar_difference", "rollout_windows", "seed"):
            if getattr(self, key) < 0:
                raise ConfigError(key, "must be non-negative")
        for key in ("gan_lr", "bilstm_lr", "latent_lr", "latent_min_improvement"):
            if not getattr(self, key) > 0:
                raise ConfigError(key, "must be positive")
        if not 0.0 < self.train_fraction < 1.0:
            raise ConfigError("train_fraction", "must lie in (0, 1)")
        if self.pipeline_order not in PIPELINE_ORDERS:
            raise ConfigError("pipeline_order", "must be one of %s" % (PIPELINE_ORDERS,))
        if self.window_size % 2 == 0 or self.window_size < 3:
            raise ConfigError("window_size", "must be an odd integer of at least 3")
        if self.gan_batch_size < 2:
            raise ConfigError("gan_batch_size", "must be at least 2")
        if not 0.0 <= self.gan_beta1 < 1.0:
            raise ConfigError("gan_beta1", "must lie in [0, 1)")
        if not 0.0 < self.leaky_slope < 1.0:
            raise ConfigError("leaky_slope", "must lie in (0, 1)")
        if not 0.0 <= self.dropout_rate < 1.0:
            raise ConfigError("dropout_rate", "must lie in [0, 1)")
        if self.epoch_semantics not in ("batch", "pass"):
            raise ConfigError("epoch_semantics", "must be 'batch' or 'pass'")
        if self.cell_activation not in ("tanh", "sigmoid"):
            raise ConfigError("cell_activation", "must be 'tanh' or 'sigmoid'")
        if self.output_activation not in ("identity", "tanh"):
            raise ConfigError("output_activation", "must be 'identity' or 'tanh'")
        if self.latent_tolerance is not None and not self.latent_tolerance > 0:
            raise ConfigError("latent_tolerance", "must be positive")
        if self.feature_weights is not None:
            if len(self.feature_weights) != 4 or any(not w > 0 for w in self.feature_weights):
                raise ConfigError("feature_weights", "needs four strictly positive weights")

    def gan_config(self):
        return GanTrainConfig(epochs=self.gan_epochs, batch_size=self.gan_batch_size, latent_dim=self.latent_dim,
                              seed=self.seed, window_size=self.window_size, gen_lr=self.gan_lr,
                              gen_beta1=self.gan_beta1, disc_lr=self.gan_lr, disc_beta1=self.gan_beta1,
                              leaky_slope=self.leaky_slope, dropout_rate=self.dropout_rate,
                              epoch_semantics=self.epoch_semantics, log_every=self.log_every)

    def seq_config(self):
        return SeqTrainConfig(epochs=self.bilstm_epochs, batch_size=self.bilstm_batch_size, seed=self.seed,
                              lr=self.bilstm_lr, hidden_size=self.hidden_size,
                              cell_activation=self.cell_activation, output_activation=self.output_activation,
                              log_every=self.log_every)

    def latent_config(self):
        return LatentOptConfig(iterations=self.latent_iterations, lr=self.latent_lr,
                               tolerance=self.latent_tolerance, patience=self.latent_patience,
                               min_improvement=self.latent_min_improvement, restarts=self.latent_restarts,
                               warm_start=self.latent_warm_start, seed=self.seed)

    def weights(self):
        if self.feature_weights is None:
            return FeatureWeights.ones(4)
        return FeatureWeights(self.feature_weights)

    def interleave_config(self):
        return InterleaveConfig(horizon_windows=self.horizon_windows, latent=self.latent_config(),
                                weights=self.weights(), seed=self.seed)


FIELD_TYPES = {f.name: f.type for f in dataclasses.fields(RunConfig)}


def _coerce(key, raw):
    if key not in FIELD_TYPES:
        raise ConfigError(key, "unknown configuration key")
    kind = FIELD_TYPES[key]
    text = raw.strip()
    optional = typing.get_origin(kind) is typing.Union
    if optional:
        if text.lower() in ("", "none"):
            return None
        kind = next(a for a in typing.get_args(kind) if a is not type(None))

    try:
        if kind is bool:
            if text.lower() in TRUE_WORDS:
                return True
            if text.lower() in FALSE_WORDS:
                return False
            raise ValueError(text)
        if kind is int:
            return int(text)
        if kind is float:
            return float(text)
        if kind is tuple:
            return tuple(float(v) for v in text.split(","))
    except ValueError:
        raise ConfigError(key, "cannot parse %r as %s" % (raw, kind.__name__))
    return text


def parse_config_file(config_file):
    """
    Read a key = value file into raw strings; blank lines and # comments are skipped.

    :param config_file:
    :return: dict key -> raw value
    """
    entries = {}
    try:
        with io.open(config_file, mode="r", encoding="utf-8") as cfg:
            for line_number, line in enumerate(cfg, start=1):
                line = line.strip()
                if not line or line.startswith("#"):
                    continue
                key, sep, value = line.partition("=")
                if not sep or not key.strip():
                    raise ConfigError(line, "%s line %d is not 'key = value'" % (config_file, line_number))
                entries[key.strip()] = value.strip()
    except FileNotFoundError:
        raise ArtifactIOError("config file not found: %s" % config_file)
    return entries


def parse_overrides(items):
    """
    :param items: strings "key=value"
    :return: dict key -> raw value
    """
    entries = {}
    for item in items:
        key, sep, value = item.partition("=")
        if not sep or not key.strip():
            raise ConfigError(item, "override must look like key=value")
        entries[key.strip()] = value
    return entries


def load_run_config(config_file=None, overrides=(), seed=None, output_dir=None):
    """
    defaults < config file < --seed / --out < key=value overrides

    :return: RunConfig
    """
    raw = parse_config_file(config_file) if config_file else {}
    if seed is not None:
        raw["seed"] = str(seed)
    if output_dir is not None:
        raw["output_dir"] = str(output_dir)
    raw.update(parse_overrides(overrides))
    values = {key: _coerce(key, value) for key, value in raw.items()}
    try:
        return RunConfig(**values)
    except PdmToolsError:
        raise
    except TypeError as e:
        raise ConfigError("?", str(e))


def render(config):
    """
    Canonical key = value text, sorted by key; what config_hash digests.
    """
    lines = []
    for key in sorted(FIELD_TYPES):
        value = getattr(config, key)
        if isinstance(value, tuple):
            value = ",".join(repr(float(v)) for v in value)
        elif isinstance(value, bool):
            value = "true" if value else "false"
        elif isinstance(value, float):
            value = repr(value)
        lines.append("%s = %s" % (key, value))
    return "\n".join(lines) + "\n"


def config_hash(config):
    return hashlib.sha256(render(config).encode("utf-8")).hexdigest()
