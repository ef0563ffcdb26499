"""
The windowed DCGAN: generator and discriminator architectures, the cross-entropy losses and the
alternating training loop.

The generator maps a latent vector to an n x m x 1 window (9 x 4 x 1 for the reference setup):

    dense (h*m*c0) -> batchnorm -> leaky relu -> reshape h x m x c0
    conv2d_transpose c1, stride 1 -> batchnorm -> leaky relu
    conv2d_transpose c2, stride 1 -> batchnorm -> leaky relu
    conv2d_transpose 1, stride (2, 1) -> tanh

with h = 5 for n = 9 and (c0, c1, c2) = (256, 128, 64). The discriminator mirrors it:

    conv2d 64, stride (2, 1) -> leaky relu -> dropout 0.3
    conv2d 128, stride 1 -> leaky relu -> dropout 0.3
    flatten -> dense 1 (a logit; sigmoid gives D(x))

All kernels are 3 x 3 with padding (1, 1).

Date: Oct 2026

"""

import logging
from dataclasses import dataclass

import numpy as np
import pandas as pd
from scipy.special import expit, log_expit, logit

from pdmtools.chunk import WINDOW_SIZE, stack_windows
from pdmtools.exceptions import (InsufficientDataError, NumericError, ParameterError, ShapeError,
                                 TrainingDivergedError)
from pdmtools.layers import INFER, TRAIN, LayerSpec, conv_output_shape
from pdmtools.network import Network, ParameterStore
from pdmtools.optimizers import Adam
from pdmtools.pgf_format import read_pgf, write_pgf

logger = logging.getLogger(__name__)

KERNEL = (3, 3)
DOWN_STRIDE = (2, 1)
SAME_STRIDE = (1, 1)
PAD = (1, 1)

GEN_PREFIX = "gen"
DISC_PREFIX = "disc"


@dataclass(frozen=True)
class GanTrainConfig:
    epochs: int = 50000
    batch_size: int = 32
    latent_dim: int = 100
    seed: int = 0
    window_size: int = WINDOW_SIZE
    num_features: int = 4
    gen_lr: float = 1e-4
    gen_beta1: float = 0.5
    disc_lr: float = 1e-4
    disc_beta1: float = 0.5
    leaky_slope: float = 0.3
    dropout_rate: float = 0.3
    gen_channels: tuple = (256, 128, 64)
    disc_channels: tuple = (64, 128)
    epoch_semantics: str = "batch"
    log_every: int = 100

    def __post_init__(self):
        if self.epochs < 0:
            raise ParameterError("epochs must be non-negative")
        if self.batch_size < 2:
            raise ParameterError("batch size must be at least 2 (batch normalisation)")
        if self.latent_dim < 1:
            raise ParameterError("latent dimension must be positive")
        if self.epoch_semantics not in ("batch", "pass"):
            raise ParameterError("epoch semantics must be 'batch' or 'pass'")
        if len(self.gen_channels) != 3 or len(self.disc_channels) != 2:
            raise ParameterError("generator needs 3 channel widths and discriminator 2")


def generator_specs(config):
    n, m = config.window_size, config.num_features
    if n % 2 == 0:
        raise ShapeError("window size must be odd for the stride-2 up-sampling, got %d" % n)
    down_h, down_w = conv_output_shape(n, m, KERNEL, DOWN_STRIDE, PAD)
    c0, c1, c2 = config.gen_channels
    slope = {"slope": config.leaky_slope}
    return [
        LayerSpec("dense", {"units": down_h * down_w * c0}, "dense"),
        LayerSpec("batchnorm", {}, "bn0"),
        LayerSpec("leaky_relu", slope, "act0"),
        LayerSpec("reshape", {"target_shape": (down_h, down_w, c0)}, "reshape"),
        LayerSpec("conv2d_transpose", {"filters": c1, "kernel": KERNEL, "stride": SAME_STRIDE, "pad": PAD}, "convt1"),
        LayerSpec("batchnorm", {}, "bn1"),
        LayerSpec("leaky_relu", slope, "act1"),
        LayerSpec("conv2d_transpose", {"filters": c2, "kernel": KERNEL, "stride": SAME_STRIDE, "pad": PAD}, "convt2"),
        LayerSpec("batchnorm", {}, "bn2"),
        LayerSpec("leaky_relu", slope, "act2"),
        LayerSpec("conv2d_transpose", {"filters": 1, "kernel": KERNEL, "stride": DOWN_STRIDE, "pad": PAD}, "convt3"),
        LayerSpec("tanh", {}, "tanh"),
    ]


def discriminator_specs(config):
    c0, c1 = config.disc_channels
    slope = {"slope": config.leaky_slope}
    rate = {"rate": config.dropout_rate}
    return [
        LayerSpec("conv2d", {"filters": c0, "kernel": KERNEL, "stride": DOWN_STRIDE, "pad": PAD}, "conv0"),
        LayerSpec("leaky_relu", slope, "act0"),
        LayerSpec("dropout", rate, "drop0"),
        LayerSpec("conv2d", {"filters": c1, "kernel": KERNEL, "stride": SAME_STRIDE, "pad": PAD}, "conv1"),
        LayerSpec("leaky_relu", slope, "act1"),
        LayerSpec("dropout", rate, "drop1"),
        LayerSpec("flatten", {}, "flatten"),
        LayerSpec("dense", {"units": 1}, "logit"),
    ]


class GeneratorModel:
    """
    G: latent vector -> n x m x 1 window in (-1, 1).
    """

    def __init__(self, config, params=None):
        self.config = config
        self.latent_dim = config.latent_dim
        self.window_shape = (config.window_size, config.num_features)
        self.network = Network(generator_specs(config), (config.latent_dim,), GEN_PREFIX,
                               seed=config.seed, params=params)
        if self.network.output_shape != self.window_shape + (1,):
            raise ShapeError("generator produces %s, expected %s"
                             % (self.network.output_shape, self.window_shape + (1,)))

    @property
    def params(self):
        return self.network.params

    def forward_window(self, z):
        """
        Infer-mode forward of a single latent, recorded for backward_window.

        :return: n x m window
        """
        z = np.asarray(z, dtype=np.float64)
        if z.shape != (self.latent_dim,):
            raise ShapeError("latent vector must have length %d, got shape %s" % (self.latent_dim, z.shape))
        return self.network.forward(z[None], INFER)[0, :, :, 0]

    def backward_window(self, d_window):
        """
        Gradient with respect to the latent of the last forward_window call.
        """
        _, dz = self.network.backward(np.asarray(d_window)[None, :, :, None])
        return dz[0]


class DiscriminatorModel:
    """
    D: n x m x 1 window -> logit; sigmoid(logit) is the probability the window is real.
    """

    def __init__(self, config, params=None):
        self.config = config
        self.network = Network(discriminator_specs(config), (config.window_size, config.num_features, 1),
                               DISC_PREFIX, seed=config.seed + 1, params=params)
        if self.network.output_shape != (1,):
            raise ShapeError("discriminator produces %s, expected a scalar" % (self.network.output_shape,))

    @property
    def params(self):
        return self.network.params

    def probability(self, windows):
        """
        Infer-mode D(x) for a batch of n x m windows.
        """
        x = np.asarray(windows, dtype=np.float64)[..., None]
        return expit(self.network.forward(x, INFER)[:, 0])


def generate(generator, z):
    """
    Map a latent vector to a window.

    :param generator: GeneratorModel
    :param z: latent vector of length latent_dim
    :return: n x m array, entries in (-1, 1)
    """
    return generator.forward_window(z)


# ----------------------------------------------------------------------------------------------
# losses

def discriminator_loss_from_logits(real_logits, fake_logits):
    """
    mean(-log sigmoid(a_real)) + mean(-log(1 - sigmoid(a_fake))), evaluated in logit space.

    :return: (loss, dloss/dreal_logits, dloss/dfake_logits)
    """
    real_logits = np.asarray(real_logits, dtype=np.float64)
    fake_logits = np.asarray(fake_logits, dtype=np.float64)
    loss = -np.mean(log_expit(real_logits)) - np.mean(log_expit(-fake_logits))
    d_real = (expit(real_logits) - 1.0) / real_logits.size
    d_fake = expit(fake_logits) / fake_logits.size
    return float(loss), d_real, d_fake


def generator_loss_from_logits(fake_logits):
    """
    Non-saturating generator loss mean(-log sigmoid(a_fake)).

    :return: (loss, dloss/dfake_logits)
    """
    fake_logits = np.asarray(fake_logits, dtype=np.float64)
    loss = -np.mean(log_expit(fake_logits))
    return float(loss), (expit(fake_logits) - 1.0) / fake_logits.size


def discriminator_loss(d_real, d_fake):
    """
    Mean over the batch of -log D(x) - log(1 - D(G(z))).

    :param d_real: probabilities assigned to real windows
    :param d_fake: probabilities assigned to generated windows
    :return: float
    """
    return discriminator_loss_from_logits(logit(np.asarray(d_real, dtype=np.float64)),
                                          logit(np.asarray(d_fake, dtype=np.float64)))[0]


def generator_loss(d_fake):
    """
    Mean of -log D(G(z)).
    """
    return generator_loss_from_logits(logit(np.asarray(d_fake, dtype=np.float64)))[0]


# ----------------------------------------------------------------------------------------------
# training

class GanTrainer:
    """
    Alternating 1:1 discriminator / generator updates with Adam.

    :param windows: array (num_samples, n, m) in generator scale
    :param config: GanTrainConfig
    """

    def __init__(self, windows, config, generator=None, discriminator=None):
        self.windows = np.asarray(windows, dtype=np.float64)
        self.config = config
        if self.windows.ndim != 3 or self.windows.shape[1:] != (config.window_size, config.num_features):
            raise ShapeError("training windows must be (count, %d, %d), got %s"
                             % (config.window_size, config.num_features, self.windows.shape))
        if len(self.windows) < config.batch_size:
            raise InsufficientDataError("batch size %d exceeds the %d training samples"
                                        % (config.batch_size, len(self.windows)))
        self.generator = generator or GeneratorModel(config)
        self.discriminator = discriminator or DiscriminatorModel(config)
        self.gen_opt = Adam(lr=config.gen_lr, beta1=config.gen_beta1)
        self.disc_opt = Adam(lr=config.disc_lr, beta1=config.disc_beta1)
        self.rng = np.random.default_rng([config.seed, 2])

    def sample_latent(self, count):
        return self.rng.standard_normal((count, self.config.latent_dim))

    def _seed(self):
        return int(self.rng.integers(2 ** 63 - 1))

    def discriminator_step(self, real, z, seed=None):
        """
        One discriminator update on a real batch and the generator's output for z.

        :return: discriminator loss before the update
        """
        seed = self._seed() if seed is None else seed
        fake = self.generator.network.forward(z, TRAIN, seed)
        batch = np.concatenate([real[..., None], fake])
        logits = self.discriminator.network.forward(batch, TRAIN, seed)[:, 0]
        loss, d_real, d_fake = discriminator_loss_from_logits(logits[:len(real)], logits[len(real):])
        grads, _ = self.discriminator.network.backward(np.concatenate([d_real, d_fake])[:, None])
        self.disc_opt.step(self.discriminator.params, grads)
        return loss

    def generator_loss(self, z, seed):
        """
        Generator loss and gradients for a latent batch against the current discriminator,
        without updating anything.
        """
        fake = self.generator.network.forward(z, TRAIN, seed)
        logits = self.discriminator.network.forward(fake, TRAIN, seed)[:, 0]
        loss, d_logits = generator_loss_from_logits(logits)
        _, d_fake = self.discriminator.network.backward(d_logits[:, None])
        grads, _ = self.generator.network.backward(d_fake)
        return loss, grads

    def generator_step(self, z, seed=None):
        """
        :return: generator loss before the update
        """
        seed = self._seed() if seed is None else seed
        loss, grads = self.generator_loss(z, seed)
        self.gen_opt.step(self.generator.params, grads)
        return loss

    def _batches(self):
        size = self.config.batch_size
        if self.config.epoch_semantics == "batch":
            yield self.rng.choice(len(self.windows), size=size, replace=False)
            return
        order = self.rng.permutation(len(self.windows))
        for start in range(0, len(order) - size + 1, size):
            yield order[start:start + size]

    def train(self):
        """
        :return: DataFrame with columns epoch, d_loss, g_loss (per-epoch means)
        """
        rows = []
        for epoch in range(1, self.config.epochs + 1):
            d_losses, g_losses = [], []
            try:
                for indices in self._batches():
                    d_losses.append(self.discriminator_step(self.windows[indices], self.sample_latent(len(indices))))
                    g_losses.append(self.generator_step(self.sample_latent(len(indices))))
            except NumericError as e:
                raise TrainingDivergedError(epoch, what="values in layer %s" % e.layer) from e

            d_loss, g_loss = float(np.mean(d_losses)), float(np.mean(g_losses))
            if not (np.isfinite(d_loss) and np.isfinite(g_loss)):
                raise TrainingDivergedError(epoch)
            rows.append((epoch, d_loss, g_loss))
            if epoch % self.config.log_every == 0:
                logger.info("gan epoch %d: d_loss %.6f g_loss %.6f", epoch, d_loss, g_loss)

        return pd.DataFrame(rows, columns=["epoch", "d_loss", "g_loss"]).astype({"epoch": int})


def gan_train(samples, config):
    """
    Train the GAN on windows cut from the scaled training frame.

    :param samples: list of WindowSample (or an array (count, n, m)) scaled to [-1, 1]
    :param config: GanTrainConfig
    :return: (GeneratorModel, DiscriminatorModel, loss history DataFrame)
    """
    windows = stack_windows(samples) if isinstance(samples, list) else np.asarray(samples)
    if windows.size and (windows.min() < -1.0 - 1e-9 or windows.max() > 1.0 + 1e-9):
        raise ParameterError("training windows must be scaled to [-1, 1]")
    trainer = GanTrainer(windows, config)
    logger.info("training gan: %d samples, %d epochs, %d generator parameters",
                len(windows), config.epochs, trainer.generator.network.num_parameters())
    history = trainer.train()
    return trainer.generator, trainer.discriminator, history


def save_gan(generator, discriminator, file):
    write_pgf(ParameterStore.merge(generator.params, discriminator.params), file)


def load_gan(file, config):
    """
    :return: (GeneratorModel, DiscriminatorModel) with the stored weights
    """
    store = read_pgf(file, config.seed)
    return (GeneratorModel(config, store.subset(GEN_PREFIX)),
            DiscriminatorModel(config, store.subset(DISC_PREFIX)))
