import os

import numpy as np
import pytest

from pdmtools.frame_utils import FEATURE_NAMES, FeatureFrame, Origin
from pdmtools.gan import GanTrainConfig

INPUT_DIR = os.path.join(os.path.dirname(os.path.dirname(os.path.abspath(__file__))), "input")
SMOKE_CSV = os.path.join(INPUT_DIR, "smoke_telemetry.csv")
SMOKE_CFG = os.path.join(INPUT_DIR, "smoke.cfg")

HEADER = "datetime,machineID,volt,rotate,pressure,vibration\n"


@pytest.fixture
def rng():
    return np.random.default_rng(1234)


@pytest.fixture
def write_csv(tmp_path):
    """
    Write telemetry rows (strings without the header) to a CSV and return its path.
    """
    def _write(rows, header=HEADER, name="telemetry.csv"):
        path = tmp_path / name
        path.write_text(header + "".join(r + "\n" for r in rows))
        return str(path)
    return _write


@pytest.fixture
def scaled_frame(rng):
    values = rng.uniform(-1.0, 1.0, size=(40, 4))
    return FeatureFrame(values, FEATURE_NAMES, Origin.SCALED,
                        (Origin.RAW, Origin.SMOOTHED, Origin.FUSED, Origin.SCALED))


@pytest.fixture
def small_gan_config():
    return GanTrainConfig(epochs=0, batch_size=4, latent_dim=6, seed=3, gen_channels=(6, 4, 3),
                          disc_channels=(3, 4), log_every=1)
