"""
Output directory layout and run manifests.

Date: Oct 2026

"""

import hashlib
import io
import json
import os

from pdmtools.exceptions import ArtifactIOError

GAN_WEIGHTS = "gan.pgf"
BILSTM_WEIGHTS = "bilstm.pgf"
GAN_HISTORY = "gan_history.csv"
BILSTM_HISTORY = "bilstm_history.csv"
LATENT_TRACE = "latent_trace.csv"
REPORT_TEXT = "rmse_report.txt"
REPORT_CSV = "rmse_report.csv"
DEGRADATION = "degradation.csv"


def series_file(path):
    return "forecast_" + path + ".csv"


def plot_data_file(feature):
    return "plot_" + feature + ".csv"


def plot_file(feature):
    return "plot_" + feature + ".svg"


def make_dir(directory):
    os.makedirs(directory, exist_ok=True)
    return directory


def require_artifact(directory, filename, command):
    """
    Path of an artifact an earlier command should have produced.

    :param command: the command that produces it, named in the error
    """
    path = os.path.join(directory, filename)
    if not os.path.isfile(path):
        raise ArtifactIOError("missing %s; run `forecaster %s` first" % (path, command))
    return path


def get_all_artifact_files(root_dir, extension):
    list_of_files = []
    for dirpath, dirnames, filenames in os.walk(root_dir):
        for fname in sorted(filenames):
            if fname.endswith(extension):
                list_of_files.append(os.path.join(dirpath, fname))
    return sorted(list_of_files)


def file_digest(path):
    digest = hashlib.sha256()
    with open(path, "rb") as f:
        for block in iter(lambda: f.read(1 << 16), b""):
            digest.update(block)
    return digest.hexdigest()


def get_manifest_id(command, seed, config_digest):
    return command + "-" + str(seed) + "-" + config_digest[:12]


def write_manifest(directory, command, config, config_digest, artifacts, extra=None):
    """
    Record what a command produced and the configuration it ran with. No timestamps are stored, so
    identical runs give identical manifests.

    :param directory: output directory
    :param command: e.g. "train"
    :param config: RunConfig
    :param config_digest: config_hash(config)
    :param artifacts: paths written by the command
    :param extra: optional dict of further entries
    :return: manifest path
    """
    manifest = {
        "id": get_manifest_id(command, config.seed, config_digest),
        "command": command,
        "seed": config.seed,
        "config_hash": config_digest,
        "config": {key: (list(value) if isinstance(value, tuple) else value)
                   for key, value in sorted(vars(config).items())},
        "artifacts": {os.path.relpath(path, directory): file_digest(path) for path in sorted(artifacts)},
    }
    if extra:
        manifest.update(extra)
    path = os.path.join(directory, "manifest_" + command.replace("-", "_") + ".json")
    with io.open(path, mode="w", encoding="utf-8", newline="\n") as f:
        json.dump(manifest, f, indent=2, sort_keys=True)
        f.write("\n")
    return path


def read_manifest(path):
    try:
        with io.open(path, mode="r", encoding="utf-8") as f:
            return json.load(f)
    except FileNotFoundError:
        raise ArtifactIOError("manifest not found: %s" % path)
