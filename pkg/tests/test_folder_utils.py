import pytest

from pdmtools import folder_utils as fu
from pdmtools.config import RunConfig, config_hash
from pdmtools.exceptions import ArtifactIOError


def test_require_artifact(tmp_path):
    with pytest.raises(ArtifactIOError) as e:
        fu.require_artifact(str(tmp_path), fu.GAN_WEIGHTS, "train")
    assert "run `forecaster train` first" in str(e.value)
    (tmp_path / fu.GAN_WEIGHTS).write_bytes(b"PGF1")
    assert fu.require_artifact(str(tmp_path), fu.GAN_WEIGHTS, "train").endswith(fu.GAN_WEIGHTS)


def test_artifact_listing(tmp_path):
    (tmp_path / "sub").mkdir()
    for name in ("b.csv", "a.csv", "sub/c.csv", "d.svg"):
        (tmp_path / name).write_text("x")
    files = fu.get_all_artifact_files(str(tmp_path), ".csv")
    assert [f[len(str(tmp_path)) + 1:] for f in files] == ["a.csv", "b.csv", "sub/c.csv"]


def test_manifest(tmp_path):
    config = RunConfig(output_dir=str(tmp_path))
    artifact = tmp_path / "train.csv"
    artifact.write_text("volt\n1\n")
    digest = config_hash(config)
    path = fu.write_manifest(str(tmp_path), "train-gan", config, digest, [str(artifact)], {"gan_samples": 3})
    assert path.endswith("manifest_train_gan.json")

    manifest = fu.read_manifest(path)
    assert manifest["id"] == "train-gan-0-" + digest[:12]
    assert manifest["artifacts"] == {"train.csv": fu.file_digest(str(artifact))}
    assert manifest["gan_samples"] == 3

    with open(path, "rb") as f:
        first = f.read()
    fu.write_manifest(str(tmp_path), "train-gan", config, digest, [str(artifact)], {"gan_samples": 3})
    with open(path, "rb") as f:
        assert f.read() == first


def test_missing_manifest(tmp_path):
    with pytest.raises(ArtifactIOError):
        fu.read_manifest(str(tmp_path / "manifest_train.json"))
