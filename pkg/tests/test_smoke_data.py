from pdmtools.read_telemetry import filter_machine, load_telemetry
from pdmtools.smoke_data import smoke_values, write_smoke_dataset
from tests.conftest import SMOKE_CSV


def test_bundled_dataset_loads():
    frame = filter_machine(load_telemetry(SMOKE_CSV), 1)
    assert frame.values.shape == (200, 4)


def test_generated_dataset(tmp_path):
    path = write_smoke_dataset(str(tmp_path / "smoke.csv"))
    frame = filter_machine(load_telemetry(path), 1)
    assert frame.values.shape == (200, 4)
    assert abs(frame.values[:, 0].mean() - 170.0) < 5.0


def test_same_seed_same_file(tmp_path):
    a = write_smoke_dataset(str(tmp_path / "a.csv"), rows=50, seed=7)
    b = write_smoke_dataset(str(tmp_path / "b.csv"), rows=50, seed=7)
    c = write_smoke_dataset(str(tmp_path / "c.csv"), rows=50, seed=8)
    with open(a, "rb") as fa, open(b, "rb") as fb, open(c, "rb") as fc:
        first = fa.read()
        assert first == fb.read()
        assert first != fc.read()


def test_values_shape():
    assert smoke_values(30, 1).shape == (30, 4)
