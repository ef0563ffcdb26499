import pytest

from pdmtools.exceptions import ArtifactIOError, EmptySelectionError, ParseError, SchemaError, ValidationError
from pdmtools.frame_utils import Origin
from pdmtools.read_telemetry import filter_machine, load_telemetry, write_telemetry
from tests.conftest import SMOKE_CSV

ROWS = [
    "2015-01-01 06:00:00,1,176.217853015625,418.504078221616,113.077935462083,45.0876857639276",
    "2015-01-01 07:00:00,1,162.87922289706,402.747489565395,95.4605253823187,43.4139726834815",
]


def test_two_rows_in_file_order(write_csv):
    records = load_telemetry(write_csv(ROWS))
    assert len(records) == 2
    assert records[0].timestamp.hour == 6
    assert records[1].volt == 162.87922289706
    assert records[0].machine_id == 1


def test_unparseable_machine_id_names_row(write_csv):
    with pytest.raises(ParseError) as e:
        load_telemetry(write_csv(["2015-01-01 06:00:00,abc,1,2,3,4"]))
    assert e.value.row == 2
    assert e.value.column == "machineID"


def test_bad_value_on_later_row(write_csv):
    with pytest.raises(ParseError) as e:
        load_telemetry(write_csv(ROWS + ["2015-01-01 08:00:00,1,1,2,nan,4"]))
    assert e.value.row == 4
    assert e.value.column == "pressure"


def test_bad_timestamp(write_csv):
    with pytest.raises(ParseError) as e:
        load_telemetry(write_csv(["01/01/2015 06:00,1,1,2,3,4"]))
    assert e.value.column == "datetime"


def test_missing_column_is_named(write_csv):
    header = "datetime,machineID,volt,rotate,pressure\n"
    with pytest.raises(SchemaError) as e:
        load_telemetry(write_csv(["2015-01-01 06:00:00,1,1,2,3"], header=header))
    assert e.value.column == "vibration"


def test_missing_file(tmp_path):
    with pytest.raises(ArtifactIOError) as e:
        load_telemetry(str(tmp_path / "nope.csv"))
    assert "nope.csv" in str(e.value)


def test_filter_machine(write_csv):
    rows = ["2015-01-01 0%d:00:00,%d,%d,2,3,4" % (h, mid, h) for h, mid in
            [(3, 1), (1, 2), (1, 1), (2, 1), (2, 2)]]
    frame = filter_machine(load_telemetry(write_csv(rows)), 1)
    assert len(frame) == 3
    assert frame.origin is Origin.RAW
    # chronological
    assert list(frame.values[:, 0]) == [1.0, 2.0, 3.0]


def test_filter_absent_machine(write_csv):
    records = load_telemetry(write_csv(ROWS))
    with pytest.raises(EmptySelectionError):
        filter_machine(records, 999)
    with pytest.raises(EmptySelectionError):
        filter_machine([], 1)


def test_duplicate_timestamp_rejected(write_csv):
    records = load_telemetry(write_csv([ROWS[0], ROWS[0]]))
    with pytest.raises(ValidationError):
        filter_machine(records, 1)


def test_write_then_load_keeps_values(write_csv, tmp_path):
    records = load_telemetry(write_csv(ROWS))
    out = str(tmp_path / "copy.csv")
    write_telemetry(records, out)
    assert load_telemetry(out) == records


def test_bundled_smoke_dataset():
    frame = filter_machine(load_telemetry(SMOKE_CSV), 1)
    assert frame.values.shape == (200, 4)
