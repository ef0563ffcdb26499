"""
The telemetry file is a CSV with one row per machine and hour:

    datetime,machineID,volt,rotate,pressure,vibration

This file contains functions to read it, to select a single machine and to write it back.


Date: Oct 2026

"""

import logging
from dataclasses import dataclass
from datetime import datetime

import numpy as np
import pandas as pd

from pdmtools.exceptions import (ArtifactIOError, EmptySelectionError, ParseError, SchemaError,
                                 ValidationError)
from pdmtools.frame_utils import FEATURE_NAMES, FeatureFrame, Origin

logger = logging.getLogger(__name__)

TELEMETRY_COLUMNS = ("datetime", "machineID", "volt", "rotate", "pressure", "vibration")
DATETIME_FORMAT = "%Y-%m-%d %H:%M:%S"


@dataclass(frozen=True)
class TelemetryRecord:
    timestamp: datetime
    machine_id: int
    volt: float
    rotate: float
    pressure: float
    vibration: float

    def features(self):
        return self.volt, self.rotate, self.pressure, self.vibration


def _first_bad_row(mask, df, column):
    bad = int(np.flatnonzero(mask)[0])
    # row 1 is the header
    raise ParseError(row=bad + 2, column=column, value=df[column].iloc[bad])


def load_telemetry(path):
    """
    Parse the telemetry CSV into records, keeping the file order.

    :param path: location of a PdM_telemetry.csv style file
    :return: list of TelemetryRecord
    """
    try:
        df = pd.read_csv(path, dtype=str, keep_default_na=False)
    except FileNotFoundError:
        raise ArtifactIOError("telemetry file not found: %s" % path)
    except pd.errors.EmptyDataError:
        raise SchemaError(TELEMETRY_COLUMNS[0], path)

    for column in TELEMETRY_COLUMNS:
        if column not in df.columns:
            raise SchemaError(column, path)

    timestamps = pd.to_datetime(df["datetime"].str.strip(), format=DATETIME_FORMAT, errors="coerce")
    if timestamps.isna().any():
        _first_bad_row(timestamps.isna().to_numpy(), df, "datetime")

    ids = pd.to_numeric(df["machineID"].str.strip(), errors="coerce")
    bad_ids = ids.isna().to_numpy() | (ids.fillna(0) % 1 != 0).to_numpy() | (ids.fillna(1) < 1).to_numpy()
    if bad_ids.any():
        _first_bad_row(bad_ids, df, "machineID")

    features = {}
    for column in FEATURE_NAMES:
        parsed = pd.to_numeric(df[column].str.strip(), errors="coerce").to_numpy(dtype=np.float64)
        if not np.all(np.isfinite(parsed)):
            _first_bad_row(~np.isfinite(parsed), df, column)
        features[column] = parsed

    records = [TelemetryRecord(ts.to_pydatetime(), int(mid), v, r, p, vib)
               for ts, mid, v, r, p, vib in zip(timestamps, ids.to_numpy(),
                                                features["volt"], features["rotate"],
                                                features["pressure"], features["vibration"])]
    logger.info("read %d telemetry records from %s", len(records), path)
    return records


def filter_machine(records, machine_id=1):
    """
    Select the records of one machine in chronological order, projected to the four features.

    :param records: list of TelemetryRecord
    :param machine_id: e.g. 1
    :return: FeatureFrame of origin raw
    """
    if not records:
        raise EmptySelectionError("no telemetry records to filter")

    selected = sorted((r for r in records if r.machine_id == machine_id), key=lambda r: r.timestamp)
    if not selected:
        raise EmptySelectionError("no telemetry rows for machine %d" % machine_id)

    for previous, current in zip(selected, selected[1:]):
        if current.timestamp <= previous.timestamp:
            raise ValidationError("machine %d has duplicate timestamp %s" % (machine_id, current.timestamp))

    values = np.array([r.features() for r in selected], dtype=np.float64)
    logger.info("machine %d: %d rows", machine_id, len(selected))
    return FeatureFrame(values, FEATURE_NAMES, Origin.RAW)


def write_telemetry(records, path):
    """
    Write records back out with the exact telemetry header.
    """
    df = pd.DataFrame({"datetime": [r.timestamp.strftime(DATETIME_FORMAT) for r in records],
                       "machineID": [r.machine_id for r in records],
                       "volt": [r.volt for r in records],
                       "rotate": [r.rotate for r in records],
                       "pressure": [r.pressure for r in records],
                       "vibration": [r.vibration for r in records]})
    df.to_csv(path, index=False, float_format="%.17g", lineterminator="\n")
