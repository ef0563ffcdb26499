"""
Synthetic telemetry for smoke runs: four coupled daily sinusoids with Gaussian noise, machine 1,
hourly timestamps.

input/smoke_telemetry.csv follows the same recipe, but its noise came from a different random
generator, so regenerating gives an equivalent rather than identical file.

Date: Oct 2026

"""

from datetime import datetime, timedelta

import numpy as np

from pdmtools.read_telemetry import TelemetryRecord, write_telemetry

START = datetime(2015, 1, 1, 6, 0, 0)

# feature -> (level, amplitude, phase, noise sd)
SIGNALS = {
    "volt": (170.0, 10.0, 0.0, 1.0),
    "rotate": (450.0, 40.0, 0.5, 4.0),
    "pressure": (100.0, 8.0, 1.0, 0.8),
    "vibration": (40.0, 4.0, 1.5, 0.4),
}
PERIOD = 24.0


def smoke_values(rows=200, seed=0):
    """
    :return: rows x 4 array in feature order volt, rotate, pressure, vibration
    """
    rng = np.random.default_rng(seed)
    t = np.arange(rows, dtype=np.float64)
    daily = 2.0 * np.pi * t / PERIOD
    slow = np.sin(2.0 * np.pi * t / (5.0 * PERIOD))
    columns = []
    for level, amplitude, phase, noise in SIGNALS.values():
        signal = level + amplitude * (np.sin(daily + phase) + 0.3 * slow)
        columns.append(signal + rng.normal(0.0, noise, size=rows))
    return np.column_stack(columns)


def write_smoke_dataset(path, rows=200, seed=0):
    values = smoke_values(rows, seed)
    records = [TelemetryRecord(START + timedelta(hours=i), 1, *np.round(row, 6)) for i, row in enumerate(values)]
    write_telemetry(records, path)
    return path
