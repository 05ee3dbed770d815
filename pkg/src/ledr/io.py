"""Bit-exact CSV and JSON serialization.

Floats are written with Python's shortest round-trip repr so reruns diff
cleanly across platforms.  Trajectory files carry ``t,x0..,v0..``; all
deviation-series files carry ``t,xi0..``.  Readers rebuild values that
compare equal field for field (the generating connection tag is recorded
in the run manifest, not in the CSV).
"""

from __future__ import annotations

import csv
import json
from pathlib import Path

import numpy as np

from .continuous import LedrSolution
from .discrete import DiscreteLedrSeries
from .errors import SchemaError
from .geodesic import Trajectory


def fmt(value: float) -> str:
    return repr(float(value))


def _write_rows(path, header, rows):
    with open(path, "w", newline="") as handle:
        writer = csv.writer(handle, lineterminator="\n")
        writer.writerow(header)
        writer.writerows(rows)


def _read_rows(path, expected_header):
    with open(path, newline="") as handle:
        reader = csv.reader(handle)
        try:
            header = next(reader)
        except StopIteration:
            raise SchemaError(f"{path}: empty file", row=0)
        if header != expected_header:
            raise SchemaError(
                f"{path}: header {header} does not match expected {expected_header}", row=0
            )
        rows = []
        for idx, row in enumerate(reader, start=1):
            if len(row) != len(expected_header):
                raise SchemaError(
                    f"{path}: row {idx} has {len(row)} fields, expected {len(expected_header)}",
                    row=idx,
                )
            parsed = []
            for col, cell in enumerate(row):
                try:
                    parsed.append(float(cell))
                except ValueError:
                    raise SchemaError(
                        f"{path}: row {idx}, column {expected_header[col]}: "
                        f"cannot parse {cell!r} as a number",
                        row=idx,
                        column=expected_header[col],
                    )
            rows.append(parsed)
    if len(rows) < 2:
        raise SchemaError(f"{path}: need at least 2 data rows, found {len(rows)}", row=len(rows))
    return np.array(rows)


def _check_uniform(path, t):
    h = t[1] - t[0]
    if h <= 0 or not np.allclose(np.diff(t), h, rtol=1e-9, atol=1e-12):
        raise SchemaError(f"{path}: time column is not uniformly spaced", column="t")
    return float(h)


def trajectory_header(n: int) -> list:
    return ["t"] + [f"x{i}" for i in range(n)] + [f"v{i}" for i in range(n)]


def ledr_header(n: int) -> list:
    return ["t"] + [f"xi{i}" for i in range(n)]


def write_trajectory_csv(path, traj: Trajectory) -> None:
    n = traj.dim
    rows = (
        [fmt(t)] + [fmt(x) for x in traj.points[k]] + [fmt(v) for v in traj.velocities[k]]
        for k, t in enumerate(traj.times)
    )
    _write_rows(path, trajectory_header(n), rows)


def read_trajectory_csv(path, connection_tag: str = "") -> Trajectory:
    with open(path, newline="") as handle:
        header = next(csv.reader(handle))
    n = (len(header) - 1) // 2
    data = _read_rows(path, trajectory_header(n))
    h = _check_uniform(path, data[:, 0])
    return Trajectory(h, data[:, 1 : n + 1], data[:, n + 1 :], connection_tag)


def write_ledr_csv(path, series) -> None:
    if isinstance(series, LedrSolution):
        xi, times = series.xi, series.t
    else:
        xi, times = series.xi, series.times
    rows = ([fmt(t)] + [fmt(x) for x in xi[k]] for k, t in enumerate(times))
    _write_rows(path, ledr_header(xi.shape[1]), rows)


def read_ledr_csv(path, origin: str = "measured") -> DiscreteLedrSeries:
    with open(path, newline="") as handle:
        header = next(csv.reader(handle))
    n = len(header) - 1
    data = _read_rows(path, ledr_header(n))
    h = _check_uniform(path, data[:, 0])
    return DiscreteLedrSeries(h, data[:, 1:], origin=origin)


def write_json(path, payload: dict) -> None:
    Path(path).write_text(json.dumps(payload, indent=2, sort_keys=True) + "\n")


def read_json(path) -> dict:
    return json.loads(Path(path).read_text())
