"""CSV and JSON artifacts written by the command-line interface.

Floats are written with 17 significant digits so that every value read
back is bit-identical to the one written.
"""
from __future__ import annotations

import csv
import io
import json
import os
import tempfile
from pathlib import Path

import numpy as np

from .errors import ConfigError

FLOAT_FMT = "{:.17g}"


def _fmt(x):
    if x is None:
        return ""
    if isinstance(x, (float, np.floating)):
        return FLOAT_FMT.format(float(x))
    return str(x)


def atomic_write_text(path, text):
    """Write via a temporary file in the same directory, then rename."""
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    fd, tmp = tempfile.mkstemp(prefix=f".{path.name}.", dir=path.parent)
    try:
        with os.fdopen(fd, "w", newline="") as fh:
            fh.write(text)
        os.replace(tmp, path)
    except BaseException:
        if os.path.exists(tmp):
            os.unlink(tmp)
        raise
    return path


def _csv_text(header, rows, preamble=None):
    buf = io.StringIO()
    if preamble:
        buf.write(preamble)
    writer = csv.writer(buf, lineterminator="\n")
    writer.writerow(header)
    for row in rows:
        writer.writerow([_fmt(x) for x in row])
    return buf.getvalue()


def write_trajectory_csv(path, traj):
    rows = zip(traj.times, traj.v, traj.m, traj.n, traj.h)
    return atomic_write_text(path, _csv_text(["t", "V", "m", "n", "h"], rows))


def write_observation_csv(path, times, clean, observation):
    meta = {
        "epsilon": observation.epsilon,
        "delta": observation.delta,
        "seed": observation.seed,
        "generator": observation.generator,
        "t_end": observation.grid.t_end,
        "dt": observation.grid.dt,
    }
    preamble = "# " + json.dumps(meta) + "\n"
    rows = zip(times, clean, observation.v_delta)
    return atomic_write_text(path, _csv_text(["t", "V", "V_delta"], rows, preamble))


def read_observation_csv(path):
    """Return ``(meta, columns)`` where ``columns`` maps header names to arrays.

    Files without a metadata line yield an empty ``meta``.
    """
    try:
        lines = Path(path).read_text().splitlines()
    except OSError as exc:
        raise ConfigError(f"cannot read observation {str(path)!r}: {exc.strerror}") from exc
    meta = {}
    if lines and lines[0].startswith("#"):
        try:
            meta = json.loads(lines[0][1:])
        except json.JSONDecodeError as exc:
            raise ConfigError(f"observation metadata line is not JSON: {exc}") from exc
        lines = lines[1:]
    reader = csv.reader(lines)
    try:
        header = next(reader)
        data = np.array([[float(x) for x in row] for row in reader if row])
    except (StopIteration, ValueError) as exc:
        raise ConfigError(f"observation {str(path)!r} is not a numeric CSV") from exc
    if data.ndim != 2 or data.shape[1] != len(header):
        raise ConfigError(f"observation {str(path)!r} has ragged rows")
    columns = {name.strip(): data[:, i] for i, name in enumerate(header)}
    if "V_delta" not in columns or "t" not in columns:
        raise ConfigError("observation CSV needs 't' and 'V_delta' columns")
    return meta, columns


def write_trace_csv(path, result):
    errors = result.errors if result.errors is not None else [None] * result.k_star
    rows = ((k + 1, *result.iterates[k], result.residuals[k], errors[k])
            for k in range(result.k_star))
    return atomic_write_text(path, _csv_text(["k", "p1", "p2", "p3", "residual", "error"], rows))


def write_table_csv(path, rows):
    header = ["epsilon", "k_star", "p1", "p2", "p3", "error", "residual", "delta",
              "tau_delta", "stop_reason", "status"]
    return atomic_write_text(path, _csv_text(header, ([r.get(h) for h in header] for r in rows)))


def write_json(path, payload):
    return atomic_write_text(path, json.dumps(payload, indent=2, sort_keys=False) + "\n")
