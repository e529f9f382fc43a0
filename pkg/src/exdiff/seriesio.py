"""CSV and flat key=value plumbing shared by the CLI and the sweep harness."""

from __future__ import annotations

import csv
import math
from typing import Optional

import numpy as np

from .core import Trajectory
from .errors import InvalidInputError
from .systems import DETERMINISTIC_KINDS, SystemSpec


def write_trajectory_csv(path, traj: Trajectory) -> None:
    """Two-column time,value CSV with header; time is k*dt."""
    with open(path, "w", newline="\n", encoding="utf-8") as fh:
        fh.write("time,value\n")
        dt = traj.dt
        for k, v in enumerate(traj.values):
            fh.write(f"{repr(k * dt)},{repr(float(v))}\n")


def _is_number(cell: str) -> bool:
    try:
        float(cell)
    except ValueError:
        return False
    return True


def read_csv_table(path):
    """Parse a CSV file into (header or None, rows of strings).

    The header is auto-detected: a first row with any non-numeric cell is
    treated as column names.  Accepts LF or CRLF, UTF-8.
    """
    try:
        with open(path, "r", newline="", encoding="utf-8-sig") as fh:
            rows = [row for row in csv.reader(fh) if row and any(c.strip() for c in row)]
    except OSError as exc:
        raise InvalidInputError(f"cannot read '{path}': {exc}") from exc
    if not rows:
        raise InvalidInputError(f"'{path}' holds no data rows")
    header = None
    if not all(_is_number(c.strip()) for c in rows[0]):
        header = [c.strip() for c in rows[0]]
        rows = rows[1:]
    return header, rows


def _resolve_column(header, rows, column) -> int:
    n_cols = len(rows[0])
    if column is None:
        # a two-column file defaults to (time, value); otherwise first column
        return 1 if n_cols >= 2 else 0
    if isinstance(column, str) and not column.lstrip("-").isdigit():
        if header is None or column not in header:
            raise InvalidInputError(
                f"no column named '{column}'"
                + (f"; file has {header}" if header else " (file has no header)")
            )
        return header.index(column)
    idx = int(column)
    if not (0 <= idx < n_cols):
        raise InvalidInputError(f"column index {idx} out of range for {n_cols} columns")
    return idx


def read_series_csv(path, column=None) -> tuple:
    """Extract (values, inferred_dt) from a CSV file.

    ``column`` may be an index or a header name; by default a two-column
    file is read as (time, value) and dt is inferred from the time column.
    Returns inferred_dt = None when there is no usable time column.
    """
    header, rows = read_csv_table(path)
    col = _resolve_column(header, rows, column)

    values = np.empty(len(rows))
    for i, row in enumerate(rows):
        if col >= len(row):
            raise InvalidInputError(f"row {i + 1}: only {len(row)} columns, need {col + 1}")
        cell = row[col].strip()
        if not _is_number(cell):
            raise InvalidInputError(f"row {i + 1}: non-numeric cell '{cell}'")
        values[i] = float(cell)

    inferred_dt = None
    time_col = None
    if header is not None and "time" in [h.lower() for h in header]:
        time_col = [h.lower() for h in header].index("time")
    elif len(rows[0]) >= 2 and col != 0:
        time_col = 0
    if time_col is not None and time_col != col and len(rows) >= 2:
        try:
            t0 = float(rows[0][time_col])
            t1 = float(rows[1][time_col])
        except ValueError:
            t0 = t1 = 0.0
        if t1 > t0 and math.isfinite(t1 - t0):
            inferred_dt = t1 - t0
    return values, inferred_dt


def simple_returns(prices: np.ndarray) -> np.ndarray:
    """(P_t - P_{t-1}) / P_{t-1}; rejects a zero price by row number."""
    prices = np.asarray(prices, dtype=np.float64)
    if prices.size < 2:
        raise InvalidInputError("need at least 2 prices to form returns")
    zero = np.flatnonzero(prices[:-1] == 0.0)
    if zero.size:
        raise InvalidInputError(
            f"zero price at row {int(zero[0]) + 1}: returns transform would divide by zero"
        )
    return np.diff(prices) / prices[:-1]


# --- flat key=value config ------------------------------------------------

def parse_flat_config(text: str) -> dict:
    """Parse 'key = value' lines; '#' starts a comment.

    Returns {key: (value_string, line_number)} so callers can report
    positions in their own error messages.
    """
    out = {}
    for ln, raw in enumerate(text.splitlines(), start=1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        if "=" not in line:
            raise InvalidInputError(f"line {ln}: expected 'key = value', got '{raw.strip()}'")
        key, value = line.split("=", 1)
        key = key.strip()
        if not key:
            raise InvalidInputError(f"line {ln}: empty key")
        if key in out:
            raise InvalidInputError(f"line {ln}: duplicate key '{key}'")
        out[key] = (value.strip(), ln)
    return out


_SPEC_SCALAR_KEYS = ("kind", "dt", "T", "seed", "snr_db", "R")


def spec_to_config(spec: SystemSpec) -> str:
    """Flat key=value form of a SystemSpec; round-trips via spec_from_config."""
    lines = [
        f"kind = {spec.kind}",
        f"dt = {repr(spec.dt)}",
        f"T = {repr(spec.T)}",
        f"seed = {spec.seed}",
    ]
    if spec.snr_db is not None:
        lines.append(f"snr_db = {repr(spec.snr_db)}")
    if spec.kind not in DETERMINISTIC_KINDS:
        lines.append(f"R = {repr(spec.R)}")
    if spec.initial_state is not None:
        lines.append("x0 = " + ",".join(repr(v) for v in spec.initial_state))
    for key in sorted(spec.params):
        lines.append(f"param.{key} = {repr(spec.params[key])}")
    return "\n".join(lines) + "\n"


def spec_from_config(text: str) -> SystemSpec:
    entries = parse_flat_config(text)
    if "kind" not in entries:
        raise InvalidInputError("config is missing required key 'kind'")
    kind = entries["kind"][0]
    kwargs = {"kind": kind, "params": {}}
    for key, (value, ln) in entries.items():
        try:
            if key == "kind":
                continue
            elif key == "dt":
                kwargs["dt"] = float(value)
            elif key == "T":
                kwargs["T"] = float(value)
            elif key == "seed":
                kwargs["seed"] = int(value)
            elif key == "snr_db":
                kwargs["snr_db"] = float(value)
            elif key == "R":
                kwargs["R"] = float(value)
            elif key == "x0":
                kwargs["initial_state"] = tuple(float(v) for v in value.split(","))
            elif key.startswith("param."):
                # integer-valued params (e.g. LCG modulus) must stay exact
                num = float(value)
                kwargs["params"][key[len("param."):]] = int(num) if num.is_integer() else num
            else:
                raise InvalidInputError(f"line {ln}: unknown key '{key}'")
        except ValueError as exc:
            raise InvalidInputError(f"line {ln}: bad value for '{key}': {value}") from exc
    for required in ("dt", "T", "seed"):
        if required not in kwargs:
            raise InvalidInputError(f"config is missing required key '{required}'")
    return SystemSpec(**kwargs)
