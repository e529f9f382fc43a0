"""Monte Carlo accuracy sweeps over (dt, T) grids at fixed noise levels.

Every (dt, T, noise, rep) realization gets its own seed derived by hashing
the cell *values* rather than positions, so extending a plan never perturbs
the realizations of existing cells, and any execution order (including
thread pools) reproduces identical results.
"""

from __future__ import annotations

import hashlib
import json
import math
import struct
import time
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass
from typing import Optional

import numpy as np

from .core import (
    DEFAULT_GRID_POINTS,
    DIFFUSIVE,
    INDETERMINATE,
    ClassifierConfig,
    Verdict,
    classify,
)
from .errors import DegenerateSignalError, InvalidInputError, SimulationDivergedError
from .seriesio import parse_flat_config
from .systems import ALL_KINDS, DETERMINISTIC_KINDS, SystemSpec, simulate

# Minimum samples per trajectory a sweep cell may request.
MIN_SAMPLES_PER_CELL = 100

# Fixed slope-histogram binning.
HISTOGRAM_LO = -4.0
HISTOGRAM_HI = 1.0
HISTOGRAM_BIN_WIDTH = 0.1


@dataclass(frozen=True)
class SweepPlan:
    kind: str
    dt_grid: tuple
    T_grid: tuple
    noise_levels: tuple
    reps: int
    base_seed: int
    grid_points: int = DEFAULT_GRID_POINTS

    def __post_init__(self):
        if self.kind not in ALL_KINDS:
            raise InvalidInputError(
                f"unknown kind '{self.kind}'; allowed: {', '.join(ALL_KINDS)}"
            )
        for name in ("dt_grid", "T_grid", "noise_levels"):
            seq = tuple(float(v) for v in getattr(self, name))
            if not seq:
                raise InvalidInputError(f"{name} must be nonempty")
            object.__setattr__(self, name, seq)
        if self.reps < 1:
            raise InvalidInputError("reps must be at least 1")
        if self.base_seed < 0:
            raise InvalidInputError("base_seed must be nonnegative")
        for dt in self.dt_grid:
            if dt <= 0:
                raise InvalidInputError(f"dt must be positive, got {dt}")
            for T in self.T_grid:
                if T < MIN_SAMPLES_PER_CELL * dt:
                    raise InvalidInputError(
                        f"cell (dt={dt}, T={T}) has under {MIN_SAMPLES_PER_CELL} samples"
                    )

    def cells(self) -> list:
        return [
            (dt, T, noise)
            for dt in self.dt_grid
            for T in self.T_grid
            for noise in self.noise_levels
        ]


@dataclass(frozen=True)
class CellResult:
    dt: float
    T: float
    noise: float
    accuracy: float
    n_reps: int
    slope_mean: Optional[float]
    slope_sd: Optional[float]
    slopes: tuple


@dataclass(frozen=True)
class SweepResult:
    plan: SweepPlan
    cells: tuple
    wall_time_s: float = 0.0

    def total_verdicts(self) -> int:
        return sum(c.n_reps for c in self.cells)


def derive_seed(base_seed: int, kind: str, dt: float, T: float, noise: float, rep: int) -> int:
    """Stable 63-bit seed from the realization's identity, not its position."""
    payload = (
        b"exdiff-sweep-v1|"
        + struct.pack("<q", base_seed)
        + kind.encode()
        + b"|"
        + struct.pack("<ddd", dt, T, noise)
        + struct.pack("<q", rep)
    )
    digest = hashlib.sha256(payload).digest()
    return int.from_bytes(digest[:8], "little") & (2**63 - 1)


def _build_spec(plan: SweepPlan, dt: float, T: float, noise: float, rep: int) -> SystemSpec:
    seed = derive_seed(plan.base_seed, plan.kind, dt, T, noise, rep)
    if plan.kind in DETERMINISTIC_KINDS:
        snr = None if math.isinf(noise) and noise > 0 else noise
        return SystemSpec(kind=plan.kind, dt=dt, T=T, seed=seed, snr_db=snr)
    return SystemSpec(kind=plan.kind, dt=dt, T=T, seed=seed, R=noise)


def _one_verdict(spec: SystemSpec, grid_points: int) -> Verdict:
    try:
        series = simulate(spec)
        return classify(series.trajectory, ClassifierConfig(grid_points=grid_points))
    except (SimulationDivergedError, DegenerateSignalError):
        return Verdict(classification=INDETERMINATE, reason="simulation-failed")


def _verdict_matches(verdict: Verdict, ground_truth: str) -> bool:
    if verdict.classification == DIFFUSIVE:
        return ground_truth == "diffusive"
    if verdict.classification == INDETERMINATE:
        return False
    return ground_truth == "deterministic"


def _summarize_cell(dt, T, noise, ground_truth, verdicts) -> CellResult:
    matches = sum(_verdict_matches(v, ground_truth) for v in verdicts)
    slopes = tuple(v.slope_fit.slope for v in verdicts if v.slope_fit is not None)
    mean = float(np.mean(slopes)) if slopes else None
    sd = float(np.std(slopes, ddof=1)) if len(slopes) >= 2 else None
    return CellResult(
        dt=dt,
        T=T,
        noise=noise,
        accuracy=matches / len(verdicts),
        n_reps=len(verdicts),
        slope_mean=mean,
        slope_sd=sd,
        slopes=slopes,
    )


def run_sweep(plan: SweepPlan, max_workers: int = 1, progress=None) -> SweepResult:
    """Simulate and classify every (cell, rep); deterministic for a fixed plan.

    ``max_workers`` > 1 spreads realizations over a thread pool; results are
    merged in (cell, rep) order so the outcome is identical at any width.
    Diverged realizations score as indeterminate, never abort the sweep.
    """
    started = time.perf_counter()
    ground_truth = (
        "deterministic" if plan.kind in DETERMINISTIC_KINDS else "diffusive"
    )
    cells = plan.cells()
    tasks = [
        _build_spec(plan, dt, T, noise, rep)
        for (dt, T, noise) in cells
        for rep in range(plan.reps)
    ]
    if max_workers > 1:
        with ThreadPoolExecutor(max_workers=max_workers) as pool:
            verdicts = list(pool.map(lambda s: _one_verdict(s, plan.grid_points), tasks))
    else:
        verdicts = [_one_verdict(spec, plan.grid_points) for spec in tasks]

    out = []
    for i, (dt, T, noise) in enumerate(cells):
        chunk = verdicts[i * plan.reps : (i + 1) * plan.reps]
        out.append(_summarize_cell(dt, T, noise, ground_truth, chunk))
        if progress is not None:
            progress(out[-1])
    return SweepResult(
        plan=plan, cells=tuple(out), wall_time_s=time.perf_counter() - started
    )


@dataclass(frozen=True)
class SlopeHistogram:
    slopes: tuple
    bin_edges: tuple
    counts: tuple
    n_failed: int


def slope_histogram(
    kind: str, noise: float, dt: float, T: float, reps: int, base_seed: int
) -> SlopeHistogram:
    """Fitted-slope distribution for one ensemble, on fixed 0.1-wide bins."""
    if reps < 30:
        raise InvalidInputError("slope histograms need reps >= 30")
    plan = SweepPlan(
        kind=kind, dt_grid=(dt,), T_grid=(T,), noise_levels=(noise,),
        reps=reps, base_seed=base_seed,
    )
    result = run_sweep(plan)
    cell = result.cells[0]
    edges = np.round(
        np.arange(HISTOGRAM_LO, HISTOGRAM_HI + HISTOGRAM_BIN_WIDTH / 2, HISTOGRAM_BIN_WIDTH),
        10,
    )
    counts, _ = np.histogram(np.asarray(cell.slopes), bins=edges)
    return SlopeHistogram(
        slopes=cell.slopes,
        bin_edges=tuple(edges.tolist()),
        counts=tuple(int(c) for c in counts),
        n_failed=reps - len(cell.slopes),
    )


# --- persistence ------------------------------------------------------------

CSV_HEADER = "dt,T,noise,accuracy,n_reps,slope_mean,slope_sd"


def _csv_num(value) -> str:
    if value is None:
        return "nan"
    return repr(float(value))


def export_results(result: SweepResult, path, fmt: str = "csv") -> None:
    """Write a SweepResult; CSV is one row per cell, JSON the full record."""
    if fmt == "csv":
        lines = [CSV_HEADER]
        for c in result.cells:
            lines.append(
                ",".join(
                    [
                        _csv_num(c.dt),
                        _csv_num(c.T),
                        _csv_num(c.noise),
                        _csv_num(c.accuracy),
                        str(c.n_reps),
                        _csv_num(c.slope_mean),
                        _csv_num(c.slope_sd),
                    ]
                )
            )
        payload = "\n".join(lines) + "\n"
    elif fmt == "json":
        payload = json.dumps(_result_to_dict(result), indent=2, sort_keys=True) + "\n"
    else:
        raise InvalidInputError(f"unknown export format '{fmt}' (use csv or json)")
    try:
        with open(path, "w", newline="\n", encoding="utf-8") as fh:
            fh.write(payload)
    except OSError as exc:
        raise InvalidInputError(f"cannot write '{path}': {exc}") from exc


def _result_to_dict(result: SweepResult) -> dict:
    return {
        "plan": {
            "kind": result.plan.kind,
            "dt_grid": list(result.plan.dt_grid),
            "T_grid": list(result.plan.T_grid),
            "noise_levels": list(result.plan.noise_levels),
            "reps": result.plan.reps,
            "base_seed": result.plan.base_seed,
            "grid_points": result.plan.grid_points,
        },
        "cells": [
            {
                "dt": c.dt,
                "T": c.T,
                "noise": c.noise,
                "accuracy": c.accuracy,
                "n_reps": c.n_reps,
                "slope_mean": c.slope_mean,
                "slope_sd": c.slope_sd,
                "slopes": list(c.slopes),
            }
            for c in result.cells
        ],
        "wall_time_s": result.wall_time_s,
    }


def load_results(path) -> SweepResult:
    """Rebuild a SweepResult from its JSON export."""
    try:
        with open(path, "r", encoding="utf-8") as fh:
            data = json.load(fh)
    except OSError as exc:
        raise InvalidInputError(f"cannot read '{path}': {exc}") from exc
    plan = SweepPlan(
        kind=data["plan"]["kind"],
        dt_grid=tuple(data["plan"]["dt_grid"]),
        T_grid=tuple(data["plan"]["T_grid"]),
        noise_levels=tuple(data["plan"]["noise_levels"]),
        reps=data["plan"]["reps"],
        base_seed=data["plan"]["base_seed"],
        grid_points=data["plan"]["grid_points"],
    )
    cells = tuple(
        CellResult(
            dt=c["dt"],
            T=c["T"],
            noise=c["noise"],
            accuracy=c["accuracy"],
            n_reps=c["n_reps"],
            slope_mean=c["slope_mean"],
            slope_sd=c["slope_sd"],
            slopes=tuple(c["slopes"]),
        )
        for c in data["cells"]
    )
    return SweepResult(plan=plan, cells=cells, wall_time_s=data["wall_time_s"])


# --- plan files -------------------------------------------------------------

_PLAN_KEYS = {
    "kind": str,
    "dt_grid": "float_list",
    "T_grid": "float_list",
    "noise_levels": "float_list",
    "reps": int,
    "base_seed": int,
    "grid_points": int,
}
_PLAN_REQUIRED = ("kind", "dt_grid", "T_grid", "noise_levels", "reps", "base_seed")


def parse_plan(text: str) -> SweepPlan:
    """Sweep plan from flat key=value text; lists are comma-separated."""
    entries = parse_flat_config(text)
    kwargs = {}
    for key, (value, ln) in entries.items():
        if key not in _PLAN_KEYS:
            raise InvalidInputError(
                f"line {ln}: unknown plan key '{key}'; allowed: {', '.join(_PLAN_KEYS)}"
            )
        conv = _PLAN_KEYS[key]
        try:
            if conv == "float_list":
                kwargs[key] = tuple(float(v) for v in value.split(",") if v.strip())
            elif conv is int:
                kwargs[key] = int(value)
            else:
                kwargs[key] = value
        except ValueError as exc:
            raise InvalidInputError(f"line {ln}: bad value for '{key}': {value}") from exc
    missing = [k for k in _PLAN_REQUIRED if k not in kwargs]
    if missing:
        raise InvalidInputError(f"plan is missing required keys: {', '.join(missing)}")
    return SweepPlan(**kwargs)


def load_plan(path) -> SweepPlan:
    try:
        with open(path, "r", encoding="utf-8") as fh:
            return parse_plan(fh.read())
    except OSError as exc:
        raise InvalidInputError(f"cannot read '{path}': {exc}") from exc
