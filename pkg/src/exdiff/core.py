"""Excursion-count scaling diagnostics for a single scalar time series.

The test rests on one empirical law: for a diffusion-like path observed over
[0, T], the number of completed oscillations of amplitude at least ``eps``
behaves like ``QV / (2 eps^2)`` where ``QV`` is the realized quadratic
variation.  Smooth or deterministic signals fall far short of that count, so
the log-log slope of count versus threshold separates the two regimes:
around -2 for diffusions, much shallower for deterministic signals.

Pipeline: ``quadratic_variation`` -> ``count_excursions`` over a geometric
threshold grid -> ``excursion_profile`` (counts, predictions, their ratio K)
-> ``select_scaling_range`` -> ``fit_slope`` -> ``classify``.

All values are immutable after construction and every operation is pure, so
everything here is safe to call concurrently.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Optional

import numpy as np
from numba import njit

from .errors import DegenerateSignalError, InvalidInputError

# Verdict classes
DIFFUSIVE = "diffusive"
NON_DIFFUSIVE = "non-diffusive"
INDETERMINATE = "indeterminate"

# Machine-readable verdict reasons
REASON_SLOPE_IN_BAND = "slope-in-band"
REASON_SLOPE_OUT_OF_BAND = "slope-out-of-band"
REASON_NO_SCALING_RANGE = "no-scaling-range"
REASON_DEGENERATE_SIGNAL = "degenerate-signal"

# Slope band for the diffusive verdict.
SLOPE_BAND = (-2.5, -1.0)

# Scaling-range selection: K must stay within [1/BAND_FACTOR, BAND_FACTOR]
# over a contiguous run of at least MIN_RUN grid points, each with at least
# MIN_COUNT observed excursions.  When no such run exists the slope is fit
# over the FALLBACK_POINTS best-populated grid points instead.
DEFAULT_BAND_FACTOR = 1.4
DEFAULT_MIN_RUN = 4
DEFAULT_MIN_COUNT = 5
DEFAULT_FALLBACK_POINTS = 6

DEFAULT_GRID_POINTS = 24

# Relative floor below which quadratic variation is treated as numerical noise.
DEGENERATE_REL_FLOOR = 1e-12


@dataclass(frozen=True)
class Trajectory:
    """Uniformly sampled scalar series.

    ``values`` are the samples, ``dt`` the (positive) sampling interval.
    ``label`` optionally records the ground-truth class of the generator,
    one of ``"diffusive"``, ``"deterministic"`` or None for unknown.
    """

    values: np.ndarray
    dt: float
    label: Optional[str] = None

    def __post_init__(self):
        values = np.asarray(self.values, dtype=np.float64)
        if values.ndim != 1 or values.size < 2:
            raise InvalidInputError(
                f"trajectory needs at least 2 scalar samples, got shape {values.shape}"
            )
        if not np.all(np.isfinite(values)):
            bad = int(np.flatnonzero(~np.isfinite(values))[0])
            raise InvalidInputError(f"non-finite sample at index {bad}")
        if not (np.isfinite(self.dt) and self.dt > 0):
            raise InvalidInputError(f"dt must be positive and finite, got {self.dt}")
        values = values.copy()
        values.flags.writeable = False
        object.__setattr__(self, "values", values)
        object.__setattr__(self, "dt", float(self.dt))

    def __eq__(self, other):
        if not isinstance(other, Trajectory):
            return NotImplemented
        return (
            self.dt == other.dt
            and self.label == other.label
            and np.array_equal(self.values, other.values)
        )

    @property
    def n(self) -> int:
        return self.values.size

    @property
    def duration(self) -> float:
        """Total observation time (n - 1) * dt."""
        return (self.values.size - 1) * self.dt

    def signal_range(self) -> float:
        return float(self.values.max() - self.values.min())


@dataclass(frozen=True)
class EpsilonGrid:
    """Strictly increasing positive amplitude thresholds."""

    epsilons: np.ndarray

    def __post_init__(self):
        eps = np.asarray(self.epsilons, dtype=np.float64)
        if eps.ndim != 1 or eps.size < 1:
            raise InvalidInputError("epsilon grid must hold at least one threshold")
        if not np.all(np.isfinite(eps)) or eps[0] <= 0:
            raise InvalidInputError("epsilon thresholds must be finite and positive")
        if eps.size > 1 and not np.all(np.diff(eps) > 0):
            raise InvalidInputError("epsilon thresholds must be strictly increasing")
        eps = eps.copy()
        eps.flags.writeable = False
        object.__setattr__(self, "epsilons", eps)

    @classmethod
    def geometric(cls, eps_min: float, eps_max: float, n_points: int) -> "EpsilonGrid":
        if not (0 < eps_min < eps_max):
            raise InvalidInputError(
                f"need 0 < eps_min < eps_max, got [{eps_min}, {eps_max}]"
            )
        if n_points < 2:
            raise InvalidInputError("geometric grid needs at least 2 points")
        return cls(np.geomspace(eps_min, eps_max, n_points))

    def __len__(self) -> int:
        return self.epsilons.size

    def __eq__(self, other):
        if not isinstance(other, EpsilonGrid):
            return NotImplemented
        return np.array_equal(self.epsilons, other.epsilons)


@dataclass(frozen=True)
class ExcursionProfile:
    """Per-threshold excursion counts against the quadratic-variation prediction.

    ``k_ratio[i] = n_emp[i] / n_theory[i]`` with ``n_theory[i] = qv / (2 eps_i^2)``;
    a diffusion keeps K near 1 across scales.
    """

    grid: EpsilonGrid
    n_emp: np.ndarray
    n_theory: np.ndarray
    k_ratio: np.ndarray
    qv: float

    def __post_init__(self):
        for name in ("n_emp", "n_theory", "k_ratio"):
            arr = np.asarray(getattr(self, name), dtype=np.float64)
            if arr.shape != (len(self.grid),):
                raise InvalidInputError(f"{name} length must match the grid")
            arr = arr.copy()
            arr.flags.writeable = False
            object.__setattr__(self, name, arr)

    def __eq__(self, other):
        if not isinstance(other, ExcursionProfile):
            return NotImplemented
        return (
            self.grid == other.grid
            and self.qv == other.qv
            and np.array_equal(self.n_emp, other.n_emp)
            and np.array_equal(self.n_theory, other.n_theory)
            and np.array_equal(self.k_ratio, other.k_ratio)
        )


@dataclass(frozen=True)
class SlopeFit:
    """Least-squares fit of log(count) against log(threshold)."""

    slope: float
    intercept: float
    range_lo: int
    range_hi: int
    r_squared: float
    n_points: int


@dataclass(frozen=True)
class ClassifierConfig:
    """Tunables for ``classify``; defaults match the module constants."""

    grid: Optional[EpsilonGrid] = None
    grid_points: int = DEFAULT_GRID_POINTS
    slope_band: tuple = SLOPE_BAND
    band_factor: float = DEFAULT_BAND_FACTOR
    min_run: int = DEFAULT_MIN_RUN
    min_count: int = DEFAULT_MIN_COUNT
    fallback_points: int = DEFAULT_FALLBACK_POINTS


@dataclass(frozen=True)
class Verdict:
    """Classification outcome plus the full profile for audit."""

    classification: str
    reason: str
    slope_fit: Optional[SlopeFit] = None
    profile: Optional[ExcursionProfile] = None


@njit(cache=True, nogil=True)
def _count_legs(x, eps):  # pragma: no cover - exercised through count_excursions
    """Number of alternating directional moves of amplitude >= eps.

    Tracks the running extremum since the last event; every reversal of at
    least eps from that extremum is one leg, and the extremum tracker restarts
    at the sample that completed the leg.  The first move away from the
    initial value counts as a leg in whichever direction triggers first.
    """
    n = x.shape[0]
    legs = 0
    mode = 0  # 0 undecided, +1 tracking a running max, -1 a running min
    hi = x[0]
    lo = x[0]
    for i in range(1, n):
        v = x[i]
        if mode == 0:
            if v - lo >= eps:
                legs += 1
                mode = 1
                hi = v
            elif hi - v >= eps:
                legs += 1
                mode = -1
                lo = v
            else:
                if v > hi:
                    hi = v
                if v < lo:
                    lo = v
        elif mode == 1:
            if v > hi:
                hi = v
            elif hi - v >= eps:
                legs += 1
                mode = -1
                lo = v
        else:
            if v < lo:
                lo = v
            elif v - lo >= eps:
                legs += 1
                mode = 1
                hi = v
    return legs


def quadratic_variation(traj: Trajectory) -> float:
    """Sum of squared increments; zero only for a constant series."""
    d = np.diff(traj.values)
    return float(np.dot(d, d))


def count_excursions(traj: Trajectory, epsilon: float) -> int:
    """Completed oscillations (an up-leg plus a down-leg) of amplitude >= epsilon."""
    if not (np.isfinite(epsilon) and epsilon > 0):
        raise InvalidInputError(f"epsilon must be positive and finite, got {epsilon}")
    return int(_count_legs(traj.values, float(epsilon))) // 2


def theoretical_counts(qv: float, grid: EpsilonGrid) -> np.ndarray:
    """Predicted excursion counts qv / (2 eps^2) for each grid threshold."""
    if not np.isfinite(qv) or qv < 0:
        raise InvalidInputError(f"quadratic variation must be nonnegative, got {qv}")
    if qv == 0:
        raise DegenerateSignalError("zero quadratic variation: constant input cannot be tested")
    return qv / (2.0 * grid.epsilons**2)


def excursion_profile(traj: Trajectory, grid: EpsilonGrid) -> ExcursionProfile:
    qv = quadratic_variation(traj)
    n_theory = theoretical_counts(qv, grid)  # raises on degenerate input
    n_emp = np.array(
        [float(_count_legs(traj.values, float(e)) // 2) for e in grid.epsilons]
    )
    return ExcursionProfile(
        grid=grid, n_emp=n_emp, n_theory=n_theory, k_ratio=n_emp / n_theory, qv=qv
    )


def select_scaling_range(
    profile: ExcursionProfile,
    band_factor: float = DEFAULT_BAND_FACTOR,
    min_run: int = DEFAULT_MIN_RUN,
    min_count: int = DEFAULT_MIN_COUNT,
) -> Optional[tuple]:
    """Longest contiguous grid run where K stays within the band.

    A point qualifies when ``1/band_factor <= K <= band_factor`` and its
    empirical count is at least ``min_count``.  Ties on run length are broken
    by smaller mean |log K|, then by lower starting index.  Returns None when
    no qualifying run reaches ``min_run`` points.
    """
    k = profile.k_ratio
    ok = (k >= 1.0 / band_factor) & (k <= band_factor) & (profile.n_emp >= min_count)
    best = None  # (length, mean |log K|, lo, hi)
    i = 0
    n = ok.size
    while i < n:
        if not ok[i]:
            i += 1
            continue
        j = i
        while j + 1 < n and ok[j + 1]:
            j += 1
        length = j - i + 1
        if length >= min_run:
            score = float(np.mean(np.abs(np.log(k[i : j + 1]))))
            if best is None or length > best[0] or (length == best[0] and score < best[1]):
                best = (length, score, i, j)
        i = j + 1
    if best is None:
        return None
    return best[2], best[3]


def _fit_loglog(eps: np.ndarray, counts: np.ndarray) -> tuple:
    """OLS of log(counts) on log(eps); returns (slope, intercept, r_squared)."""
    lx = np.log(eps)
    ly = np.log(counts)
    mx = lx.mean()
    my = ly.mean()
    sxx = float(np.sum((lx - mx) ** 2))
    sxy = float(np.sum((lx - mx) * (ly - my)))
    slope = sxy / sxx
    intercept = my - slope * mx
    resid = ly - (slope * lx + intercept)
    ss_res = float(np.dot(resid, resid))
    ss_tot = float(np.sum((ly - my) ** 2))
    r2 = 1.0 if ss_tot <= 0.0 else 1.0 - ss_res / ss_tot
    return slope, intercept, min(max(r2, 0.0), 1.0)


def fit_slope(profile: ExcursionProfile, fit_range: tuple) -> SlopeFit:
    """Fit log n_emp ~ slope * log eps over the inclusive index range."""
    lo, hi = int(fit_range[0]), int(fit_range[1])
    if not (0 <= lo <= hi < len(profile.grid)):
        raise InvalidInputError(f"fit range ({lo}, {hi}) outside the grid")
    if hi - lo + 1 < DEFAULT_MIN_RUN:
        raise InvalidInputError(f"fit range needs at least {DEFAULT_MIN_RUN} points")
    counts = profile.n_emp[lo : hi + 1]
    if np.any(counts <= 0):
        raise InvalidInputError("zero count inside fit range; shrink the range")
    slope, intercept, r2 = _fit_loglog(profile.grid.epsilons[lo : hi + 1], counts)
    return SlopeFit(
        slope=slope,
        intercept=intercept,
        range_lo=lo,
        range_hi=hi,
        r_squared=r2,
        n_points=hi - lo + 1,
    )


def default_grid(traj: Trajectory, n_points: int = DEFAULT_GRID_POINTS) -> EpsilonGrid:
    """Geometric threshold grid adapted to the series' scales.

    Spans from twice the median absolute increment (the smallest amplitude
    the sampling can resolve) up to a quarter of the signal range.  Two
    degenerate layouts are repaired: when the increment scale exceeds the
    range scale (map-like series whose steps are comparable to their range)
    the grid drops to eps_max / 100 so the count plateau stays visible, and
    when the two scales nearly coincide (white-noise-like series) the top is
    extended to 10x the increment scale to give the fit a usable lever arm.
    """
    if n_points < 8:
        raise InvalidInputError(f"default grid needs n_points >= 8, got {n_points}")
    rng = traj.signal_range()
    if rng <= 0:
        raise DegenerateSignalError("zero signal range")
    med = float(np.median(np.abs(np.diff(traj.values))))
    eps_max = rng / 4.0
    eps_min = max(2.0 * med, DEGENERATE_REL_FLOOR * rng)
    ratio = eps_max / eps_min
    if ratio < 0.7:
        eps_min = eps_max / 100.0
    elif ratio < 10.0:
        eps_max = 10.0 * eps_min
    return EpsilonGrid.geometric(eps_min, eps_max, n_points)


def _is_degenerate(traj: Trajectory, qv: float) -> bool:
    rng = traj.signal_range()
    if rng <= 0:
        return True
    return qv < (DEGENERATE_REL_FLOOR * rng) ** 2 * traj.n


def classify(traj: Trajectory, config: ClassifierConfig = ClassifierConfig()) -> Verdict:
    """Full pipeline: profile, scaling range, slope, verdict.

    Diffusive iff the fitted slope lies in ``config.slope_band``.  When no
    scaling range qualifies, the slope is fit over the ``fallback_points``
    grid points with the largest counts still meeting ``min_count``; with
    fewer qualifying points than that the verdict is non-diffusive with
    reason ``no-scaling-range``.  Degenerate input gives indeterminate.
    """
    qv = quadratic_variation(traj)
    if _is_degenerate(traj, qv):
        return Verdict(classification=INDETERMINATE, reason=REASON_DEGENERATE_SIGNAL)

    grid = config.grid if config.grid is not None else default_grid(traj, config.grid_points)
    profile = excursion_profile(traj, grid)
    selected = select_scaling_range(
        profile,
        band_factor=config.band_factor,
        min_run=config.min_run,
        min_count=config.min_count,
    )
    if selected is None:
        # counts are nonincreasing in eps, so the best-populated points form a prefix
        qualifying = np.flatnonzero(profile.n_emp >= config.min_count)
        if qualifying.size < config.fallback_points:
            return Verdict(
                classification=NON_DIFFUSIVE,
                reason=REASON_NO_SCALING_RANGE,
                profile=profile,
            )
        selected = (int(qualifying[0]), int(qualifying[config.fallback_points - 1]))

    fit = fit_slope(profile, selected)
    lo_band, hi_band = config.slope_band
    if lo_band <= fit.slope <= hi_band:
        return Verdict(
            classification=DIFFUSIVE,
            reason=REASON_SLOPE_IN_BAND,
            slope_fit=fit,
            profile=profile,
        )
    return Verdict(
        classification=NON_DIFFUSIVE,
        reason=REASON_SLOPE_OUT_OF_BAND,
        slope_fit=fit,
        profile=profile,
    )
