"""Benchmark trajectory generators.

Twelve reference systems in three families:

* smooth ODEs (simple harmonic oscillator, Duffing, Rayleigh-Duffing, Chen,
  Lu) integrated with adaptive RK23 and sampled on a fixed output grid,
* discrete maps (logistic, Henon, linear congruential generator) iterated
  directly,
* Ito SDEs (Brownian motion, Ornstein-Uhlenbeck, Cox-Ingersoll-Ross,
  stochastic Duffing) discretized with Euler-Maruyama on an internal step
  at least as fine as the output grid.

Only the first state component is recorded.  Deterministic systems accept
additive Gaussian noise at a prescribed SNR; stochastic systems take a noise
intensity control R with diffusion scale sigma = 1/R.
"""

from __future__ import annotations

import math
import zlib
from dataclasses import dataclass, field
from typing import Optional

import numpy as np
from numba import njit
from scipy.integrate import solve_ivp

from .core import Trajectory
from .errors import DegenerateSignalError, InvalidInputError, SimulationDivergedError

SHM = "shm"
DUFFING = "duffing"
RAYLEIGH_DUFFING = "rayleigh_duffing"
CHEN = "chen"
LU = "lu"
LOGISTIC = "logistic"
HENON = "henon"
LCG = "lcg"
BROWNIAN = "brownian"
OU = "ou"
CIR = "cir"
STOCHASTIC_DUFFING = "stochastic_duffing"

ODE_KINDS = (SHM, DUFFING, RAYLEIGH_DUFFING, CHEN, LU)
MAP_KINDS = (LOGISTIC, HENON, LCG)
SDE_KINDS = (BROWNIAN, OU, CIR, STOCHASTIC_DUFFING)
DETERMINISTIC_KINDS = ODE_KINDS + MAP_KINDS
ALL_KINDS = DETERMINISTIC_KINDS + SDE_KINDS

GROUND_TRUTH_DIFFUSIVE = "diffusive"
GROUND_TRUTH_DETERMINISTIC = "deterministic"

DEFAULT_PARAMS = {
    SHM: {"omega": 1.0},
    DUFFING: {"delta": 0.2, "alpha": -1.0, "beta": 1.0, "gamma": 0.3, "omega": 1.2},
    RAYLEIGH_DUFFING: {
        "delta": 0.2,
        "alpha": -1.0,
        "beta": 1.0,
        "gamma": 0.3,
        "omega": 1.2,
        "eps": 0.1,
    },
    CHEN: {"a": 35.0, "b": 3.0, "c": 28.0},
    LU: {"a": 36.0, "b": 3.0, "c": 20.0},
    LOGISTIC: {"r": 4.0},
    HENON: {"a": 1.4, "b": 0.3},
    LCG: {"a": 1664525, "c": 1013904223, "m": 2**32},
    BROWNIAN: {},
    OU: {"theta": 1.0, "mu": 0.0},
    CIR: {"kappa": 1.0, "theta": 1.0},
    STOCHASTIC_DUFFING: {"delta": 0.2, "gamma": 0.3, "omega": 1.2},
}

# Initial states; LCG seeds from the spec seed, CIR starts at its mean.
DEFAULT_STATE = {
    SHM: (1.0, 0.0),
    DUFFING: (0.1, 0.0),
    RAYLEIGH_DUFFING: (0.1, 0.0),
    CHEN: (1.0, 1.0, 1.0),
    LU: (1.0, 1.0, 1.0),
    LOGISTIC: (0.2,),
    HENON: (0.1, 0.1),
    BROWNIAN: (0.0,),
    OU: (0.0,),
    STOCHASTIC_DUFFING: (0.0, 0.0),
}

STATE_DIM = {
    SHM: 2,
    DUFFING: 2,
    RAYLEIGH_DUFFING: 2,
    CHEN: 3,
    LU: 3,
    LOGISTIC: 1,
    HENON: 2,
    LCG: 1,
    BROWNIAN: 1,
    OU: 1,
    CIR: 1,
    STOCHASTIC_DUFFING: 2,
}

# Chen/Lu start off-attractor; discard this much time before recording.
TRANSIENT_TIME = {CHEN: 10.0, LU: 10.0}

RK23_RTOL = 1e-6
RK23_ATOL = 1e-9

# Euler-Maruyama internal step: at most 1e-3 of the drift's characteristic
# time, refined below the output interval when needed.
SDE_STEP_FRACTION = 1e-3


def noise_scale_from_R(R: float) -> float:
    """Diffusion coefficient sigma = 1/R."""
    if not (np.isfinite(R) and R > 0):
        raise InvalidInputError(f"R must be positive, got {R}")
    return 1.0 / R


@dataclass(frozen=True)
class SystemSpec:
    """Declarative description of one benchmark run.

    ``snr_db`` applies to deterministic kinds only (None or +inf means no
    noise); ``R`` applies to stochastic kinds only and defaults to 1.
    ``initial_state`` overrides the per-kind default when given.
    """

    kind: str
    dt: float
    T: float
    seed: int
    params: dict = field(default_factory=dict)
    snr_db: Optional[float] = None
    R: Optional[float] = None
    initial_state: Optional[tuple] = None

    def __post_init__(self):
        if self.kind not in ALL_KINDS:
            raise InvalidInputError(
                f"unknown kind '{self.kind}'; allowed: {', '.join(ALL_KINDS)}"
            )
        if not (np.isfinite(self.dt) and self.dt > 0):
            raise InvalidInputError(f"dt must be positive, got {self.dt}")
        if not (np.isfinite(self.T) and self.T >= 2 * self.dt):
            raise InvalidInputError(f"T must be at least 2*dt, got T={self.T}, dt={self.dt}")
        if not isinstance(self.seed, (int, np.integer)) or self.seed < 0:
            raise InvalidInputError(f"seed must be a nonnegative integer, got {self.seed}")
        object.__setattr__(self, "seed", int(self.seed))

        merged = dict(DEFAULT_PARAMS[self.kind])
        for key, value in self.params.items():
            if key not in merged:
                raise InvalidInputError(
                    f"unknown parameter '{key}' for kind '{self.kind}'; "
                    f"allowed: {', '.join(sorted(merged)) or '(none)'}"
                )
            merged[key] = value
        object.__setattr__(self, "params", merged)

        if self.kind in SDE_KINDS:
            if self.snr_db is not None:
                raise InvalidInputError(f"snr_db is not legal for stochastic kind '{self.kind}'")
            R = 1.0 if self.R is None else float(self.R)
            noise_scale_from_R(R)  # validates R > 0
            object.__setattr__(self, "R", R)
        else:
            if self.R is not None:
                raise InvalidInputError(f"R is not legal for deterministic kind '{self.kind}'")
            if self.snr_db is not None and math.isnan(self.snr_db):
                raise InvalidInputError("snr_db must not be NaN")

        if self.initial_state is not None:
            state = tuple(float(v) for v in self.initial_state)
            if len(state) != STATE_DIM[self.kind]:
                raise InvalidInputError(
                    f"kind '{self.kind}' needs a state of dimension {STATE_DIM[self.kind]}, "
                    f"got {len(state)}"
                )
            if self.kind == LCG:
                m = self.params["m"]
                if state[0] != int(state[0]) or not (0 <= state[0] < m):
                    raise InvalidInputError(f"LCG state must be an integer in [0, {m})")
            object.__setattr__(self, "initial_state", state)

    @property
    def n_samples(self) -> int:
        return int(math.floor(self.T / self.dt + 1e-9)) + 1

    @property
    def ground_truth(self) -> str:
        if self.kind in SDE_KINDS:
            return GROUND_TRUTH_DIFFUSIVE
        return GROUND_TRUTH_DETERMINISTIC

    @property
    def sigma(self) -> Optional[float]:
        """Diffusion scale 1/R for stochastic kinds, None otherwise."""
        if self.kind in SDE_KINDS:
            return noise_scale_from_R(self.R)
        return None

    def resolved_state(self) -> tuple:
        if self.initial_state is not None:
            return self.initial_state
        if self.kind == LCG:
            return (float(self.seed % self.params["m"]),)
        if self.kind == CIR:
            return (float(self.params["theta"]),)
        return DEFAULT_STATE[self.kind]


@dataclass(frozen=True)
class GeneratedSeries:
    """Simulated first-component observable plus its provenance."""

    trajectory: Trajectory
    spec: SystemSpec
    ground_truth: str


def system_rhs(kind: str, params: dict, state, t: float) -> tuple:
    """State derivative for ODE/SDE kinds; next state for map kinds.

    For stochastic kinds this is the drift only; the diffusion is the
    uniform scale sigma = 1/R applied by the integrator.
    """
    if kind not in ALL_KINDS:
        raise InvalidInputError(f"unknown kind '{kind}'")
    if len(state) != STATE_DIM[kind]:
        raise InvalidInputError(
            f"kind '{kind}' expects state dimension {STATE_DIM[kind]}, got {len(state)}"
        )
    p = params
    if kind == SHM:
        x, v = state
        return (v, -p["omega"] ** 2 * x)
    if kind == DUFFING:
        x, v = state
        return (
            v,
            -p["delta"] * v - p["alpha"] * x - p["beta"] * x**3
            + p["gamma"] * math.cos(p["omega"] * t),
        )
    if kind == RAYLEIGH_DUFFING:
        x, v = state
        return (
            v,
            -p["delta"] * v - p["eps"] * (v - v**3) - p["alpha"] * x - p["beta"] * x**3
            + p["gamma"] * math.cos(p["omega"] * t),
        )
    if kind == CHEN:
        x, y, z = state
        return (p["a"] * (y - x), (p["c"] - p["a"]) * x - x * z + p["c"] * y, x * y - p["b"] * z)
    if kind == LU:
        x, y, z = state
        return (p["a"] * (y - x), -x * z + p["c"] * y, x * y - p["b"] * z)
    if kind == LOGISTIC:
        (x,) = state
        return (p["r"] * x * (1.0 - x),)
    if kind == HENON:
        x, y = state
        return (1.0 - p["a"] * x * x + y, p["b"] * x)
    if kind == LCG:
        (x,) = state
        return (float((p["a"] * int(x) + p["c"]) % p["m"]),)
    if kind == BROWNIAN:
        return (0.0,)
    if kind == OU:
        (x,) = state
        return (p["theta"] * (p["mu"] - x),)
    if kind == CIR:
        (x,) = state
        return (p["kappa"] * (p["theta"] - x),)
    # stochastic Duffing: both equations share one Wiener increment
    x, v = state
    return (
        v,
        -p["delta"] * v + x + x**3 + p["gamma"] * math.cos(p["omega"] * t),
    )


def _characteristic_time(kind: str, params: dict) -> float:
    if kind == OU:
        return 1.0 / params["theta"]
    if kind == CIR:
        return 1.0 / params["kappa"]
    if kind == STOCHASTIC_DUFFING:
        return 1.0 / params["delta"]
    return math.inf  # Brownian: Euler-Maruyama is exact at any step


@njit(cache=True, nogil=True)
def _em_ou(x0, theta, mu, sigma, dt, n_sub, xi, out):  # pragma: no cover
    sq = math.sqrt(dt)
    v = x0
    out[0] = v
    k = 0
    for i in range(out.shape[0] - 1):
        for _ in range(n_sub):
            v = v + theta * (mu - v) * dt + sigma * sq * xi[k]
            k += 1
        out[i + 1] = v
    return -1


@njit(cache=True, nogil=True)
def _em_cir(x0, kappa, theta, sigma, dt, n_sub, xi, out):  # pragma: no cover
    # full truncation: drift and diffusion see max(state, 0); emit the same
    sq = math.sqrt(dt)
    v = x0
    out[0] = max(v, 0.0)
    k = 0
    for i in range(out.shape[0] - 1):
        for _ in range(n_sub):
            vp = max(v, 0.0)
            v = v + kappa * (theta - vp) * dt + sigma * math.sqrt(vp) * sq * xi[k]
            k += 1
        out[i + 1] = max(v, 0.0)
    return -1


@njit(cache=True, nogil=True)
def _em_stochastic_duffing(x0, v0, delta, gamma, omega, sigma, dt, n_sub, xi, out):  # pragma: no cover
    sq = math.sqrt(dt)
    x = x0
    v = v0
    out[0] = x
    k = 0
    for i in range(out.shape[0] - 1):
        for _ in range(n_sub):
            t = k * dt
            dw = sq * xi[k]
            drift_v = -delta * v + x + x**3 + gamma * math.cos(omega * t)
            x_new = x + v * dt + sigma * dw
            v_new = v + drift_v * dt + sigma * dw
            x = x_new
            v = v_new
            k += 1
        if not (math.isfinite(x) and math.isfinite(v)):
            return i + 1
        out[i + 1] = x
    return -1


def _simulate_ode(spec: SystemSpec) -> np.ndarray:
    n = spec.n_samples
    t_eval = np.arange(n) * spec.dt
    state = np.asarray(spec.resolved_state(), dtype=np.float64)
    fun = lambda t, y: system_rhs(spec.kind, spec.params, y, t)

    transient = TRANSIENT_TIME.get(spec.kind, 0.0)
    if transient > 0 and spec.initial_state is None:
        warm = solve_ivp(fun, (0.0, transient), state, method="RK23",
                         rtol=RK23_RTOL, atol=RK23_ATOL)
        if not warm.success or not np.all(np.isfinite(warm.y[:, -1])):
            raise SimulationDivergedError(f"{spec.kind}: transient integration diverged")
        state = warm.y[:, -1]

    sol = solve_ivp(fun, (0.0, float(t_eval[-1])), state, method="RK23",
                    t_eval=t_eval, rtol=RK23_RTOL, atol=RK23_ATOL)
    if not sol.success or not np.all(np.isfinite(sol.y)):
        raise SimulationDivergedError(f"{spec.kind}: integration diverged ({sol.message})")
    return sol.y[0]


def _simulate_map(spec: SystemSpec) -> np.ndarray:
    n = spec.n_samples
    out = np.empty(n)
    if spec.kind == LCG:
        m = int(spec.params["m"])
        a = int(spec.params["a"])
        c = int(spec.params["c"])
        v = int(spec.resolved_state()[0])
        for i in range(n):
            out[i] = v / m  # normalized observable in [0, 1)
            v = (a * v + c) % m
        return out
    state = spec.resolved_state()
    for i in range(n):
        out[i] = state[0]
        state = system_rhs(spec.kind, spec.params, state, i * spec.dt)
    if not np.all(np.isfinite(out)):
        raise SimulationDivergedError(f"{spec.kind}: map iteration diverged")
    return out


def _simulate_sde(spec: SystemSpec, rng: np.random.Generator) -> np.ndarray:
    n = spec.n_samples
    sigma = spec.sigma
    p = spec.params
    target = min(spec.dt, SDE_STEP_FRACTION * _characteristic_time(spec.kind, p))
    n_sub = max(1, int(math.ceil(spec.dt / target - 1e-9)))
    dt_int = spec.dt / n_sub
    xi = rng.standard_normal((n - 1) * n_sub)
    state = spec.resolved_state()

    if spec.kind == BROWNIAN:
        steps = sigma * math.sqrt(dt_int) * xi
        path = state[0] + np.concatenate([[0.0], np.cumsum(steps)])
        return path[::n_sub].copy()

    out = np.empty(n)
    if spec.kind == OU:
        bad = _em_ou(state[0], p["theta"], p["mu"], sigma, dt_int, n_sub, xi, out)
    elif spec.kind == CIR:
        bad = _em_cir(state[0], p["kappa"], p["theta"], sigma, dt_int, n_sub, xi, out)
    else:
        bad = _em_stochastic_duffing(
            state[0], state[1], p["delta"], p["gamma"], p["omega"],
            sigma, dt_int, n_sub, xi, out,
        )
    if bad >= 0:
        raise SimulationDivergedError(
            f"{spec.kind}: trajectory diverged near t={bad * spec.dt:.6g}"
        )
    return out


def _spec_rng(spec: SystemSpec) -> np.random.Generator:
    # stream derived from (seed, kind) so distinct kinds never share noise
    return np.random.default_rng(
        np.random.SeedSequence([spec.seed, zlib.crc32(spec.kind.encode())])
    )


def add_noise_snr(traj: Trajectory, snr_db: float, seed) -> Trajectory:
    """Additive zero-mean Gaussian noise at the given signal-to-noise ratio.

    Noise variance is ``var(signal) / 10^(snr_db/10)`` with the sample
    variance as signal power, so constant offsets carry no signal power.
    ``seed`` may be an integer or a numpy Generator.
    """
    if math.isnan(snr_db):
        raise InvalidInputError("snr_db must not be NaN")
    if math.isinf(snr_db):
        if snr_db > 0:
            return traj  # no noise in the infinite-SNR limit
        raise InvalidInputError("snr_db = -inf would mean infinite noise power")
    p_sig = float(np.var(traj.values, ddof=1))
    if p_sig <= 0:
        raise DegenerateSignalError("constant signal has no power to set an SNR against")
    rng = seed if isinstance(seed, np.random.Generator) else np.random.default_rng(seed)
    noise = rng.normal(0.0, math.sqrt(p_sig * 10.0 ** (-snr_db / 10.0)), traj.values.size)
    return Trajectory(values=traj.values + noise, dt=traj.dt, label=traj.label)


def simulate(spec: SystemSpec) -> GeneratedSeries:
    """Generate the observable series for a spec; deterministic given (spec, seed)."""
    rng = _spec_rng(spec)
    if spec.kind in ODE_KINDS:
        values = _simulate_ode(spec)
    elif spec.kind in MAP_KINDS:
        values = _simulate_map(spec)
    else:
        values = _simulate_sde(spec, rng)

    traj = Trajectory(values=values, dt=spec.dt, label=spec.ground_truth)
    if spec.kind in DETERMINISTIC_KINDS and spec.snr_db is not None:
        traj = add_noise_snr(traj, spec.snr_db, rng)
    return GeneratedSeries(trajectory=traj, spec=spec, ground_truth=spec.ground_truth)
