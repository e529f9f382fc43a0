"""Tests for the benchmark simulators."""

import math

import numpy as np
import pytest

from exdiff.core import Trajectory
from exdiff.errors import (
    DegenerateSignalError,
    InvalidInputError,
    SimulationDivergedError,
)
from exdiff.seriesio import spec_from_config, spec_to_config
from exdiff.systems import (
    ALL_KINDS,
    BROWNIAN,
    CHEN,
    CIR,
    DUFFING,
    HENON,
    LCG,
    LOGISTIC,
    LU,
    OU,
    RAYLEIGH_DUFFING,
    SHM,
    STOCHASTIC_DUFFING,
    SystemSpec,
    add_noise_snr,
    noise_scale_from_R,
    simulate,
    system_rhs,
)


class TestSpecValidation:
    def test_unknown_kind(self):
        with pytest.raises(InvalidInputError, match="allowed"):
            SystemSpec(kind="lorenz", dt=0.1, T=10, seed=0)

    def test_noise_field_legality(self):
        with pytest.raises(InvalidInputError):
            SystemSpec(kind=SHM, dt=0.1, T=10, seed=0, R=1.0)
        with pytest.raises(InvalidInputError):
            SystemSpec(kind=OU, dt=0.1, T=10, seed=0, snr_db=30.0)

    def test_stochastic_R_defaults_to_one(self):
        spec = SystemSpec(kind=BROWNIAN, dt=0.1, T=10, seed=0)
        assert spec.R == 1.0
        assert spec.sigma == 1.0

    def test_nonpositive_R_rejected(self):
        with pytest.raises(InvalidInputError, match="positive"):
            SystemSpec(kind=CIR, dt=0.1, T=10, seed=0, R=0.0)

    def test_unknown_param_rejected(self):
        with pytest.raises(InvalidInputError, match="unknown parameter"):
            SystemSpec(kind=LOGISTIC, dt=1, T=10, seed=0, params={"q": 3})

    def test_state_dimension_checked(self):
        with pytest.raises(InvalidInputError, match="dimension"):
            SystemSpec(kind=DUFFING, dt=0.1, T=10, seed=0, initial_state=(1.0,))

    def test_sample_count(self):
        assert SystemSpec(kind=LOGISTIC, dt=1.0, T=100.0, seed=0).n_samples == 101
        assert SystemSpec(kind=BROWNIAN, dt=1e-3, T=100.0, seed=0).n_samples == 100_001

    def test_ground_truth_follows_kind_not_noise(self):
        assert SystemSpec(kind=SHM, dt=0.1, T=10, seed=0, snr_db=0.0).ground_truth == "deterministic"
        assert SystemSpec(kind=OU, dt=0.1, T=10, seed=0, R=0.1).ground_truth == "diffusive"


class TestSystemRhs:
    def test_duffing_plug_in(self):
        spec = SystemSpec(kind=DUFFING, dt=0.1, T=10, seed=0)
        assert system_rhs(DUFFING, spec.params, (1.0, 0.0), 0.0) == pytest.approx((0.0, 0.3))

    def test_rayleigh_duffing_plug_in(self):
        spec = SystemSpec(kind=RAYLEIGH_DUFFING, dt=0.1, T=10, seed=0)
        # at v=0 the velocity-shaping term vanishes; same value as Duffing
        assert system_rhs(RAYLEIGH_DUFFING, spec.params, (1.0, 0.0), 0.0) == pytest.approx((0.0, 0.3))
        dx, dv = system_rhs(RAYLEIGH_DUFFING, spec.params, (1.0, 2.0), 0.0)
        assert dx == 2.0
        assert dv == pytest.approx(-0.2 * 2 - 0.1 * (2 - 8) + 1 - 1 + 0.3)

    def test_chen_plug_in(self):
        spec = SystemSpec(kind=CHEN, dt=0.01, T=10, seed=0)
        assert system_rhs(CHEN, spec.params, (1.0, 1.0, 1.0), 0.0) == pytest.approx((0.0, 20.0, -2.0))

    def test_lu_plug_in(self):
        spec = SystemSpec(kind=LU, dt=0.01, T=10, seed=0)
        assert system_rhs(LU, spec.params, (1.0, 1.0, 1.0), 0.0) == pytest.approx((0.0, 19.0, -2.0))

    def test_lcg_single_step(self):
        spec = SystemSpec(kind=LCG, dt=1, T=10, seed=0)
        # one modular multiply-add: 1664525*1 + 1013904223 mod 2^32
        assert system_rhs(LCG, spec.params, (1.0,), 0.0) == (1015568748.0,)

    def test_dimension_mismatch(self):
        with pytest.raises(InvalidInputError):
            system_rhs(CHEN, {"a": 35, "b": 3, "c": 28}, (1.0, 1.0), 0.0)


class TestNoise:
    def test_sigma_from_R(self):
        assert noise_scale_from_R(1.0) == 1.0
        assert noise_scale_from_R(0.25) == 4.0
        assert noise_scale_from_R(4.0) == 0.25
        with pytest.raises(InvalidInputError):
            noise_scale_from_R(0.0)
        with pytest.raises(InvalidInputError):
            noise_scale_from_R(-2.0)

    def test_infinite_snr_is_identity(self):
        t = Trajectory(np.sin(np.arange(100) * 0.1), dt=0.1)
        out = add_noise_snr(t, math.inf, seed=1)
        assert np.array_equal(out.values, t.values)

    def test_zero_snr_noise_power_matches_signal(self):
        n = 1_000_000
        t = Trajectory(np.sin(np.arange(n) * 0.01), dt=0.01)
        out = add_noise_snr(t, 0.0, seed=2)
        noise = out.values - t.values
        p_sig = np.var(t.values, ddof=1)
        assert np.var(noise, ddof=1) == pytest.approx(p_sig, rel=0.03)

    def test_constant_signal_rejected(self):
        t = Trajectory(np.full(100, 3.0), dt=1.0)
        with pytest.raises(DegenerateSignalError):
            add_noise_snr(t, 20.0, seed=3)


class TestMaps:
    def test_logistic_matches_direct_iteration(self):
        out = simulate(SystemSpec(kind=LOGISTIC, dt=1.0, T=500.0, seed=9))
        x = 0.2
        for i, v in enumerate(out.trajectory.values):
            assert v == x, f"diverged from direct iteration at step {i}"
            x = 4.0 * x * (1.0 - x)

    def test_henon_matches_direct_iteration(self):
        out = simulate(SystemSpec(kind=HENON, dt=1.0, T=300.0, seed=9))
        x, y = 0.1, 0.1
        for v in out.trajectory.values:
            assert v == x
            x, y = 1.0 - 1.4 * x * x + y, 0.3 * x

    def test_lcg_matches_direct_iteration_and_seed(self):
        seed = 123456789
        out = simulate(SystemSpec(kind=LCG, dt=1.0, T=200.0, seed=seed))
        m = 2**32
        v = seed % m
        for sample in out.trajectory.values:
            assert sample == v / m
            v = (1664525 * v + 1013904223) % m

    def test_lcg_output_normalized(self):
        out = simulate(SystemSpec(kind=LCG, dt=1.0, T=1000.0, seed=42))
        assert np.all(out.trajectory.values >= 0.0)
        assert np.all(out.trajectory.values < 1.0)


class TestODEs:
    def test_shm_matches_closed_form(self):
        out = simulate(SystemSpec(kind=SHM, dt=1e-3, T=100.0, seed=0))
        t = np.arange(out.trajectory.n) * 1e-3
        assert np.max(np.abs(out.trajectory.values - np.cos(t))) <= 1e-4

    def test_shm_with_noise_keeps_deterministic_label(self):
        out = simulate(SystemSpec(kind=SHM, dt=1e-2, T=50.0, seed=1, snr_db=10.0))
        assert out.ground_truth == "deterministic"

    @pytest.mark.parametrize("kind", [DUFFING, RAYLEIGH_DUFFING, CHEN, LU])
    def test_chaotic_odes_stay_finite(self, kind):
        out = simulate(SystemSpec(kind=kind, dt=1e-2, T=20.0, seed=3))
        assert np.all(np.isfinite(out.trajectory.values))
        assert out.trajectory.n == 2001

    def test_chen_transient_discarded(self):
        # after the warm-up the orbit must live on the attractor, far from (1,1,1)
        out = simulate(SystemSpec(kind=CHEN, dt=1e-2, T=20.0, seed=3))
        assert np.max(np.abs(out.trajectory.values)) > 5.0


class TestSDEs:
    def test_brownian_increment_variance(self):
        spec = SystemSpec(kind=BROWNIAN, dt=1e-3, T=1000.0, seed=5, R=1.0)
        out = simulate(spec)
        inc = np.diff(out.trajectory.values)
        assert inc.size >= 1_000_000 - 1
        assert np.var(inc, ddof=1) == pytest.approx(1e-3, rel=0.02)

    def test_brownian_sigma_scales_with_R(self):
        out = simulate(SystemSpec(kind=BROWNIAN, dt=1e-3, T=100.0, seed=5, R=0.5))
        inc = np.diff(out.trajectory.values)
        assert np.var(inc, ddof=1) == pytest.approx(4 * 1e-3, rel=0.05)

    def test_ou_stationary_variance(self):
        # pooled samples from t >= 10 (relaxed) every 0.25 time units across
        # 100 seeds: ~16k draws, estimator sd ~1% against the 5% tolerance
        samples = []
        for seed in range(100):
            out = simulate(SystemSpec(kind=OU, dt=1e-2, T=50.0, seed=seed, R=1.0))
            samples.extend(out.trajectory.values[1000::25])
        assert np.var(samples, ddof=1) == pytest.approx(0.5, rel=0.05)

    def test_cir_never_negative(self):
        for seed in range(5):
            out = simulate(SystemSpec(kind=CIR, dt=1e-3, T=50.0, seed=seed, R=0.25))
            assert np.all(out.trajectory.values >= 0.0)

    def test_stochastic_duffing_diverges_as_written(self):
        # the cubic drift term has positive sign, so paths escape quickly
        for seed in range(3):
            with pytest.raises(SimulationDivergedError):
                simulate(SystemSpec(kind=STOCHASTIC_DUFFING, dt=1e-3, T=100.0, seed=seed, R=1.0))

    def test_internal_step_refines_large_output_dt(self):
        # coarse output grid: the OU path is stepped internally at 1e-3 of
        # the drift time, so stationary statistics survive the subsampling
        samples = []
        for seed in range(5):
            out = simulate(SystemSpec(kind=OU, dt=5e-2, T=500.0, seed=8 + seed, R=1.0))
            assert out.trajectory.n == 10_001
            samples.extend(out.trajectory.values[2000:])
        assert np.var(samples, ddof=1) == pytest.approx(0.5, rel=0.10)


class TestDeterminism:
    @pytest.mark.parametrize("kind,noise", [
        (BROWNIAN, None), (OU, None), (CIR, None),
        (SHM, 20.0), (LOGISTIC, 15.0),
    ])
    def test_identical_spec_identical_series(self, kind, noise):
        kwargs = dict(kind=kind, dt=1e-2, T=10.0, seed=77)
        if kind in (BROWNIAN, OU, CIR):
            kwargs["R"] = 1.0
        else:
            kwargs["snr_db"] = noise
        a = simulate(SystemSpec(**kwargs))
        b = simulate(SystemSpec(**kwargs))
        assert np.array_equal(a.trajectory.values, b.trajectory.values)

    def test_different_seeds_differ(self):
        a = simulate(SystemSpec(kind=BROWNIAN, dt=1e-2, T=10.0, seed=1))
        b = simulate(SystemSpec(kind=BROWNIAN, dt=1e-2, T=10.0, seed=2))
        assert not np.array_equal(a.trajectory.values, b.trajectory.values)

    def test_kinds_get_distinct_streams(self):
        a = simulate(SystemSpec(kind=BROWNIAN, dt=1e-2, T=10.0, seed=3))
        b = simulate(SystemSpec(kind=OU, dt=1e-2, T=10.0, seed=3, params={"theta": 1e-9}))
        # OU with theta ~ 0 is Brownian; distinct streams keep paths distinct
        assert not np.allclose(a.trajectory.values, b.trajectory.values)


class TestSpecConfigRoundTrip:
    @pytest.mark.parametrize("spec", [
        SystemSpec(kind=BROWNIAN, dt=1e-3, T=10.0, seed=4, R=0.5),
        SystemSpec(kind=SHM, dt=1e-2, T=50.0, seed=9, snr_db=25.0),
        SystemSpec(kind=LCG, dt=1.0, T=100.0, seed=31, initial_state=(17.0,)),
        SystemSpec(kind=DUFFING, dt=1e-2, T=30.0, seed=2, params={"gamma": 0.4}),
    ])
    def test_round_trip(self, spec):
        assert spec_from_config(spec_to_config(spec)) == spec

    def test_bad_key_reports_line(self):
        text = "kind = brownian\ndt = 0.1\nT = 10\nseed = 1\nbogus = 3\n"
        with pytest.raises(InvalidInputError, match="line 5.*bogus"):
            spec_from_config(text)

    def test_every_kind_simulates(self):
        for kind in ALL_KINDS:
            if kind == STOCHASTIC_DUFFING:
                continue  # diverges by design at default noise
            out = simulate(SystemSpec(kind=kind, dt=1e-2, T=5.0, seed=1))
            assert out.trajectory.n == 501
