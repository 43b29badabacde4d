"""Energy integration and metrics derivation."""

import dataclasses
import math

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from enerprof.energy import (
    best_batch,
    derive_metrics,
    integrate_energy,
    tdp_headroom,
    with_metrics,
)
from enerprof.errors import EnergyError
from enerprof.telemetry import SamplerConfig, SyntheticProfile, start_sampler, stop_sampler
from enerprof.types import EnergyMetrics, InferenceSetup, PowerSample

from conftest import T0, constant_run, make_samples


def profile_samples(profile, rate=100.0):
    handle = start_sampler(SamplerConfig(rate=rate, source="synthetic", source_spec=profile))
    samples, _ = stop_sampler(handle)
    return samples


def test_constant_200w_over_10s_is_2000j():
    samples = profile_samples(SyntheticProfile.constant(10.0, 200.0))
    joules = integrate_energy(samples, samples[0].t, samples[0].t + 10_000_000_000)
    assert joules == pytest.approx(2000.0, rel=1e-9)


def test_linear_ramp_0_to_100_over_10s_is_500j():
    samples = profile_samples(SyntheticProfile.ramp(0.0, 100.0, 10.0))
    joules = integrate_energy(samples, samples[0].t, samples[0].t + 10_000_000_000)
    assert joules == pytest.approx(500.0, rel=1e-6)


def riemann_oracle(profile, duration_s, rate):
    """Left-rectangle sum over the true profile at the given density."""
    n = int(duration_s * rate)
    dt = 1.0 / rate
    return sum(profile.power_at(k * dt) * dt for k in range(n))


def test_random_profiles_match_dense_riemann_oracle(rng):
    for _ in range(20):
        n_seg = int(rng.integers(1, 6))
        pairs = [
            (float(rng.uniform(0.3, 2.0)), float(rng.uniform(10.0, 400.0)))
            for _ in range(n_seg)
        ]
        profile = SyntheticProfile.from_pairs(pairs)
        duration = profile.total_duration
        samples = profile_samples(profile, rate=100.0)
        t0 = samples[0].t
        t1 = t0 + round(duration * 1e9)
        ours = integrate_energy(samples, t0, min(t1, samples[-1].t))
        oracle = riemann_oracle(profile, duration, rate=1000.0)
        assert ours == pytest.approx(oracle, rel=0.01)


def test_insufficient_samples_in_window():
    samples = make_samples([100.0, 100.0, 100.0])
    with pytest.raises(EnergyError, match="insufficient"):
        integrate_energy(samples, samples[-1].t + 1, samples[-1].t + 100)
    with pytest.raises(EnergyError, match="empty"):
        integrate_energy(samples, samples[0].t, samples[0].t)


def test_boundary_interpolation():
    # 0 W at t=0s, 100 W at t=1s; window [0.25s, 0.75s] of the ramp
    samples = (
        PowerSample(t=T0, power=0.0),
        PowerSample(t=T0 + 250_000_000, power=25.0),
        PowerSample(t=T0 + 500_000_000, power=50.0),
        PowerSample(t=T0 + 750_000_000, power=75.0),
        PowerSample(t=T0 + 1_000_000_000, power=100.0),
    )
    joules = integrate_energy(samples, T0 + 125_000_000, T0 + 875_000_000)
    assert joules == pytest.approx(50.0 * 0.75, rel=1e-12)


@given(
    split=st.floats(min_value=0.05, max_value=0.95),
    powers=st.lists(st.floats(min_value=0.0, max_value=500.0), min_size=30, max_size=120),
)
def test_additivity_over_adjacent_windows(split, powers):
    samples = make_samples(powers)
    a, c = samples[0].t, samples[-1].t
    b = a + round((c - a) * split)
    whole = integrate_energy(samples, a, c)
    parts = integrate_energy(samples, a, b) + integrate_energy(samples, b, c)
    assert parts == pytest.approx(whole, rel=1e-12, abs=1e-12)


def test_integral_nonnegative(rng):
    for _ in range(20):
        samples = make_samples(rng.uniform(0, 300, size=50))
        assert integrate_energy(samples, samples[0].t, samples[-1].t) >= 0.0


def test_derive_metrics_textbook_case():
    # 2000 J, 1000 images, 10 s, batch 50 -> 2 J/img, 100 img/s, 0.5 s, 200 W
    run = constant_run(power=200.0, batch_size=50, n_batches=20, period_ns=500_000_000)
    m = derive_metrics(run)
    assert m.energy_per_image == pytest.approx(2.0, rel=1e-9)
    assert m.throughput == pytest.approx(100.0, rel=1e-9)
    assert m.latency == pytest.approx(0.5, rel=1e-9)
    assert m.avg_power == pytest.approx(200.0, rel=1e-9)
    assert m.images_processed == 1000
    assert m.wall_time == pytest.approx(10.0, rel=1e-12)


def test_derive_metrics_single_batch():
    # one batch of 1 image, 50 W constant, 0.1 s -> 5 J/img, 10 img/s, 50 W
    run = constant_run(power=50.0, batch_size=1, n_batches=1, period_ns=100_000_000)
    m = derive_metrics(run)
    assert m.energy_per_image == pytest.approx(5.0, rel=1e-9)
    assert m.throughput == pytest.approx(10.0, rel=1e-9)
    assert m.avg_power == pytest.approx(50.0, rel=1e-9)


def test_derive_metrics_empty_run():
    run = dataclasses.replace(constant_run(), batch_marks=())
    with pytest.raises(EnergyError, match="empty"):
        derive_metrics(run)


def test_identity_on_randomized_runs(rng):
    for _ in range(100):
        run = constant_run(
            power=float(rng.uniform(20, 400)),
            batch_size=int(rng.integers(1, 65)),
            n_batches=int(rng.integers(1, 40)),
            period_ns=int(rng.integers(20, 2000)) * 1_000_000,
        )
        m = derive_metrics(run)
        assert m.avg_power == pytest.approx(
            m.energy_per_image * m.throughput, rel=1e-6
        )


def test_tdp_headroom_values():
    setup = InferenceSetup("gpu-250w", "rt", tdp=250.0)
    mk = lambda watts: EnergyMetrics(watts / 100.0, 100.0, 0.1, watts, 10, 100, 1.0)
    assert tdp_headroom(mk(200.0), setup).ratio == pytest.approx(0.8)
    head = tdp_headroom(mk(250.0), setup)
    assert head.ratio == pytest.approx(1.0)
    assert not head.anomalous
    head = tdp_headroom(mk(260.0), setup)
    assert head.ratio == pytest.approx(1.04)
    assert head.anomalous


def test_best_batch_examples():
    def run_with_energy(batch, epi):
        # constant power scaled so energy/image hits the target
        period = 1_000_000_000
        return with_metrics(
            constant_run(power=epi * batch, batch_size=batch, n_batches=3, period_ns=period)
        )

    runs = [run_with_energy(1, 9.0), run_with_energy(2, 5.0),
            run_with_energy(4, 3.0), run_with_energy(8, 3.2)]
    batch, metrics = best_batch(runs)
    assert batch == 4
    assert metrics.energy_per_image == pytest.approx(3.0)

    tie = [run_with_energy(4, 3.0), run_with_energy(8, 3.0)]
    assert best_batch(tie)[0] == 4

    with pytest.raises(EnergyError):
        best_batch([])


def test_best_batch_matches_exhaustive_scan(rng):
    def run_with_energy(batch, epi):
        return with_metrics(
            constant_run(power=epi * batch, batch_size=batch, n_batches=2,
                         period_ns=1_000_000_000)
        )

    for _ in range(50):
        batches = [2**i for i in range(int(rng.integers(1, 7)))]
        energies = rng.uniform(0.5, 20.0, size=len(batches))
        runs = [run_with_energy(b, float(e)) for b, e in zip(batches, energies)]
        got_batch, got_metrics = best_batch(runs)
        want = min(
            ((r.metrics.energy_per_image, r.batch_size) for r in runs),
        )
        assert (got_metrics.energy_per_image, got_batch) == want
