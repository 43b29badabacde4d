"""Energy derivation: power integration, per-run metrics, TDP headroom.

The integration scheme is the trapezoidal rule with linear interpolation of
the power signal at the window boundaries. Arithmetic stays in integer
nanoseconds until the final scale to seconds, so closed windows of exact
sample data integrate without drift.
"""

from __future__ import annotations

import bisect
from dataclasses import dataclass, replace
from typing import Sequence

from .errors import EnergyError
from .types import EnergyMetrics, InferenceSetup, PowerSample, RunMeasurement

TDP_ANOMALY_RATIO = 1.02  # sensor transients above this multiple of TDP are suspicious


def integrate_energy(samples: Sequence[PowerSample], t0: int, t1: int) -> float:
    """Trapezoidal integral of power over [t0, t1], in joules.

    Boundary powers are linearly interpolated between the neighboring
    samples; beyond the sampled range the signal is extended as constant
    (nearest sample). Requires at least two samples inside the window.
    """
    if t0 >= t1:
        raise EnergyError("integration window is empty")
    ts = [s.t for s in samples]
    lo = bisect.bisect_left(ts, t0)
    hi = bisect.bisect_right(ts, t1)
    if hi - lo < 2:
        raise EnergyError(
            f"insufficient samples in window: {hi - lo} inside [{t0}, {t1}]"
        )

    def power_at(t: int, inner_idx: int, outer_idx: int) -> float:
        # inner_idx: nearest in-window sample; outer_idx: neighbor beyond the
        # boundary, or None-like (out of range) when the window edge extends
        # past the sampled range.
        if ts[inner_idx] == t:
            return samples[inner_idx].power
        if outer_idx < 0 or outer_idx >= len(samples):
            return samples[inner_idx].power
        a, b = samples[outer_idx], samples[inner_idx]
        if a.t > b.t:
            a, b = b, a
        frac = (t - a.t) / (b.t - a.t)
        return a.power + (b.power - a.power) * frac

    times: list[int] = []
    powers: list[float] = []
    if ts[lo] != t0:
        times.append(t0)
        powers.append(power_at(t0, lo, lo - 1))
    for i in range(lo, hi):
        times.append(ts[i])
        powers.append(samples[i].power)
    if times[-1] != t1:
        times.append(t1)
        powers.append(power_at(t1, hi - 1, hi))

    acc = 0.0
    for i in range(len(times) - 1):
        acc += (powers[i] + powers[i + 1]) * (times[i + 1] - times[i])
    return acc / 2e9


def derive_metrics(run: RunMeasurement) -> EnergyMetrics:
    """Compute EnergyMetrics for a run from its samples and batch marks.

    The measured window is [run.t_start, last batch mark]. The unit identity
    avg_power == energy_per_image * throughput holds by construction.
    """
    if not run.batch_marks:
        raise EnergyError("empty run: no batch marks")
    t_end = run.batch_marks[-1]
    if t_end <= run.t_start:
        raise EnergyError("run window is empty")
    n_batches = len(run.batch_marks)
    images = n_batches * run.batch_size
    total_j = integrate_energy(run.samples, run.t_start, t_end)
    wall_time = (t_end - run.t_start) / 1e9
    return EnergyMetrics(
        energy_per_image=total_j / images,
        throughput=images / wall_time,
        latency=wall_time / n_batches,
        avg_power=total_j / wall_time,
        batch_size=run.batch_size,
        images_processed=images,
        wall_time=wall_time,
    )


@dataclass(frozen=True)
class TdpHeadroom:
    ratio: float  # avg_power / tdp
    anomalous: bool  # ratio above the sensor-transient threshold


def tdp_headroom(metrics: EnergyMetrics, setup: InferenceSetup) -> TdpHeadroom:
    """Fraction of the TDP ceiling the run's average power reached."""
    if setup.tdp <= 0:
        raise EnergyError("setup tdp must be positive")
    ratio = metrics.avg_power / setup.tdp
    return TdpHeadroom(ratio=ratio, anomalous=ratio > TDP_ANOMALY_RATIO)


def best_batch(runs: Sequence[RunMeasurement]) -> tuple[int, EnergyMetrics]:
    """Pick the most efficient run: minimal energy per image, ties to the
    smaller batch size."""
    if not runs:
        raise EnergyError("no runs to choose from")
    scored = []
    for run in runs:
        metrics = run.metrics if run.metrics is not None else derive_metrics(run)
        scored.append((metrics.energy_per_image, run.batch_size, metrics))
    energy, batch, metrics = min(scored, key=lambda item: (item[0], item[1]))
    return batch, metrics


def with_metrics(run: RunMeasurement) -> RunMeasurement:
    """Return a copy of the run with derived metrics attached."""
    return replace(run, metrics=derive_metrics(run))
