import numpy as np
import pytest

from enerprof.types import (
    EnergyMetrics,
    InferenceSetup,
    PowerSample,
    RunMeasurement,
)

T0 = 1_600_000_000_000_000_000


def make_samples(powers, t0=T0, period_ns=10_000_000):
    return tuple(
        PowerSample(t=t0 + i * period_ns, power=float(p)) for i, p in enumerate(powers)
    )


def constant_run(
    power=200.0,
    batch_size=4,
    n_batches=10,
    period_ns=500_000_000,
    t0=T0,
    setup=None,
    sample_period_ns=10_000_000,
):
    """Run with constant power and exactly periodic batch marks."""
    setup = setup or InferenceSetup("test-gpu", "test-rt", tdp=250.0)
    marks = tuple(t0 + (i + 1) * period_ns for i in range(n_batches))
    n_samples = (marks[-1] - t0) // sample_period_ns + 1
    samples = tuple(
        PowerSample(t=t0 + i * sample_period_ns, power=power) for i in range(n_samples)
    )
    return RunMeasurement(
        model_id="test-model",
        setup=setup,
        batch_size=batch_size,
        t_start=t0,
        batch_marks=marks,
        samples=samples,
    )


@pytest.fixture
def rng():
    return np.random.default_rng(20240901)
