"""Invariant checks on the core domain types."""

import dataclasses

import pytest
from hypothesis import given, strategies as st

from enerprof.types import (
    EnergyMetrics,
    InferenceSetup,
    ModelFamily,
    ModelRecord,
    PowerSample,
    RunMeasurement,
    ScoreParams,
    validate,
)

from conftest import constant_run, make_samples


def make_model(**overrides):
    base = dict(
        model_id="net-a",
        family=ModelFamily.CNN,
        params=5e6,
        flops=1e9,
        input_size=224,
        accuracies={"val": 76.5},
    )
    base.update(overrides)
    return ModelRecord(**base)


def test_well_formed_model_is_clean():
    assert validate(make_model()) == []


def test_accuracy_out_of_range_detected():
    report = validate(make_model(accuracies={"val": 101.0}))
    assert any("accuracy out of [0,100]" in v for v in report)


def test_decreasing_marks_detected():
    run = constant_run()
    bad = dataclasses.replace(run, batch_marks=tuple(reversed(run.batch_marks)))
    assert any("marks not increasing" in v for v in validate(bad))


def test_well_formed_run_is_clean():
    run = constant_run()
    assert validate(run) == []


def test_metrics_identity_violation_detected():
    metrics = EnergyMetrics(
        energy_per_image=2.0,
        throughput=100.0,
        latency=0.5,
        avg_power=500.0,  # should be 200
        batch_size=50,
        images_processed=1000,
        wall_time=10.0,
    )
    assert any("avg_power" in v for v in validate(metrics))


def test_score_params_bounds():
    assert validate(ScoreParams(weight=0.5, norm=10.0, min_accuracy=50.0)) == []
    assert validate(ScoreParams(weight=1.5, norm=10.0, min_accuracy=50.0))
    assert validate(ScoreParams(weight=0.5, norm=0.0, min_accuracy=50.0))
    assert validate(ScoreParams(weight=0.5, norm=1.0, min_accuracy=130.0))


def test_family_parse_defaults_to_other():
    assert ModelFamily.parse("cnn") is ModelFamily.CNN
    assert ModelFamily.parse("Transformer") is ModelFamily.TRANSFORMER
    assert ModelFamily.parse("something-new") is ModelFamily.OTHER


# Every single-field corruption must be detected.

_CORRUPTIONS = [
    ("negative power", lambda: PowerSample(t=1, power=-5.0)),
    ("zero timestamp", lambda: PowerSample(t=0, power=5.0)),
    ("zero tdp", lambda: InferenceSetup("g", "r", tdp=0.0)),
    ("bad peak", lambda: InferenceSetup("g", "r", tdp=250.0, peak_compute=-1.0)),
    ("negative params", lambda: make_model(params=-1)),
    ("negative flops", lambda: make_model(flops=-1)),
    ("zero input size", lambda: make_model(input_size=0)),
    ("accuracy 250", lambda: make_model(accuracies={"val": 250.0})),
]


@pytest.mark.parametrize("label,build", _CORRUPTIONS, ids=[c[0] for c in _CORRUPTIONS])
def test_corruption_detected(label, build):
    assert validate(build()) != []


@given(
    field=st.sampled_from(["params", "flops", "input_size"]),
    magnitude=st.floats(min_value=0.5, max_value=1e6),
)
def test_random_negative_corruption_always_detected(field, magnitude):
    value = -magnitude if field != "input_size" else -int(magnitude) - 1
    record = make_model(**{field: value})
    assert validate(record) != []


@given(acc=st.floats(min_value=-1e6, max_value=1e6, allow_nan=False))
def test_accuracy_bound_is_sharp(acc):
    report = validate(make_model(accuracies={"val": acc}))
    assert (report == []) == (0 <= acc <= 100)
