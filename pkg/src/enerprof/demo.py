"""Bundled synthetic scenario: three models on two deployment setups.

Workloads are scripted simulators on an exact virtual timeline, and the
power logs are constant-power replay files, so every derived metric has a
closed form: with batch latency T(b) = base + slope*b and constant power P,

    energy/image = P * T(b) / b      throughput = b / T(b)
    latency      = T(b)              avg power  = P

The "graph" runtime divides each model's latency by a per-model speedup, so
paired throughput and energy ratios coincide exactly (the TDP identity).
Also provides a synthetic accuracy-vs-energy frontier with steeply
diminishing returns, for trend-fit and extrapolation checks.
"""

from __future__ import annotations

import math
import sys
from dataclasses import dataclass
from pathlib import Path
from typing import Optional

import numpy as np

from .harness import SweepConfig
from .types import InferenceSetup, ModelFamily, ModelRecord, PowerSample
from .telemetry import serialize_samples

DEMO_T0_NS = 1_600_000_000_000_000_000
SAMPLE_RATE_HZ = 100.0
SAMPLE_PERIOD_NS = 10_000_000
LOG_MARGIN_NS = 1_000_000_000

GPU_LABEL = "sim-gpu"
RUNTIMES = ("eager", "graph")
TDP_W = 250.0
PEAK_COMPUTE = 19.5e12

DEMO_SWEEP = SweepConfig(
    start_batch=1,
    max_batch=8,
    min_reps=5,
    min_runtime=0.4,
    warmup_min_reps=3,
    warmup_min_runtime=0.2,
)


@dataclass(frozen=True)
class DemoModel:
    record: ModelRecord
    power_w: float
    base_ms: float  # eager-runtime latency components
    per_item_ms: float
    speedup: float  # graph runtime divides latency by this
    oom_at: int  # 0 = never

    def latency_ns(self, runtime: str, batch: int) -> int:
        # mirrors the simulator's arithmetic: per-component ms->ns rounding
        base_ms, per_item_ms = self.latency_args(runtime)
        return round(base_ms * 1e6) + round(per_item_ms * 1e6) * batch

    def latency_args(self, runtime: str) -> tuple[float, float]:
        if runtime == "graph":
            return self.base_ms / self.speedup, self.per_item_ms / self.speedup
        return self.base_ms, self.per_item_ms


DEMO_MODELS = (
    DemoModel(
        record=ModelRecord(
            model_id="aether-s",
            family=ModelFamily.CNN,
            params=5.3e6,
            flops=0.39e9,
            input_size=224,
            accuracies={"val-main": 76.1, "val-real": 82.9, "val-shift": 64.2},
            pub_year=2019,
            activations=6.8e6,
            url="https://example.org/models/aether-s",
        ),
        power_w=200.0,
        base_ms=40.0,
        per_item_ms=10.0,
        speedup=2.0,
        oom_at=0,
    ),
    DemoModel(
        record=ModelRecord(
            model_id="borealis-m",
            family=ModelFamily.TRANSFORMER,
            params=22.1e6,
            flops=4.6e9,
            input_size=224,
            accuracies={"val-main": 81.4, "val-real": 86.7, "val-shift": 70.3},
            pub_year=2021,
            activations=18.2e6,
            url="https://example.org/models/borealis-m",
        ),
        power_w=225.0,
        base_ms=60.0,
        per_item_ms=12.0,
        speedup=3.0,
        oom_at=0,
    ),
    DemoModel(
        record=ModelRecord(
            model_id="cinder-l",
            family=ModelFamily.HYBRID,
            params=88.6e6,
            flops=15.4e9,
            input_size=288,
            accuracies={"val-main": 85.2, "val-real": 89.1, "val-shift": 75.8},
            pub_year=2023,
            activations=41.0e6,
            url="https://example.org/models/cinder-l",
        ),
        power_w=240.0,
        base_ms=100.0,
        per_item_ms=20.0,
        speedup=5.0,
        oom_at=8,
    ),
)

DATASETS = ("val-main", "val-real", "val-shift")


def setup_for(runtime: str) -> InferenceSetup:
    return InferenceSetup(
        gpu_label=GPU_LABEL, runtime_label=runtime, tdp=TDP_W, peak_compute=PEAK_COMPUTE
    )


def sweep_t0(model_index: int, runtime_index: int) -> int:
    # one hour apart per sweep keeps the replay logs independent
    return DEMO_T0_NS + (model_index * len(RUNTIMES) + runtime_index) * 3_600_000_000_000


@dataclass(frozen=True)
class BatchSchedule:
    batch: int
    warmup_marks: tuple[int, ...]
    t_start: int  # measured-window origin = last warm-up mark
    marks: tuple[int, ...]


@dataclass(frozen=True)
class SweepSchedule:
    model_id: str
    runtime: str
    t0: int
    batches: tuple[BatchSchedule, ...]
    t_end: int


def _warmup_count(latency_ns: int, cfg: SweepConfig) -> int:
    # reps >= warmup_min_reps AND span between first/last marks >= runtime
    span_ns = round(cfg.warmup_min_runtime * 1e9)
    by_time = -(-span_ns // latency_ns) + 1  # ceil division
    return max(cfg.warmup_min_reps, by_time)


def _measured_count(latency_ns: int, cfg: SweepConfig) -> int:
    # reps > min_reps AND elapsed > min_runtime, both strict
    runtime_ns = round(cfg.min_runtime * 1e9)
    by_time = runtime_ns // latency_ns + 1
    return max(cfg.min_reps + 1, by_time)


def expected_schedule(model: DemoModel, runtime: str, t0: int) -> SweepSchedule:
    """Replay of the harness decision procedure on the exact virtual clock."""
    cfg = DEMO_SWEEP
    t = t0
    batches = []
    batch = cfg.start_batch
    while cfg.max_batch is None or batch <= cfg.max_batch:
        if model.oom_at and batch >= model.oom_at:
            break
        latency = model.latency_ns(runtime, batch)
        warmup_marks = []
        for _ in range(_warmup_count(latency, cfg)):
            t += latency
            warmup_marks.append(t)
        t_start = t
        marks = []
        for _ in range(_measured_count(latency, cfg)):
            t += latency
            marks.append(t)
        batches.append(
            BatchSchedule(
                batch=batch,
                warmup_marks=tuple(warmup_marks),
                t_start=t_start,
                marks=tuple(marks),
            )
        )
        batch *= 2
    return SweepSchedule(
        model_id=model.record.model_id,
        runtime=runtime,
        t0=t0,
        batches=tuple(batches),
        t_end=t,
    )


def expected_metrics(model: DemoModel, runtime: str, batch: int) -> dict:
    """Closed-form ground truth for one measured run."""
    latency_ns = model.latency_ns(runtime, batch)
    n = _measured_count(latency_ns, DEMO_SWEEP)
    wall_s = n * latency_ns * 1e-9
    latency_s = latency_ns * 1e-9
    return {
        "reps": n,
        "wall_time": wall_s,
        "energy_per_image": model.power_w * latency_s / batch,
        "throughput": batch / latency_s,
        "latency": latency_s,
        "avg_power": model.power_w,
        "images_processed": n * batch,
    }


def feasible_batches(model: DemoModel) -> list[int]:
    out = []
    batch = DEMO_SWEEP.start_batch
    while batch <= (DEMO_SWEEP.max_batch or batch):
        if model.oom_at and batch >= model.oom_at:
            break
        out.append(batch)
        batch *= 2
    return out


def simulator_command(model: DemoModel, runtime: str, t0: int) -> str:
    base_ms, per_item_ms = model.latency_args(runtime)
    parts = [
        sys.executable,
        "-m",
        "enerprof.simulator",
        f"--latency-base-ms {base_ms}",
        f"--latency-per-item-ms {per_item_ms}",
        f"--t0-ns {t0}",
    ]
    if model.oom_at:
        parts.append(f"--oom-at {model.oom_at}")
    return " ".join(parts)


def replay_log_name(model: DemoModel, runtime: str) -> str:
    return f"{model.record.model_id}__{runtime}.log"


def write_replay_log(path: Path, model: DemoModel, runtime: str, t0: int) -> None:
    """Constant-power sensor log covering the whole sweep, margins included."""
    schedule = expected_schedule(model, runtime, t0)
    start = t0 - LOG_MARGIN_NS
    end = schedule.t_end + LOG_MARGIN_NS
    samples = [
        PowerSample(
            t=t,
            power=model.power_w,
            util=95.0,
            mem_used=2048.0 + 512.0 * math.log2(max(model.record.params / 1e6, 1.0)),
            temp=61.0,
        )
        for t in range(start, end + 1, SAMPLE_PERIOD_NS)
    ]
    path.write_text(serialize_samples(samples), encoding="utf-8")


def metadata_csv() -> str:
    header = "model_id,family,year,params,flops,activations,input_size,url," + ",".join(
        DATASETS
    )
    lines = [header]
    for m in DEMO_MODELS:
        r = m.record
        accs = ",".join(str(r.accuracies[d]) for d in DATASETS)
        lines.append(
            f"{r.model_id},{r.family.value},{r.pub_year},{r.params},{r.flops},"
            f"{r.activations},{r.input_size},{r.url},{accs}"
        )
    return "\n".join(lines) + "\n"


def write_inputs(dest: Path) -> dict:
    """Write the scenario inputs (metadata table + replay power logs)."""
    dest = Path(dest)
    (dest / "replay").mkdir(parents=True, exist_ok=True)
    (dest / "metadata.csv").write_text(metadata_csv(), encoding="utf-8")
    logs = {}
    for mi, model in enumerate(DEMO_MODELS):
        for ri, runtime in enumerate(RUNTIMES):
            t0 = sweep_t0(mi, ri)
            path = dest / "replay" / replay_log_name(model, runtime)
            write_replay_log(path, model, runtime, t0)
            logs[(model.record.model_id, runtime)] = path
    return {"metadata": dest / "metadata.csv", "logs": logs}


def measure_args(model: DemoModel, runtime: str, log_path: Path, store: Path) -> list[str]:
    t0 = sweep_t0(
        [m.record.model_id for m in DEMO_MODELS].index(model.record.model_id),
        RUNTIMES.index(runtime),
    )
    return [
        "measure",
        "--workload", simulator_command(model, runtime, t0),
        "--model-id", model.record.model_id,
        "--gpu-label", GPU_LABEL,
        "--runtime-label", runtime,
        "--tdp", str(TDP_W),
        "--peak-compute", str(PEAK_COMPUTE),
        "--start-batch", str(DEMO_SWEEP.start_batch),
        "--max-batch", str(DEMO_SWEEP.max_batch),
        "--min-reps", str(DEMO_SWEEP.min_reps),
        "--min-runtime-s", str(DEMO_SWEEP.min_runtime),
        "--warmup-reps", str(DEMO_SWEEP.warmup_min_reps),
        "--warmup-runtime-s", str(DEMO_SWEEP.warmup_min_runtime),
        "--sampler", "replay",
        "--sampler-spec", str(log_path),
        "--rate", str(SAMPLE_RATE_HZ),
        "--clock", "workload",
        "--out", str(store),
    ]


def run_pipeline(inputs_dir: Path, out_dir: Path) -> dict:
    """Drive the whole scenario through the CLI: measure each (model,
    runtime) sweep, verify replays, analyze, score, export the bundle."""
    from . import cli  # deferred so importing demo stays lightweight

    inputs_dir = Path(inputs_dir)
    out_dir = Path(out_dir)
    out_dir.mkdir(parents=True, exist_ok=True)
    store = out_dir / "store"
    report = out_dir / "report"
    bundle = out_dir / "bundle.json"
    metadata = inputs_dir / "metadata.csv"

    def run(argv):
        rc = cli.dispatch(argv)
        if rc != 0:
            raise RuntimeError(f"pipeline step failed ({rc}): {argv[0]}")

    for model in DEMO_MODELS:
        for runtime in RUNTIMES:
            log = inputs_dir / "replay" / replay_log_name(model, runtime)
            run(measure_args(model, runtime, log, store))
    run(["replay", "--store", str(store), "--all"])
    run(
        [
            "analyze",
            "--in", str(store),
            "--metadata", str(metadata),
            "--report", str(report),
            "--pareto",
            "--yearly",
            "--correlations",
            "--naive-vs-measured",
            "--paired", f"{GPU_LABEL}/eager", f"{GPU_LABEL}/graph",
        ]
    )
    run(
        [
            "score",
            "--in", str(store),
            "--metadata", str(metadata),
            "--setup", f"{GPU_LABEL}/graph",
            "--metric", "manhattan",
            "--weight", "0.5",
            "--format", "json-lines",
        ]
    )
    run(["export", "--in", str(store), "--metadata", str(metadata), "--out", str(bundle)])
    return {"store": store, "report": report, "bundle": bundle, "metadata": metadata}


# --------------------------------------------------------------------------
# synthetic accuracy-vs-energy frontier with steeply diminishing returns


FRONTIER_C1 = 9.5
FRONTIER_C2 = 4.65
FRONTIER_C3 = 68.5
FRONTIER_E_RANGE = (0.01, 100.0)  # joules per image, four decades


def frontier_curve(energy: float) -> float:
    return FRONTIER_C1 * math.log(math.log(energy) + FRONTIER_C2) + FRONTIER_C3


def frontier_points(n: int = 25, noise: float = 0.02, seed: int = 12345):
    """Deterministic frontier samples: accuracy climbs from ~39% to ~90%
    across four decades of energy with steeply diminishing returns."""
    rng = np.random.default_rng(seed)
    energies = np.geomspace(*FRONTIER_E_RANGE, n)
    points = []
    for e in energies:
        a = frontier_curve(float(e)) + float(rng.normal(0.0, noise))
        points.append((float(e), a))
    return points
