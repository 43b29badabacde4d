"""Core domain types shared across all modules.

Every type here is an immutable value after construction. Invariants are
checked by :func:`validate`, which returns a report of violations instead of
raising, so ingestion paths can collect problems row by row.
"""

from __future__ import annotations

from dataclasses import dataclass
from enum import Enum
from typing import Mapping, Optional, Union


class ModelFamily(Enum):
    """Architecture category used to group models in plots and analyses."""

    MLP = "MLP"
    CNN = "CNN"
    TRANSFORMER = "Transformer"
    HYBRID = "Hybrid"
    OTHER = "Other"

    @classmethod
    def parse(cls, text: str) -> "ModelFamily":
        """Map free-form metadata text to a family, defaulting to OTHER."""
        normalized = str(text).strip().lower()
        aliases = {
            "mlp": cls.MLP,
            "cnn": cls.CNN,
            "convnet": cls.CNN,
            "transformer": cls.TRANSFORMER,
            "vit": cls.TRANSFORMER,
            "hybrid": cls.HYBRID,
            "cnn-transformer": cls.HYBRID,
        }
        return aliases.get(normalized, cls.OTHER)


class QualityFlag(Enum):
    """Non-fatal warnings attached to a run."""

    SAMPLER_GAP = "sampler-gap"
    TDP_ANOMALY = "tdp-anomaly"


@dataclass(frozen=True)
class PowerSample:
    """One telemetry reading. ``t`` is wall-clock nanoseconds since epoch."""

    t: int
    power: float  # watts
    util: Optional[float] = None  # percent
    mem_used: Optional[float] = None  # MiB
    temp: Optional[float] = None  # degrees C


@dataclass(frozen=True)
class InferenceSetup:
    """A (GPU, runtime) deployment configuration."""

    gpu_label: str
    runtime_label: str
    tdp: float  # watts
    peak_compute: Optional[float] = None  # FLOP/s, needed for naive estimates

    @property
    def setup_id(self) -> str:
        return f"{self.gpu_label}/{self.runtime_label}"


@dataclass(frozen=True)
class ModelRecord:
    """Model metadata plus per-dataset accuracies (percent).

    ``flops`` is stored verbatim as ingested (multiply-accumulate counts per
    forward pass, per the upstream profilers this column contract mirrors).
    """

    model_id: str
    family: ModelFamily
    params: float
    flops: float
    input_size: int  # pixels per side
    accuracies: Mapping[str, float]
    pub_year: Optional[int] = None
    activations: Optional[float] = None
    url: Optional[str] = None


@dataclass(frozen=True)
class EnergyMetrics:
    """Derived per-run efficiency numbers.

    Invariant: avg_power == energy_per_image * throughput (1e-6 relative),
    which is the Joules/Img x Imgs/s = Watt unit identity.
    """

    energy_per_image: float  # joules
    throughput: float  # images per second
    latency: float  # seconds per batch
    avg_power: float  # watts
    batch_size: int
    images_processed: int
    wall_time: float  # seconds


@dataclass(frozen=True)
class RunMeasurement:
    """One measured (model, setup, batch size) run.

    ``t_start`` is the measured-window origin (ns): the instant the first
    batch command was issued. The sample window is [t_start, batch_marks[-1]]
    and metrics are derived from exactly these samples and marks.
    """

    model_id: str
    setup: InferenceSetup
    batch_size: int
    t_start: int
    batch_marks: tuple[int, ...]
    samples: tuple[PowerSample, ...]
    metrics: Optional[EnergyMetrics] = None
    quality_flags: frozenset = frozenset()


@dataclass(frozen=True)
class ScoreParams:
    """Parameters of the efficiency scores."""

    weight: float  # W in [0, 1]; 1 = energy only, 0 = accuracy only
    norm: float  # N, joules > 0
    min_accuracy: float  # percent threshold for filtering


IDENTITY_RTOL = 1e-6

Validatable = Union[
    PowerSample, InferenceSetup, ModelRecord, EnergyMetrics, RunMeasurement, ScoreParams
]


def validate(obj: Validatable) -> list[str]:
    """Check every invariant of ``obj``; return one message per violation.

    An empty list means the value is well formed.
    """
    if isinstance(obj, PowerSample):
        return _validate_sample(obj)
    if isinstance(obj, InferenceSetup):
        return _validate_setup(obj)
    if isinstance(obj, ModelRecord):
        return _validate_model(obj)
    if isinstance(obj, EnergyMetrics):
        return _validate_metrics(obj)
    if isinstance(obj, RunMeasurement):
        return _validate_run(obj)
    if isinstance(obj, ScoreParams):
        return _validate_score_params(obj)
    raise TypeError(f"cannot validate {type(obj).__name__}")


def _validate_sample(s: PowerSample) -> list[str]:
    out = []
    if s.t <= 0:
        out.append("sample timestamp not strictly positive")
    if s.power < 0:
        out.append("power negative")
    return out


def _validate_setup(s: InferenceSetup) -> list[str]:
    out = []
    if s.tdp <= 0:
        out.append("tdp not positive")
    if s.peak_compute is not None and s.peak_compute <= 0:
        out.append("peak_compute not positive")
    return out


def _validate_model(m: ModelRecord) -> list[str]:
    out = []
    if m.params < 0:
        out.append("params negative")
    if m.flops < 0:
        out.append("flops negative")
    if m.input_size <= 0:
        out.append("input_size not positive")
    for dataset, acc in m.accuracies.items():
        if not 0 <= acc <= 100:
            out.append(f"accuracy out of [0,100] for {dataset}")
    return out


def _validate_metrics(m: EnergyMetrics) -> list[str]:
    out = []
    for name in ("energy_per_image", "throughput", "latency", "avg_power", "wall_time"):
        if getattr(m, name) < 0:
            out.append(f"{name} negative")
    if m.batch_size < 0 or m.images_processed < 0:
        out.append("counts negative")
    product = m.energy_per_image * m.throughput
    tol = IDENTITY_RTOL * max(abs(m.avg_power), abs(product))
    if abs(m.avg_power - product) > tol:
        out.append("avg_power != energy_per_image * throughput")
    if m.images_processed > 0 and m.wall_time <= 0:
        out.append("wall_time not positive despite processed images")
    return out


def _validate_run(r: RunMeasurement) -> list[str]:
    out = []
    if r.batch_size < 1:
        out.append("batch_size < 1")
    if any(b >= a for b, a in zip(r.batch_marks, r.batch_marks[1:])):
        out.append("marks not increasing")
    sample_ts = [s.t for s in r.samples]
    if any(b > a for b, a in zip(sample_ts, sample_ts[1:])):
        out.append("samples not ordered by t")
    for s in r.samples:
        out.extend(_validate_sample(s))
    out.extend(_validate_setup(r.setup))
    if r.metrics is not None:
        out.extend(_validate_metrics(r.metrics))
        if r.metrics.batch_size != r.batch_size:
            out.append("metrics batch_size mismatch")
        if r.metrics.images_processed != len(r.batch_marks) * r.batch_size:
            out.append("images_processed != marks * batch_size")
    return out


def _validate_score_params(p: ScoreParams) -> list[str]:
    out = []
    if not 0 <= p.weight <= 1:
        out.append("weight out of [0,1]")
    if p.norm <= 0:
        out.append("norm not positive")
    if not 0 <= p.min_accuracy <= 100:
        out.append("min_accuracy out of [0,100]")
    return out
