"""Inference energy profiling toolkit.

Measure the energy consumption of arbitrary inference workloads via
concurrent power-telemetry sampling and a batch-size sweep harness, then
analyze and score accuracy-vs-energy trade-offs.
"""

from .errors import (
    AnalysisError,
    DatastoreError,
    EnergyError,
    EnerprofError,
    HarnessError,
    ScoringError,
    TelemetryError,
    WorkloadFailure,
    WorkloadOutOfMemory,
)
from .types import (
    EnergyMetrics,
    InferenceSetup,
    ModelFamily,
    ModelRecord,
    PowerSample,
    QualityFlag,
    RunMeasurement,
    ScoreParams,
    validate,
)

__version__ = "0.1.0"
