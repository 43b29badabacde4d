"""Exception hierarchy for the toolkit."""


class EnerprofError(Exception):
    """Base class for all domain errors (CLI maps these to exit code 1)."""


class TelemetryError(EnerprofError):
    pass


class HarnessError(EnerprofError):
    pass


class WorkloadOutOfMemory(HarnessError):
    """The workload reported OOM for the current batch size."""


class WorkloadFailure(HarnessError):
    """The workload reported a fatal error or died unexpectedly."""


class EnergyError(EnerprofError):
    pass


class AnalysisError(EnerprofError):
    pass


class ScoringError(EnerprofError):
    pass


class DatastoreError(EnerprofError):
    pass
