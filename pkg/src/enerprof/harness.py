"""Workload orchestration: warm-up, measured runs, and batch-size sweeps.

The harness drives any inference process through a line-oriented protocol:

    child -> harness:  READY | BATCH_END <t_ns> | OOM | FATAL <message> | DONE
    harness -> child:  CONFIG <batch_size> | EXEC | STOP

Execution is synchronous: one EXEC, wait for its BATCH_END, then decide.
A measured run stops at the first batch where BOTH thresholds are exceeded
strictly: repetitions > min_reps and elapsed > min_runtime.
"""

from __future__ import annotations

import fcntl
import os
import queue
import shlex
import subprocess
import threading
import time
from collections import deque
from contextlib import contextmanager
from dataclasses import dataclass, replace
from enum import Enum
from pathlib import Path
from typing import Optional, Protocol, Union

from . import telemetry
from .energy import TDP_ANOMALY_RATIO, derive_metrics, tdp_headroom
from .errors import HarnessError, TelemetryError, WorkloadFailure, WorkloadOutOfMemory
from .telemetry import SamplerConfig, start_sampler, stop_sampler
from .types import InferenceSetup, QualityFlag, RunMeasurement

DEFAULT_EVENT_TIMEOUT_S = 300.0
READY_TIMEOUT_S = 60.0

CLOCK_HOST = "host"
CLOCK_WORKLOAD = "workload"


class EventKind(Enum):
    READY = "READY"
    BATCH_END = "BATCH_END"
    OOM = "OOM"
    FATAL = "FATAL"
    DONE = "DONE"


@dataclass(frozen=True)
class WorkloadEvent:
    kind: EventKind
    t: Optional[int] = None
    message: Optional[str] = None


def parse_event(line: str) -> WorkloadEvent:
    parts = line.strip().split(maxsplit=1)
    if not parts:
        raise HarnessError("empty protocol line")
    head = parts[0]
    rest = parts[1] if len(parts) > 1 else None
    if head == "BATCH_END":
        if rest is None:
            raise HarnessError("BATCH_END without timestamp")
        return WorkloadEvent(EventKind.BATCH_END, t=int(rest))
    if head == "FATAL":
        return WorkloadEvent(EventKind.FATAL, message=rest or "")
    try:
        kind = EventKind(head)
    except ValueError as exc:
        raise HarnessError(f"unknown protocol line: {line!r}") from exc
    return WorkloadEvent(kind)


@dataclass(frozen=True)
class SweepConfig:
    """Sweep and stopping parameters. min_reps/min_runtime are exclusive
    thresholds: a run continues until reps > min_reps AND elapsed > min_runtime."""

    start_batch: int = 1
    max_batch: Optional[int] = None
    min_reps: int = 13
    min_runtime: float = 10.0  # seconds
    warmup_min_reps: int = 3
    warmup_min_runtime: float = 2.0  # seconds

    def __post_init__(self):
        if self.start_batch < 1:
            raise HarnessError("start_batch must be >= 1")
        if self.min_reps < 1:
            raise HarnessError("min_reps must be >= 1")
        if self.min_runtime <= 0:
            raise HarnessError("min_runtime must be positive")


class WorkloadLike(Protocol):
    def handshake(self) -> None: ...
    def send(self, command: str) -> None: ...
    def recv(self, timeout: Optional[float] = None) -> WorkloadEvent: ...
    def now(self) -> Optional[int]: ...
    def close(self) -> None: ...


class ProcessWorkload:
    """Workload running as a child process speaking the protocol on stdio.

    ``clock`` selects the reference used to stamp measured-window origins:
    "host" reads time.time_ns(); "workload" follows the latest
    workload-reported timestamp, which keeps replay-driven runs on the
    workload's own timeline.
    """

    def __init__(self, command: str, clock: str = CLOCK_HOST):
        if clock not in (CLOCK_HOST, CLOCK_WORKLOAD):
            raise HarnessError(f"unknown clock mode {clock!r}")
        self.clock = clock
        self._last_t: Optional[int] = None
        self._events: "queue.Queue[Optional[WorkloadEvent]]" = queue.Queue()
        try:
            self._proc = subprocess.Popen(
                shlex.split(command),
                stdin=subprocess.PIPE,
                stdout=subprocess.PIPE,
                stderr=subprocess.DEVNULL,
                text=True,
            )
        except OSError as exc:
            raise HarnessError(f"cannot spawn workload: {exc}") from exc
        self._reader = threading.Thread(target=self._read_loop, daemon=True)
        self._reader.start()

    def _read_loop(self):
        assert self._proc.stdout is not None
        for line in self._proc.stdout:
            if not line.strip():
                continue
            try:
                event = parse_event(line)
            except HarnessError:
                continue  # stray output on stdout is ignored
            self._events.put(event)
        self._events.put(None)  # EOF sentinel

    def handshake(self, timeout: float = READY_TIMEOUT_S) -> None:
        event = self.recv(timeout)
        if event.kind is not EventKind.READY:
            raise HarnessError(f"expected READY, got {event.kind.value}")

    def send(self, command: str) -> None:
        if self._proc.stdin is None or self._proc.poll() is not None:
            raise WorkloadFailure("workload process is gone")
        try:
            self._proc.stdin.write(command + "\n")
            self._proc.stdin.flush()
        except (BrokenPipeError, ValueError) as exc:
            raise WorkloadFailure(f"workload pipe closed: {exc}") from exc

    def recv(self, timeout: Optional[float] = None) -> WorkloadEvent:
        try:
            event = self._events.get(timeout=timeout or DEFAULT_EVENT_TIMEOUT_S)
        except queue.Empty as exc:
            raise WorkloadFailure("timed out waiting for workload event") from exc
        if event is None:
            raise WorkloadFailure("workload terminated unexpectedly")
        if event.t is not None:
            self._last_t = event.t
        return event

    def now(self) -> Optional[int]:
        if self.clock == CLOCK_HOST:
            return time.time_ns()
        return self._last_t

    def close(self) -> None:
        if self._proc.poll() is None:
            try:
                self._proc.stdin.close()  # type: ignore[union-attr]
            except OSError:
                pass
            self._proc.terminate()
        try:
            self._proc.wait(timeout=5)
        except subprocess.TimeoutExpired:
            self._proc.kill()
            self._proc.wait()


class SimulatedWorkload:
    """In-process workload with an exact virtual clock, for tests.

    Batch latency is ``base_s + per_item_s * batch_size`` (a constant rate is
    the per_item_s == 0 case). OOM is raised for batch sizes >= oom_at.
    """

    def __init__(
        self,
        rate: Optional[float] = None,
        base_s: float = 0.0,
        per_item_s: float = 0.0,
        oom_at: Optional[int] = None,
        fatal_on_exec: Optional[int] = None,
        t0_ns: int = telemetry.SYNTHETIC_T0_NS,
    ):
        if rate is not None:
            base_s = 1.0 / rate
            per_item_s = 0.0
        self.base_ns = round(base_s * 1e9)
        self.per_item_ns = round(per_item_s * 1e9)
        self.oom_at = oom_at
        self.fatal_on_exec = fatal_on_exec
        self.t = t0_ns
        self.batch_size = 1
        self.execs = 0
        self._events: deque[WorkloadEvent] = deque([WorkloadEvent(EventKind.READY)])

    def handshake(self) -> None:
        event = self.recv()
        if event.kind is not EventKind.READY:
            raise HarnessError(f"expected READY, got {event.kind.value}")

    def send(self, command: str) -> None:
        parts = command.strip().split()
        if parts[0] == "CONFIG":
            self.batch_size = int(parts[1])
        elif parts[0] == "EXEC":
            self.execs += 1
            if self.fatal_on_exec is not None and self.execs >= self.fatal_on_exec:
                self._events.append(WorkloadEvent(EventKind.FATAL, message="simulated crash"))
            elif self.oom_at is not None and self.batch_size >= self.oom_at:
                self._events.append(WorkloadEvent(EventKind.OOM))
            else:
                self.t += self.base_ns + self.per_item_ns * self.batch_size
                self._events.append(WorkloadEvent(EventKind.BATCH_END, t=self.t))
        elif parts[0] == "STOP":
            self._events.append(WorkloadEvent(EventKind.DONE))
        else:
            raise HarnessError(f"unknown command {command!r}")

    def recv(self, timeout: Optional[float] = None) -> WorkloadEvent:
        if not self._events:
            raise WorkloadFailure("no pending workload event")
        return self._events.popleft()

    def now(self) -> Optional[int]:
        return self.t

    def close(self) -> None:
        pass


def run_warmup(workload: WorkloadLike, batch_size: int, cfg: SweepConfig) -> bool:
    """Discarded run absorbing allocation and thermal transients.

    Executes until at least warmup_min_reps batches AND warmup_min_runtime
    seconds (span between first and last completion) have passed. Returns
    False when the batch size OOMs, True when feasible.
    """
    workload.send(f"CONFIG {batch_size}")
    runtime_ns = round(cfg.warmup_min_runtime * 1e9)
    reps = 0
    first_t: Optional[int] = None
    last_t = 0
    while True:
        workload.send("EXEC")
        event = workload.recv()
        if event.kind is EventKind.OOM:
            return False
        if event.kind is EventKind.FATAL:
            raise WorkloadFailure(f"workload failed during warm-up: {event.message}")
        if event.kind is not EventKind.BATCH_END:
            raise HarnessError(f"unexpected {event.kind.value} during warm-up")
        reps += 1
        if first_t is None:
            first_t = event.t
        last_t = event.t
        if reps >= cfg.warmup_min_reps and (last_t - first_t) >= runtime_ns:
            return True


def run_measured(
    workload: WorkloadLike,
    batch_size: int,
    cfg: SweepConfig,
    sampler_cfg: SamplerConfig,
    model_id: str,
    setup: InferenceSetup,
) -> RunMeasurement:
    """Measured run: batches execute until reps > min_reps AND elapsed >
    min_runtime, with telemetry sampled concurrently.

    The resulting RunMeasurement holds the batch marks and every sample whose
    timestamp lies in [t_start, last mark], with metrics derived from exactly
    those, and quality flags for sampler gaps or above-TDP power.
    """
    try:
        sampler = start_sampler(sampler_cfg)
    except TelemetryError as exc:
        raise TelemetryError(f"sampler failed to start: {exc}") from exc

    try:
        workload.send(f"CONFIG {batch_size}")
        t_start = workload.now()
        if t_start is None:
            raise HarnessError(
                "workload clock has no reference yet; run a warm-up first"
            )
        runtime_ns = round(cfg.min_runtime * 1e9)
        marks: list[int] = []
        while True:
            workload.send("EXEC")
            event = workload.recv()
            if event.kind is EventKind.OOM:
                raise WorkloadOutOfMemory(f"batch size {batch_size} exceeds memory")
            if event.kind is EventKind.FATAL:
                raise WorkloadFailure(f"workload failed: {event.message}")
            if event.kind is not EventKind.BATCH_END:
                raise HarnessError(f"unexpected {event.kind.value} during measured run")
            if marks and event.t <= marks[-1]:
                raise HarnessError("batch marks not strictly increasing")
            marks.append(event.t)
            if len(marks) > cfg.min_reps and (marks[-1] - t_start) > runtime_ns:
                break
    except BaseException:
        try:
            stop_sampler(sampler)
        except TelemetryError:
            pass
        raise

    samples, gaps = stop_sampler(sampler)
    t_end = marks[-1]
    windowed = tuple(s for s in samples if t_start <= s.t <= t_end)
    flags = set()
    if any(g.t_after >= t_start and g.t_before <= t_end for g in gaps):
        flags.add(QualityFlag.SAMPLER_GAP)
    run = RunMeasurement(
        model_id=model_id,
        setup=setup,
        batch_size=batch_size,
        t_start=t_start,
        batch_marks=tuple(marks),
        samples=windowed,
    )
    metrics = derive_metrics(run)
    if tdp_headroom(metrics, setup).anomalous:
        flags.add(QualityFlag.TDP_ANOMALY)
    return replace(run, metrics=metrics, quality_flags=frozenset(flags))


@dataclass(frozen=True)
class SweepResult:
    runs: tuple[RunMeasurement, ...]
    largest_feasible: int


def run_sweep(
    workload: Union[str, WorkloadLike],
    setup: InferenceSetup,
    cfg: SweepConfig,
    sampler_cfg: SamplerConfig,
    model_id: str,
    clock: str = CLOCK_HOST,
) -> SweepResult:
    """Doubling batch-size sweep: warm-up + measured run per size, stopping
    at OOM or the configured cap.

    ``workload`` is a command line (spawned here) or an existing handle.
    """
    owns = isinstance(workload, str)
    handle: WorkloadLike = ProcessWorkload(workload, clock=clock) if owns else workload
    runs: list[RunMeasurement] = []
    try:
        handle.handshake()
        batch = cfg.start_batch
        while cfg.max_batch is None or batch <= cfg.max_batch:
            if not run_warmup(handle, batch, cfg):
                break  # infeasible size; larger ones cannot fit either
            try:
                run = run_measured(handle, batch, cfg, sampler_cfg, model_id, setup)
            except WorkloadOutOfMemory:
                break
            runs.append(run)
            batch *= 2
        _graceful_stop(handle)
    finally:
        if owns:
            handle.close()
    if not runs:
        raise HarnessError("model does not fit: no feasible batch size")
    return SweepResult(runs=tuple(runs), largest_feasible=runs[-1].batch_size)


def _graceful_stop(handle: WorkloadLike) -> None:
    try:
        handle.send("STOP")
        for _ in range(16):
            if handle.recv(timeout=5).kind is EventKind.DONE:
                return
    except (HarnessError, WorkloadFailure):
        pass


def state_dir() -> Path:
    """Directory for lock files; ENERPROF_STATE_DIR overrides the default."""
    root = os.environ.get("ENERPROF_STATE_DIR")
    if root:
        return Path(root)
    return Path.home() / ".enerprof"


@contextmanager
def gpu_lock(gpu_label: str, directory: Optional[Path] = None):
    """Exclusive per-GPU lock so concurrent sweeps cannot share a device."""
    directory = directory or state_dir()
    directory.mkdir(parents=True, exist_ok=True)
    path = directory / f"{gpu_label}.lock"
    fh = open(path, "w")
    try:
        try:
            fcntl.flock(fh, fcntl.LOCK_EX | fcntl.LOCK_NB)
        except OSError as exc:
            raise HarnessError(
                f"gpu {gpu_label!r} is locked by another sweep ({path})"
            ) from exc
        fh.write(str(os.getpid()))
        fh.flush()
        yield path
    finally:
        try:
            fcntl.flock(fh, fcntl.LOCK_UN)
        except OSError:
            pass
        fh.close()
