"""Power-telemetry sources: sensor-log parsing, live logging, replay, synthetic.

All sources produce ordered :class:`PowerSample` streams through the same
start/stop handle, so the replay path is bit-identical to the live path.

Sensor log line format::

    YYYY/MM/DD HH:MM:SS.mmm, <float> W, <int> %, <int> MiB, <int>

with the utilization / memory / temperature fields optional (trailing).
Timestamps are UTC. The parser additionally accepts 1-9 fractional-second
digits so nanosecond-precision sidecar logs round-trip losslessly; the
serializer emits the standard 3 digits whenever a timestamp is ms-aligned.
"""

from __future__ import annotations

import calendar
import re
import shlex
import subprocess
import threading
import time
from dataclasses import dataclass, field
from typing import Optional, Sequence

from .errors import TelemetryError
from .types import PowerSample

DEFAULT_RATE_HZ = 100.0
GAP_FACTOR = 5.0  # inter-sample interval beyond this multiple of the period is flagged

SOURCE_LIVE = "live-command"
SOURCE_REPLAY = "replay-file"
SOURCE_SYNTHETIC = "synthetic"

# Fixed epoch for synthetic streams so generated fixtures are deterministic.
SYNTHETIC_T0_NS = 1_600_000_000_000_000_000

_LINE_RE = re.compile(
    r"^(?P<date>\d{4}/\d{2}/\d{2}) (?P<time>\d{2}:\d{2}:\d{2})\.(?P<frac>\d{1,9})$"
)


def _parse_timestamp(text: str) -> int:
    m = _LINE_RE.match(text.strip())
    if not m:
        raise ValueError(f"bad timestamp: {text!r}")
    date = m.group("date")
    clock = m.group("time")
    y, mo, d = (int(p) for p in date.split("/"))
    h, mi, s = (int(p) for p in clock.split(":"))
    seconds = calendar.timegm((y, mo, d, h, mi, s, 0, 0, 0))
    frac_ns = int(m.group("frac").ljust(9, "0"))
    return seconds * 1_000_000_000 + frac_ns


def _format_timestamp(t_ns: int) -> str:
    seconds, frac_ns = divmod(t_ns, 1_000_000_000)
    stamp = time.strftime("%Y/%m/%d %H:%M:%S", time.gmtime(seconds))
    if frac_ns % 1_000_000 == 0:
        return f"{stamp}.{frac_ns // 1_000_000:03d}"
    return f"{stamp}.{frac_ns:09d}"


def _strip_unit(token: str, unit: str) -> float:
    token = token.strip()
    if token.endswith(unit):
        token = token[: -len(unit)].strip()
    return float(token)


def _format_number(value: float) -> str:
    if value == int(value):
        return str(int(value))
    return repr(value)


def parse_sensor_line(line: str) -> PowerSample:
    """Parse one sensor-log line; raises ValueError on any malformed field."""
    parts = [p.strip() for p in line.split(",")]
    if len(parts) < 2:
        raise ValueError("need at least timestamp and power")
    t = _parse_timestamp(parts[0])
    power = _strip_unit(parts[1], "W")
    if power < 0:
        raise ValueError("negative power")
    util = _strip_unit(parts[2], "%") if len(parts) > 2 and parts[2] else None
    mem = _strip_unit(parts[3], "MiB") if len(parts) > 3 and parts[3] else None
    temp = _strip_unit(parts[4], "C") if len(parts) > 4 and parts[4] else None
    return PowerSample(t=t, power=power, util=util, mem_used=mem, temp=temp)


@dataclass
class SensorLogParse:
    samples: list[PowerSample]
    malformed: int


def parse_sensor_log(text: str) -> SensorLogParse:
    """Parse a sensor log, keeping input order.

    Malformed lines are skipped and counted; blank lines are ignored. If no
    line parses, the log is unusable and a TelemetryError is raised.
    """
    samples: list[PowerSample] = []
    malformed = 0
    for line in text.splitlines():
        if not line.strip():
            continue
        try:
            samples.append(parse_sensor_line(line))
        except ValueError:
            malformed += 1
    if not samples:
        raise TelemetryError("no samples in sensor log")
    return SensorLogParse(samples=samples, malformed=malformed)


def serialize_sample(sample: PowerSample) -> str:
    parts = [_format_timestamp(sample.t), f"{_format_number(sample.power)} W"]
    if sample.util is not None:
        parts.append(f"{_format_number(sample.util)} %")
        if sample.mem_used is not None:
            parts.append(f"{_format_number(sample.mem_used)} MiB")
            if sample.temp is not None:
                parts.append(f"{_format_number(sample.temp)}")
    return ", ".join(parts)


def serialize_samples(samples: Sequence[PowerSample]) -> str:
    return "".join(serialize_sample(s) + "\n" for s in samples)


@dataclass(frozen=True)
class ProfileSegment:
    duration_s: float
    start_power: float
    end_power: Optional[float] = None  # None means constant

    def power_at(self, offset_s: float) -> float:
        if self.end_power is None or self.end_power == self.start_power:
            return self.start_power
        frac = offset_s / self.duration_s
        return self.start_power + (self.end_power - self.start_power) * frac


@dataclass(frozen=True)
class SyntheticProfile:
    """Piecewise power profile used as a deterministic test oracle source."""

    segments: tuple[ProfileSegment, ...]
    t0_ns: int = SYNTHETIC_T0_NS

    def __post_init__(self):
        if not self.segments:
            raise TelemetryError("profile needs at least one segment")
        for seg in self.segments:
            if seg.duration_s <= 0:
                raise TelemetryError("segment duration must be positive")
            if seg.start_power < 0 or (seg.end_power is not None and seg.end_power < 0):
                raise TelemetryError("segment power must be nonnegative")

    @classmethod
    def constant(cls, duration_s: float, power: float, t0_ns: int = SYNTHETIC_T0_NS):
        return cls((ProfileSegment(duration_s, power),), t0_ns)

    @classmethod
    def ramp(cls, start_w: float, end_w: float, duration_s: float, t0_ns: int = SYNTHETIC_T0_NS):
        return cls((ProfileSegment(duration_s, start_w, end_w),), t0_ns)

    @classmethod
    def from_pairs(cls, pairs: Sequence[tuple[float, float]], t0_ns: int = SYNTHETIC_T0_NS):
        return cls(tuple(ProfileSegment(d, p) for d, p in pairs), t0_ns)

    @property
    def total_duration(self) -> float:
        return sum(seg.duration_s for seg in self.segments)

    def power_at(self, elapsed_s: float) -> float:
        offset = elapsed_s
        for seg in self.segments:
            if offset <= seg.duration_s:
                return seg.power_at(offset)
            offset -= seg.duration_s
        return self.segments[-1].power_at(self.segments[-1].duration_s)


@dataclass(frozen=True)
class SamplerConfig:
    """How to obtain a PowerSample stream.

    ``source_spec`` depends on the source: a command template for
    live-command (``{interval_ms}`` is substituted from ``rate``), a file
    path for replay-file, a :class:`SyntheticProfile` for synthetic.
    """

    rate: float = DEFAULT_RATE_HZ
    source: str = SOURCE_SYNTHETIC
    source_spec: object = None

    def __post_init__(self):
        if self.rate <= 0:
            raise TelemetryError("sampler rate must be positive")
        if self.source not in (SOURCE_LIVE, SOURCE_REPLAY, SOURCE_SYNTHETIC):
            raise TelemetryError(f"unknown sampler source {self.source!r}")


@dataclass(frozen=True)
class SampleGap:
    t_before: int
    t_after: int
    width_s: float


def find_gaps(samples: Sequence[PowerSample], rate: float) -> list[SampleGap]:
    """Flag inter-sample intervals wider than GAP_FACTOR times the period."""
    threshold_s = GAP_FACTOR / rate
    gaps = []
    for prev, cur in zip(samples, samples[1:]):
        width = (cur.t - prev.t) / 1e9
        if width > threshold_s:
            gaps.append(SampleGap(prev.t, cur.t, width))
    return gaps


class SamplerHandle:
    """Accumulates samples from start until stop; stop is one-shot."""

    def __init__(self, config: SamplerConfig):
        self.config = config
        self._samples: list[PowerSample] = []
        self._stopped = False

    def _collect(self) -> list[PowerSample]:
        return self._samples

    def stop(self) -> tuple[list[PowerSample], list[SampleGap]]:
        if self._stopped:
            raise TelemetryError("sampler already stopped")
        self._stopped = True
        samples = sorted(self._collect(), key=lambda s: s.t)
        return samples, find_gaps(samples, self.config.rate)


class _SyntheticSampler(SamplerHandle):
    def __init__(self, config: SamplerConfig):
        super().__init__(config)
        profile = config.source_spec
        if not isinstance(profile, SyntheticProfile):
            raise TelemetryError("synthetic source needs a SyntheticProfile spec")
        n_ticks = int(profile.total_duration * config.rate + 1e-9)
        for k in range(n_ticks + 1):
            elapsed = k / config.rate
            t = profile.t0_ns + round(k * 1e9 / config.rate)
            self._samples.append(PowerSample(t=t, power=profile.power_at(elapsed)))


class _ReplaySampler(SamplerHandle):
    def __init__(self, config: SamplerConfig):
        super().__init__(config)
        path = config.source_spec
        try:
            with open(path, "r", encoding="utf-8") as fh:
                text = fh.read()
        except OSError as exc:
            raise TelemetryError(f"cannot open replay file {path}: {exc}") from exc
        self._samples = parse_sensor_log(text).samples


class _LiveSampler(SamplerHandle):
    """Spawns a vendor telemetry command in CSV-logging mode and parses it."""

    def __init__(self, config: SamplerConfig):
        super().__init__(config)
        template = config.source_spec
        if not template:
            raise TelemetryError("live source needs a command template")
        command = str(template).replace("{interval_ms}", str(int(round(1000 / config.rate))))
        try:
            self._proc = subprocess.Popen(
                shlex.split(command),
                stdout=subprocess.PIPE,
                stderr=subprocess.DEVNULL,
                text=True,
            )
        except OSError as exc:
            raise TelemetryError(f"cannot spawn telemetry command: {exc}") from exc
        self._lock = threading.Lock()
        self._thread = threading.Thread(target=self._reader, daemon=True)
        self._thread.start()

    def _reader(self):
        assert self._proc.stdout is not None
        for line in self._proc.stdout:
            if not line.strip():
                continue
            try:
                sample = parse_sensor_line(line)
            except ValueError:
                continue
            with self._lock:
                self._samples.append(sample)

    def _collect(self) -> list[PowerSample]:
        if self._proc.poll() is None:
            self._proc.terminate()
        try:
            self._proc.wait(timeout=5)
        except subprocess.TimeoutExpired:
            self._proc.kill()
            self._proc.wait()
        self._thread.join(timeout=5)
        with self._lock:
            return list(self._samples)


def start_sampler(config: SamplerConfig) -> SamplerHandle:
    """Start collecting samples from the configured source."""
    if config.source == SOURCE_SYNTHETIC:
        return _SyntheticSampler(config)
    if config.source == SOURCE_REPLAY:
        return _ReplaySampler(config)
    return _LiveSampler(config)


def stop_sampler(handle: SamplerHandle) -> tuple[list[PowerSample], list[SampleGap]]:
    """Stop the sampler, returning the full ordered stream and its gap report."""
    return handle.stop()
