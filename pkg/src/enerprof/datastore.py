"""Persistence: results store, metadata ingestion, explorer bundle export.

Results live in a store directory:

    <store>/results.ndjson    line-delimited: header record, then one record
                              per run (schema version "v1")
    <store>/samples/<id>.log  raw sample sidecar per run, sensor-log format

Record ids are unique per (model_id, setup, batch_size). The bundle is a
single versioned JSON document (sorted keys, fixed layout) so identical
inputs export byte-identical files.
"""

from __future__ import annotations

import csv
import io
import json
import re
from dataclasses import dataclass, field
from pathlib import Path
from typing import Mapping, Optional, Sequence

from .errors import DatastoreError
from .telemetry import parse_sensor_log, serialize_samples
from .types import (
    EnergyMetrics,
    InferenceSetup,
    ModelFamily,
    ModelRecord,
    PowerSample,
    QualityFlag,
    RunMeasurement,
    validate,
)

STORE_VERSION = "v1"
BUNDLE_VERSION = "v1"
RESULTS_FILE = "results.ndjson"
SAMPLES_DIR = "samples"

_MANDATORY_COLUMNS = (
    "model_id",
    "family",
    "year",
    "params",
    "flops",
    "activations",
    "input_size",
)
_RESERVED_COLUMNS = {"url"}


def _sanitize(token: str) -> str:
    return re.sub(r"[^A-Za-z0-9_.-]+", "-", token)


def record_id(model_id: str, setup: InferenceSetup, batch_size: int) -> str:
    return _sanitize(
        f"{model_id}__{setup.gpu_label}__{setup.runtime_label}__b{batch_size}"
    )


def _setup_to_json(setup: InferenceSetup) -> dict:
    return {
        "gpu_label": setup.gpu_label,
        "runtime_label": setup.runtime_label,
        "tdp": setup.tdp,
        "peak_compute": setup.peak_compute,
    }


def _setup_from_json(obj: dict) -> InferenceSetup:
    return InferenceSetup(
        gpu_label=obj["gpu_label"],
        runtime_label=obj["runtime_label"],
        tdp=obj["tdp"],
        peak_compute=obj.get("peak_compute"),
    )


def _metrics_to_json(m: EnergyMetrics) -> dict:
    return {
        "energy_per_image": m.energy_per_image,
        "throughput": m.throughput,
        "latency": m.latency,
        "avg_power": m.avg_power,
        "batch_size": m.batch_size,
        "images_processed": m.images_processed,
        "wall_time": m.wall_time,
    }


def _metrics_from_json(obj: dict) -> EnergyMetrics:
    return EnergyMetrics(**obj)


@dataclass
class StoredRun:
    """One persisted run; samples stay in the sidecar until requested."""

    record_id: str
    model_id: str
    setup: InferenceSetup
    batch_size: int
    t_start: int
    batch_marks: tuple[int, ...]
    metrics: Optional[EnergyMetrics]
    quality_flags: frozenset
    samples_file: str
    store_dir: Path
    idle_baseline_w: Optional[float] = None  # annotation only, never subtracted

    def load_samples(self) -> tuple[PowerSample, ...]:
        path = self.store_dir / self.samples_file
        try:
            text = path.read_text(encoding="utf-8")
        except OSError as exc:
            raise DatastoreError(f"missing sample sidecar {path}: {exc}") from exc
        return tuple(parse_sensor_log(text).samples)

    def to_run(self) -> RunMeasurement:
        return RunMeasurement(
            model_id=self.model_id,
            setup=self.setup,
            batch_size=self.batch_size,
            t_start=self.t_start,
            batch_marks=self.batch_marks,
            samples=self.load_samples(),
            metrics=self.metrics,
            quality_flags=self.quality_flags,
        )


def _results_path(store_dir: Path) -> Path:
    return Path(store_dir) / RESULTS_FILE


def _read_lines(store_dir: Path) -> list[dict]:
    path = _results_path(store_dir)
    try:
        raw = path.read_text(encoding="utf-8")
    except OSError as exc:
        raise DatastoreError(f"cannot read store {path}: {exc}") from exc
    records = []
    for i, line in enumerate(raw.splitlines(), start=1):
        if not line.strip():
            continue
        try:
            records.append(json.loads(line))
        except json.JSONDecodeError as exc:
            raise DatastoreError(f"corrupt store line {i}: {exc}") from exc
    if not records:
        raise DatastoreError("empty results store")
    header = records[0]
    if header.get("format") != "enerprof-results":
        raise DatastoreError("not a results store (missing format header)")
    if header.get("version") != STORE_VERSION:
        raise DatastoreError(
            f"unsupported store version {header.get('version')!r}, expected {STORE_VERSION!r}"
        )
    return records


def save_run(
    run: RunMeasurement,
    store_dir: Path,
    idle_baseline_w: Optional[float] = None,
) -> str:
    """Append a run (and its raw-sample sidecar) to the store; returns the
    record id. Duplicate (model, setup, batch) keys are rejected."""
    problems = validate(run)
    if problems:
        raise DatastoreError(f"refusing to store invalid run: {problems}")
    if run.metrics is None:
        raise DatastoreError("run has no derived metrics")
    store_dir = Path(store_dir)
    store_dir.mkdir(parents=True, exist_ok=True)
    (store_dir / SAMPLES_DIR).mkdir(exist_ok=True)
    path = _results_path(store_dir)
    if path.exists():
        existing = {rec["id"] for rec in _read_lines(store_dir)[1:]}
    else:
        header = {"format": "enerprof-results", "version": STORE_VERSION}
        path.write_text(json.dumps(header, sort_keys=True) + "\n", encoding="utf-8")
        existing = set()
    rid = record_id(run.model_id, run.setup, run.batch_size)
    if rid in existing:
        raise DatastoreError(f"duplicate record {rid}")
    samples_file = f"{SAMPLES_DIR}/{rid}.log"
    (store_dir / samples_file).write_text(
        serialize_samples(run.samples), encoding="utf-8"
    )
    record = {
        "id": rid,
        "model_id": run.model_id,
        "setup": _setup_to_json(run.setup),
        "batch_size": run.batch_size,
        "t_start": run.t_start,
        "batch_marks": list(run.batch_marks),
        "metrics": _metrics_to_json(run.metrics),
        "quality_flags": sorted(f.value for f in run.quality_flags),
        "samples_file": samples_file,
    }
    if idle_baseline_w is not None:
        record["idle_baseline_w"] = idle_baseline_w
    with open(path, "a", encoding="utf-8") as fh:
        fh.write(json.dumps(record, sort_keys=True) + "\n")
    return rid


def load_store(store_dir: Path) -> list[StoredRun]:
    """All stored runs (without sidecar samples loaded)."""
    store_dir = Path(store_dir)
    out = []
    for rec in _read_lines(store_dir)[1:]:
        out.append(
            StoredRun(
                record_id=rec["id"],
                model_id=rec["model_id"],
                setup=_setup_from_json(rec["setup"]),
                batch_size=rec["batch_size"],
                t_start=rec["t_start"],
                batch_marks=tuple(rec["batch_marks"]),
                metrics=_metrics_from_json(rec["metrics"]) if rec.get("metrics") else None,
                quality_flags=frozenset(QualityFlag(v) for v in rec.get("quality_flags", [])),
                samples_file=rec["samples_file"],
                store_dir=store_dir,
                idle_baseline_w=rec.get("idle_baseline_w"),
            )
        )
    return out


# --------------------------------------------------------------------------
# metadata ingestion


@dataclass
class IngestResult:
    records: list[ModelRecord]
    errors: list[str]  # row-level problems; offending rows were dropped


def _parse_optional_float(token: str) -> Optional[float]:
    token = token.strip()
    return float(token) if token else None


def ingest_metadata(text: str) -> IngestResult:
    """Parse a metadata table (comma- or tab-separated, header mandatory).

    Columns: model_id, family, year, params, flops, activations, input_size,
    optional url, then one column per accuracy dataset id. Rows that fail
    validation are collected in ``errors`` and skipped.
    """
    stripped = text.strip()
    if not stripped:
        raise DatastoreError("empty metadata table")
    delimiter = "\t" if "\t" in stripped.splitlines()[0] else ","
    reader = csv.DictReader(io.StringIO(stripped), delimiter=delimiter)
    header = [h.strip() for h in reader.fieldnames or []]
    missing = [c for c in _MANDATORY_COLUMNS if c not in header]
    if missing:
        raise DatastoreError(f"metadata table missing columns: {missing}")
    dataset_columns = [
        c for c in header if c not in _MANDATORY_COLUMNS and c not in _RESERVED_COLUMNS
    ]
    records: list[ModelRecord] = []
    errors: list[str] = []
    for line_no, row in enumerate(reader, start=2):
        try:
            accuracies = {}
            for col in dataset_columns:
                cell = (row.get(col) or "").strip()
                if cell:
                    accuracies[col] = float(cell)
            year = row.get("year", "").strip()
            record = ModelRecord(
                model_id=row["model_id"].strip(),
                family=ModelFamily.parse(row["family"]),
                params=float(row["params"]),
                flops=float(row["flops"]),
                input_size=int(float(row["input_size"])),
                accuracies=accuracies,
                pub_year=int(year) if year else None,
                activations=_parse_optional_float(row.get("activations") or ""),
                url=(row.get("url") or "").strip() or None,
            )
            if not record.model_id:
                raise ValueError("empty model_id")
        except (ValueError, TypeError, KeyError) as exc:
            errors.append(f"line {line_no}: {exc}")
            continue
        problems = validate(record)
        if problems:
            errors.append(f"line {line_no}: " + "; ".join(problems))
            continue
        records.append(record)
    return IngestResult(records=records, errors=errors)


def write_metadata(records: Sequence[ModelRecord], datasets: Sequence[str]) -> str:
    """Serialize records back to the ingest CSV format (round-trip helper)."""
    buf = io.StringIO()
    writer = csv.writer(buf)
    writer.writerow(list(_MANDATORY_COLUMNS) + ["url"] + list(datasets))
    for r in records:
        writer.writerow(
            [
                r.model_id,
                r.family.value,
                r.pub_year if r.pub_year is not None else "",
                r.params,
                r.flops,
                r.activations if r.activations is not None else "",
                r.input_size,
                r.url or "",
            ]
            + [r.accuracies.get(d, "") for d in datasets]
        )
    return buf.getvalue()


# --------------------------------------------------------------------------
# explorer bundle


def export_bundle(
    store_dir: Path,
    metadata: Sequence[ModelRecord],
    out_path: Optional[Path] = None,
    setups: Optional[Sequence[str]] = None,
    models: Optional[Sequence[str]] = None,
    datasets: Optional[Sequence[str]] = None,
) -> dict:
    """Build the self-contained explorer bundle: per-model best-batch metrics
    per setup, plus metadata and accuracies. Deterministic: identical inputs
    and filters produce byte-identical files."""
    from .energy import best_batch  # local import avoids a cycle at module load

    runs = load_store(store_dir)
    by_key: dict[tuple[str, str], list[StoredRun]] = {}
    setups_seen: dict[str, InferenceSetup] = {}
    for stored in runs:
        sid = stored.setup.setup_id
        if setups and sid not in setups:
            continue
        if models and stored.model_id not in models:
            continue
        setups_seen[sid] = stored.setup
        by_key.setdefault((stored.model_id, sid), []).append(stored)

    meta_by_id = {m.model_id: m for m in metadata if not models or m.model_id in models}
    shared = sorted({k[0] for k in by_key} & set(meta_by_id))
    if not shared:
        raise DatastoreError("store and metadata share no model ids")

    dataset_ids = sorted(
        {d for m in shared for d in meta_by_id[m].accuracies if not datasets or d in datasets}
    )

    metrics_entries = []
    for (model_id, sid), group in sorted(by_key.items()):
        if model_id not in meta_by_id:
            continue
        batch, metrics = best_batch([s.to_run() for s in group])
        entry = {"model_id": model_id, "setup_id": sid}
        entry.update(_metrics_to_json(metrics))
        metrics_entries.append(entry)

    model_entries = []
    for model_id in shared:
        m = meta_by_id[model_id]
        model_entries.append(
            {
                "model_id": m.model_id,
                "family": m.family.value,
                "pub_year": m.pub_year,
                "params": m.params,
                "flops": m.flops,
                "activations": m.activations,
                "input_size": m.input_size,
                "url": m.url,
                "accuracies": {
                    d: a for d, a in sorted(m.accuracies.items()) if d in dataset_ids
                },
            }
        )

    bundle = {
        "format": "enerprof-bundle",
        "version": BUNDLE_VERSION,
        "setups": [
            dict(_setup_to_json(setups_seen[sid]), setup_id=sid)
            for sid in sorted(setups_seen)
        ],
        "datasets": dataset_ids,
        "models": model_entries,
        "metrics": metrics_entries,
    }
    if out_path is not None:
        Path(out_path).write_text(
            json.dumps(bundle, sort_keys=True, indent=2) + "\n", encoding="utf-8"
        )
    return bundle


def load_bundle(path: Path) -> dict:
    try:
        bundle = json.loads(Path(path).read_text(encoding="utf-8"))
    except (OSError, json.JSONDecodeError) as exc:
        raise DatastoreError(f"cannot load bundle {path}: {exc}") from exc
    if bundle.get("format") != "enerprof-bundle":
        raise DatastoreError("not an explorer bundle")
    if bundle.get("version") != BUNDLE_VERSION:
        raise DatastoreError(
            f"unsupported bundle version {bundle.get('version')!r}, expected {BUNDLE_VERSION!r}"
        )
    return bundle
