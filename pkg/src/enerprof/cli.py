"""Command-line entry point: measure, replay, analyze, score, export, validate.

Exit codes: 0 success, 1 domain error, 2 usage error. Output is a human
table by default; ``--format csv`` or ``--format json-lines`` for machines.
"""

from __future__ import annotations

import argparse
import csv
import io
import json
import sys
from dataclasses import replace
from pathlib import Path

from . import analysis, datastore, scoring
from .energy import best_batch, derive_metrics
from .errors import EnerprofError
from .harness import CLOCK_HOST, CLOCK_WORKLOAD, SweepConfig, gpu_lock, run_sweep
from .telemetry import (
    SOURCE_LIVE,
    SOURCE_REPLAY,
    SOURCE_SYNTHETIC,
    SamplerConfig,
    SyntheticProfile,
)
from .types import InferenceSetup, ScoreParams, validate

FORMATS = ("human", "csv", "json-lines")


def _emit(rows: list[dict], fmt: str, file=None) -> None:
    file = file or sys.stdout
    if not rows:
        return
    if fmt == "json-lines":
        for row in rows:
            print(json.dumps(row, sort_keys=True), file=file)
        return
    columns = list(rows[0].keys())
    if fmt == "csv":
        writer = csv.writer(file)
        writer.writerow(columns)
        for row in rows:
            writer.writerow([row.get(c, "") for c in columns])
        return
    rendered = [
        {c: f"{v:.6g}" if isinstance(v, float) else str(v) for c, v in row.items()}
        for row in rows
    ]
    widths = {c: max(len(c), *(len(r[c]) for r in rendered)) for c in columns}
    print("  ".join(c.ljust(widths[c]) for c in columns), file=file)
    for r in rendered:
        print("  ".join(r[c].ljust(widths[c]) for c in columns), file=file)


# --------------------------------------------------------------------------
# measure


def _sampler_config(args) -> SamplerConfig:
    if args.sampler == "replay":
        return SamplerConfig(rate=args.rate, source=SOURCE_REPLAY, source_spec=args.sampler_spec)
    if args.sampler == "live":
        return SamplerConfig(rate=args.rate, source=SOURCE_LIVE, source_spec=args.sampler_spec)
    spec = json.loads(args.sampler_spec) if args.sampler_spec else [[60.0, 100.0]]
    if isinstance(spec, dict):
        t0 = spec.get("t0_ns")
        if "ramp" in spec:
            start, end, dur = spec["ramp"]
            profile = SyntheticProfile.ramp(start, end, dur, **({"t0_ns": t0} if t0 else {}))
        else:
            pairs = [tuple(p) for p in spec["segments"]]
            profile = SyntheticProfile.from_pairs(pairs, **({"t0_ns": t0} if t0 else {}))
    else:
        profile = SyntheticProfile.from_pairs([tuple(p) for p in spec])
    return SamplerConfig(rate=args.rate, source=SOURCE_SYNTHETIC, source_spec=profile)


def cmd_measure(args) -> int:
    setup = InferenceSetup(
        gpu_label=args.gpu_label,
        runtime_label=args.runtime_label,
        tdp=args.tdp,
        peak_compute=args.peak_compute,
    )
    cfg = SweepConfig(
        start_batch=args.start_batch,
        max_batch=args.max_batch,
        min_reps=args.min_reps,
        min_runtime=args.min_runtime_s,
        warmup_min_reps=args.warmup_reps,
        warmup_min_runtime=args.warmup_runtime_s,
    )
    sampler_cfg = _sampler_config(args)
    with gpu_lock(args.gpu_label):
        result = run_sweep(
            args.workload, setup, cfg, sampler_cfg, args.model_id, clock=args.clock
        )
    rows = []
    for run in result.runs:
        rid = datastore.save_run(run, args.out, idle_baseline_w=args.idle_baseline)
        m = run.metrics
        rows.append(
            {
                "record": rid,
                "batch_size": run.batch_size,
                "energy_per_image_j": m.energy_per_image,
                "throughput_img_s": m.throughput,
                "avg_power_w": m.avg_power,
                "flags": ",".join(sorted(f.value for f in run.quality_flags)) or "-",
            }
        )
    _emit(rows, args.format)
    print(f"largest feasible batch size: {result.largest_feasible}", file=sys.stderr)
    return 0


# --------------------------------------------------------------------------
# replay


def cmd_replay(args) -> int:
    stored = datastore.load_store(args.store)
    if args.run:
        stored = [s for s in stored if s.record_id == args.run]
        if not stored:
            print(f"error: no record {args.run!r}", file=sys.stderr)
            return 1
    mismatches = 0
    rows = []
    for rec in stored:
        run = rec.to_run()
        fresh = derive_metrics(replace(run, metrics=None))
        ok = fresh == rec.metrics
        mismatches += 0 if ok else 1
        rows.append({"record": rec.record_id, "replay": "OK" if ok else "MISMATCH"})
    _emit(rows, args.format)
    return 1 if mismatches else 0


# --------------------------------------------------------------------------
# analyze


def _best_by_setup(stored_runs):
    """{setup_id: {model_id: (batch, EnergyMetrics)}} using best batch size."""
    grouped = {}
    setups = {}
    for rec in stored_runs:
        sid = rec.setup.setup_id
        setups[sid] = rec.setup
        grouped.setdefault(sid, {}).setdefault(rec.model_id, []).append(rec)
    best = {}
    for sid, models in grouped.items():
        best[sid] = {
            model_id: best_batch([r.to_run() for r in recs])
            for model_id, recs in models.items()
        }
    return best, setups


def _accuracy_of(record, dataset):
    return scoring.mean_accuracy(record.accuracies, [dataset] if dataset else None)


def _slug(setup_id: str) -> str:
    return setup_id.replace("/", "__")


def cmd_analyze(args) -> int:
    report = Path(args.report)
    report.mkdir(parents=True, exist_ok=True)
    stored = datastore.load_store(getattr(args, "in"))
    meta = datastore.ingest_metadata(Path(args.metadata).read_text(encoding="utf-8"))
    meta_by_id = {m.model_id: m for m in meta.records}
    best, setups = _best_by_setup(stored)
    selected = args.setup or sorted(best)

    def points_for(sid):
        pts, ids = [], []
        for model_id, (_, metrics) in sorted(best[sid].items()):
            if model_id not in meta_by_id:
                continue
            pts.append(
                (metrics.energy_per_image, _accuracy_of(meta_by_id[model_id], args.dataset))
            )
            ids.append(model_id)
        return ids, pts

    summary = []

    if args.pareto or args.fit:
        for sid in selected:
            ids, pts = points_for(sid)
            if not pts:
                continue
            front_idx = analysis.pareto_indices(pts)
            if args.pareto:
                path = report / f"pareto__{_slug(sid)}.csv"
                with open(path, "w", newline="", encoding="utf-8") as fh:
                    writer = csv.writer(fh)
                    writer.writerow(["model_id", "energy_per_image_j", "accuracy_pct"])
                    for i in sorted(front_idx, key=lambda i: pts[i][0]):
                        writer.writerow([ids[i], pts[i][0], pts[i][1]])
                summary.append(f"pareto {sid}: {len(front_idx)}/{len(pts)} on the front")
            if args.fit:
                fit = analysis.fit_frontier([pts[i] for i in front_idx])
                doc = {
                    "setup_id": sid,
                    "c1": fit.c1,
                    "c2": fit.c2,
                    "c3": fit.c3,
                    "residual_norm": fit.residual_norm,
                    "e_min": fit.e_min,
                    "e_max": fit.e_max,
                }
                if args.extrapolate_to is not None:
                    doc["extrapolation"] = {
                        "target_accuracy_pct": args.extrapolate_to,
                        "energy_joules": analysis.extrapolate_energy(fit, args.extrapolate_to),
                    }
                (report / f"frontier_fit__{_slug(sid)}.json").write_text(
                    json.dumps(doc, indent=2, sort_keys=True) + "\n", encoding="utf-8"
                )
                summary.append(
                    f"fit {sid}: c=({fit.c1:.4g}, {fit.c2:.4g}, {fit.c3:.4g}), "
                    f"residual {fit.residual_norm:.3g}"
                )

    if args.naive_vs_measured:
        for sid in selected:
            measured, estimated, ids = [], [], []
            for model_id, (_, metrics) in sorted(best[sid].items()):
                if model_id not in meta_by_id:
                    continue
                ids.append(model_id)
                measured.append(metrics.energy_per_image)
                estimated.append(
                    analysis.naive_estimate(meta_by_id[model_id].flops, setups[sid])
                )
            stats = analysis.underestimation_factors(measured, estimated)
            path = report / f"naive_vs_measured__{_slug(sid)}.csv"
            with open(path, "w", newline="", encoding="utf-8") as fh:
                writer = csv.writer(fh)
                writer.writerow(["model_id", "measured_j", "estimated_j", "factor"])
                for row in zip(ids, measured, estimated, stats.factors):
                    writer.writerow(row)
            (report / f"underestimation__{_slug(sid)}.json").write_text(
                json.dumps(
                    {
                        "setup_id": sid,
                        "geometric_mean": stats.geometric_mean,
                        "geometric_std": stats.geometric_std,
                    },
                    indent=2,
                    sort_keys=True,
                )
                + "\n",
                encoding="utf-8",
            )
            summary.append(
                f"naive {sid}: underestimation gmean {stats.geometric_mean:.4g} "
                f"gstd {stats.geometric_std:.4g}"
            )

    if args.paired:
        base_sid, opt_sid = args.paired
        for sid in (base_sid, opt_sid):
            if sid not in best:
                raise EnerprofError(f"setup {sid!r} not in store")
        stats = analysis.paired_improvement(
            {m: metrics for m, (_, metrics) in best[base_sid].items()},
            {m: metrics for m, (_, metrics) in best[opt_sid].items()},
        )
        with open(report / "paired.csv", "w", newline="", encoding="utf-8") as fh:
            writer = csv.writer(fh)
            writer.writerow(["model_id", "throughput_ratio", "energy_ratio"])
            for imp in stats.improvements:
                writer.writerow([imp.model_id, imp.throughput_ratio, imp.energy_ratio])
        (report / "paired_stats.json").write_text(
            json.dumps(
                {
                    "baseline": base_sid,
                    "optimized": opt_sid,
                    "geometric_mean": stats.geometric_mean,
                    "geometric_std": stats.geometric_std,
                    "log_pearson": stats.log_pearson,
                },
                indent=2,
                sort_keys=True,
            )
            + "\n",
            encoding="utf-8",
        )
        summary.append(
            f"paired {base_sid} -> {opt_sid}: energy reduction gmean "
            f"{stats.geometric_mean:.4g} gstd {stats.geometric_std:.4g}"
        )

    if args.yearly:
        for sid in selected:
            entries = []
            for model_id, (_, metrics) in sorted(best[sid].items()):
                rec = meta_by_id.get(model_id)
                if rec is None or rec.pub_year is None:
                    continue
                entries.append(
                    (rec.pub_year, metrics.energy_per_image, _accuracy_of(rec, args.dataset))
                )
            hulls = analysis.yearly_hulls(entries)
            (report / f"yearly_hulls__{_slug(sid)}.json").write_text(
                json.dumps(
                    [
                        {"year": h.year, "hull": [list(p) for p in h.hull]}
                        for h in hulls
                    ],
                    indent=2,
                )
                + "\n",
                encoding="utf-8",
            )
            summary.append(f"yearly {sid}: hulls for {len(hulls)} years")

    if args.correlations:
        energies = {
            sid: {m: metrics.energy_per_image for m, (_, metrics) in models.items()}
            for sid, models in best.items()
        }
        corr = analysis.cross_setup_correlation(energies)
        with open(report / "correlations.csv", "w", newline="", encoding="utf-8") as fh:
            writer = csv.writer(fh)
            writer.writerow(["PCC / rho"] + list(corr.setups))
            for i, sid in enumerate(corr.setups):
                writer.writerow(
                    [sid]
                    + [
                        f"{corr.pearson[i][j]:.4f} / {corr.spearman[i][j]:.4f}"
                        for j in range(len(corr.setups))
                    ]
                )
        summary.append(f"correlations across {len(corr.setups)} setups written")

    if args.input_scaling:
        for sid in selected:
            groups = {}
            for model_id, (_, metrics) in sorted(best[sid].items()):
                rec = meta_by_id.get(model_id)
                if rec is None:
                    continue
                groups.setdefault(rec.family.value, []).append(
                    (rec.input_size, _accuracy_of(rec, args.dataset), metrics.energy_per_image)
                )
            results, skipped = analysis.input_size_scaling(groups)
            (report / f"input_scaling__{_slug(sid)}.json").write_text(
                json.dumps(
                    [
                        {
                            "group": r.group,
                            "sizes": list(r.sizes),
                            "accuracy_deltas": list(r.accuracy_deltas),
                            "energy_ratios": list(r.energy_ratios),
                            "slope_per_pixel": r.slope_per_pixel,
                        }
                        for r in results
                    ],
                    indent=2,
                )
                + "\n",
                encoding="utf-8",
            )
            for name in skipped:
                print(f"warning: group {name!r} has a single input size, skipped", file=sys.stderr)
            summary.append(f"input scaling {sid}: {len(results)} groups, {len(skipped)} skipped")

    for line in summary:
        print(line)
    if meta.errors:
        for err in meta.errors:
            print(f"metadata warning: {err}", file=sys.stderr)
    return 0


# --------------------------------------------------------------------------
# score


def _score_entries(args):
    """(entries, energies) where entries are (model_id, accuracy, energy)."""
    datasets = args.datasets.split(",") if args.datasets else None
    if args.bundle:
        bundle = datastore.load_bundle(args.bundle)
        setup_ids = sorted({m["setup_id"] for m in bundle["metrics"]})
        sid = args.setup or setup_ids[0]
        if sid not in setup_ids:
            raise EnerprofError(f"setup {sid!r} not in bundle (have {setup_ids})")
        acc_by_model = {
            m["model_id"]: scoring.mean_accuracy(m["accuracies"], datasets)
            for m in bundle["models"]
        }
        entries = [
            (m["model_id"], acc_by_model[m["model_id"]], m["energy_per_image"])
            for m in bundle["metrics"]
            if m["setup_id"] == sid and m["model_id"] in acc_by_model
        ]
    else:
        stored = datastore.load_store(getattr(args, "in"))
        meta = datastore.ingest_metadata(Path(args.metadata).read_text(encoding="utf-8"))
        meta_by_id = {m.model_id: m for m in meta.records}
        best, _ = _best_by_setup(stored)
        sid = args.setup or sorted(best)[0]
        if sid not in best:
            raise EnerprofError(f"setup {sid!r} not in store (have {sorted(best)})")
        entries = [
            (model_id, scoring.mean_accuracy(meta_by_id[model_id].accuracies, datasets),
             metrics.energy_per_image)
            for model_id, (_, metrics) in sorted(best[sid].items())
            if model_id in meta_by_id
        ]
    if not entries:
        raise EnerprofError("nothing to score")
    return entries


def cmd_score(args) -> int:
    entries = _score_entries(args)
    surviving = [e for e in entries if e[1] >= args.min_accuracy]
    if not surviving:
        raise EnerprofError("every model was filtered out by the accuracy floor")
    if args.norm == "auto":
        norm = scoring.resolve_norm([e[2] for e in surviving], "auto")
    else:
        norm = scoring.resolve_norm([], float(args.norm))
    params = ScoreParams(weight=args.weight, norm=norm, min_accuracy=args.min_accuracy)
    ranking = scoring.rank(
        entries, args.metric, params, top_n=args.top, balanced=args.balanced
    )
    rows = [
        {
            "rank": i + 1,
            "model_id": s.model_id,
            "score": s.score,
            "accuracy_pct": s.accuracy,
            "energy_per_image_j": s.energy_per_image,
        }
        for i, s in enumerate(ranking)
    ]
    _emit(rows, args.format)
    if args.grid:
        energies = [e[2] for e in entries]
        grid = scoring.score_grid(
            params,
            (min(energies), max(energies)),
            (0.0, 100.0),
            args.grid,
            metric=args.metric,
            balanced=args.balanced,
        )
        doc = {
            "metric": grid.metric,
            "weight": params.weight,
            "norm": params.norm,
            "balanced": args.balanced,
            "energies": list(grid.energies),
            "accuracies": list(grid.accuracies),
            "values": [list(row) for row in grid.values],
        }
        out = Path(args.grid_out or "score_grid.json")
        out.write_text(json.dumps(doc, sort_keys=True) + "\n", encoding="utf-8")
        print(f"score grid written to {out}", file=sys.stderr)
    return 0


# --------------------------------------------------------------------------
# export / validate


def cmd_export(args) -> int:
    meta = datastore.ingest_metadata(Path(args.metadata).read_text(encoding="utf-8"))
    bundle = datastore.export_bundle(
        getattr(args, "in"),
        meta.records,
        out_path=args.out,
        setups=args.setups.split(",") if args.setups else None,
        models=args.models.split(",") if args.models else None,
        datasets=args.datasets.split(",") if args.datasets else None,
    )
    print(
        f"bundle {args.out}: {len(bundle['models'])} models, "
        f"{len(bundle['setups'])} setups, {len(bundle['metrics'])} metric entries"
    )
    return 0


def cmd_validate(args) -> int:
    problems = 0
    if args.metadata:
        meta = datastore.ingest_metadata(Path(args.metadata).read_text(encoding="utf-8"))
        for err in meta.errors:
            print(f"metadata: {err}")
            problems += 1
        print(f"metadata: {len(meta.records)} valid records", file=sys.stderr)
    if args.store:
        for rec in datastore.load_store(args.store):
            for violation in validate(rec.to_run()):
                print(f"{rec.record_id}: {violation}")
                problems += 1
    if not args.metadata and not args.store:
        raise EnerprofError("nothing to validate: pass --metadata and/or --store")
    return 1 if problems else 0


# --------------------------------------------------------------------------
# parser


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="enerprof",
        description="Inference energy profiling and accuracy-vs-energy analysis",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("measure", help="run a batch-size sweep over a workload")
    p.add_argument("--workload", required=True, help="command speaking the workload protocol")
    p.add_argument("--model-id", required=True)
    p.add_argument("--gpu-label", required=True)
    p.add_argument("--runtime-label", required=True)
    p.add_argument("--tdp", type=float, required=True, help="watts")
    p.add_argument("--peak-compute", type=float, default=None, help="FLOP/s")
    p.add_argument("--start-batch", type=int, default=1)
    p.add_argument("--max-batch", type=int, default=None)
    p.add_argument("--min-reps", type=int, default=13)
    p.add_argument("--min-runtime-s", type=float, default=10.0)
    p.add_argument("--warmup-reps", type=int, default=3)
    p.add_argument("--warmup-runtime-s", type=float, default=2.0)
    p.add_argument("--sampler", choices=["live", "replay", "synthetic"], required=True)
    p.add_argument("--sampler-spec", default=None,
                   help="command template (live), file path (replay), or JSON profile (synthetic)")
    p.add_argument("--rate", type=float, default=100.0, help="sampling rate, Hz")
    p.add_argument("--clock", choices=[CLOCK_HOST, CLOCK_WORKLOAD], default=CLOCK_HOST)
    p.add_argument("--idle-baseline", type=float, default=None,
                   help="idle power annotation in W (stored, never subtracted)")
    p.add_argument("--out", required=True, help="results store directory")
    p.add_argument("--format", choices=FORMATS, default="human")
    p.set_defaults(func=cmd_measure)

    p = sub.add_parser("replay", help="re-derive metrics from raw sample sidecars")
    p.add_argument("--store", required=True)
    p.add_argument("--run", default=None, help="record id (default: all)")
    p.add_argument("--all", action="store_true")
    p.add_argument("--format", choices=FORMATS, default="human")
    p.set_defaults(func=cmd_replay)

    p = sub.add_parser("analyze", help="trade-off statistics over a results store")
    p.add_argument("--in", required=True, help="results store directory")
    p.add_argument("--metadata", required=True)
    p.add_argument("--report", required=True, help="output directory")
    p.add_argument("--setup", action="append", default=None, help="restrict to setup id(s)")
    p.add_argument("--dataset", default=None, help="accuracy dataset (default: mean of all)")
    p.add_argument("--pareto", action="store_true")
    p.add_argument("--fit", action="store_true")
    p.add_argument("--extrapolate-to", type=float, default=None, help="accuracy %% target")
    p.add_argument("--naive-vs-measured", action="store_true")
    p.add_argument("--paired", nargs=2, metavar=("BASELINE", "OPTIMIZED"), default=None)
    p.add_argument("--yearly", action="store_true")
    p.add_argument("--correlations", action="store_true")
    p.add_argument("--input-scaling", action="store_true")
    p.add_argument("--format", choices=FORMATS, default="human")
    p.set_defaults(func=cmd_analyze)

    p = sub.add_parser("score", help="rank models by efficiency score")
    p.add_argument("--bundle", default=None, help="explorer bundle file")
    p.add_argument("--in", default=None, help="results store directory")
    p.add_argument("--metadata", default=None)
    p.add_argument("--setup", default=None)
    p.add_argument("--metric", choices=[scoring.METRIC_RATIO, scoring.METRIC_MANHATTAN],
                   default=scoring.METRIC_MANHATTAN)
    p.add_argument("--weight", type=float, default=0.5)
    p.add_argument("--min-accuracy", type=float, default=0.0)
    p.add_argument("--norm", default="auto", help="'auto' or joules")
    p.add_argument("--datasets", default=None, help="comma-separated dataset ids")
    p.add_argument("--top", type=int, default=None)
    p.add_argument("--grid", type=int, default=None, help="contour grid resolution")
    p.add_argument("--grid-out", default=None)
    p.add_argument("--balanced", action="store_true",
                   help="scale the energy term onto 0-100 like the accuracy term")
    p.add_argument("--format", choices=FORMATS, default="human")
    p.set_defaults(func=cmd_score)

    p = sub.add_parser("export", help="export the explorer bundle")
    p.add_argument("--in", required=True)
    p.add_argument("--metadata", required=True)
    p.add_argument("--out", required=True)
    p.add_argument("--setups", default=None)
    p.add_argument("--models", default=None)
    p.add_argument("--datasets", default=None)
    p.set_defaults(func=cmd_export)

    p = sub.add_parser("validate", help="check metadata tables and stored runs")
    p.add_argument("--metadata", default=None)
    p.add_argument("--store", default=None)
    p.add_argument("--format", choices=FORMATS, default="human")
    p.set_defaults(func=cmd_validate)

    return parser


def dispatch(argv) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return int(exc.code) if exc.code is not None else 0
    if args.command == "score" and not args.bundle and not (
        getattr(args, "in") and args.metadata
    ):
        print("error: score needs --bundle or both --in and --metadata", file=sys.stderr)
        return 2
    try:
        return args.func(args)
    except EnerprofError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1


def main() -> None:
    sys.exit(dispatch(sys.argv[1:]))


if __name__ == "__main__":
    main()
