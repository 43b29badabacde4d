#!/usr/bin/env python3
"""Regenerate the committed demo dataset and the explorer fixtures.

Writes demo/ (scenario inputs + exported bundle + score fixtures) and copies
the fixtures the explorer tests consume into frontend/fixtures/. Everything
is deterministic: rerunning produces byte-identical files.

Usage: python3 scripts/make_demo_data.py [--repo-root PATH]
"""

import argparse
import json
import shutil
import sys
import tempfile
from pathlib import Path

sys.path.insert(0, str(Path(__file__).resolve().parents[1] / "src"))

import numpy as np

from enerprof import demo
from enerprof.datastore import load_bundle
from enerprof.scoring import (
    manhattan_score,
    mean_accuracy,
    rank,
    ratio_score,
    score_grid,
)
from enerprof.types import ScoreParams


def dump(path: Path, doc) -> None:
    path.write_text(json.dumps(doc, indent=2, sort_keys=True) + "\n", encoding="utf-8")
    print(f"wrote {path}")


def build_score_vectors() -> list[dict]:
    """Shared cross-language contract: inputs -> expected scores."""
    rng = np.random.default_rng(42)
    cases = []
    fixed = [
        dict(accuracy=87.3, energy=12.0, weight=0.0, norm=50.0, min_accuracy=0.0),
        dict(accuracy=50.0, energy=10.0, weight=1.0, norm=10.0, min_accuracy=0.0),
        dict(accuracy=90.0, energy=5.0, weight=0.5, norm=10.0, min_accuracy=0.0),
        dict(accuracy=0.1, energy=1e-6, weight=0.5, norm=10.0, min_accuracy=50.0),
        dict(accuracy=80.0, energy=2.0, weight=0.5, norm=10.0, min_accuracy=50.0),
        dict(accuracy=100.0, energy=0.0, weight=1.0, norm=7.5, min_accuracy=0.0),
    ]
    randoms = [
        dict(
            accuracy=float(rng.uniform(0, 100)),
            energy=float(rng.uniform(0.001, 80)),
            weight=float(rng.uniform(0, 1)),
            norm=float(rng.uniform(0.5, 100)),
            min_accuracy=float(rng.choice([0.0, 30.0, 60.0, 85.0])),
        )
        for _ in range(48)
    ]
    for spec in fixed + randoms:
        for balanced in (False, True):
            params = ScoreParams(
                weight=spec["weight"], norm=spec["norm"], min_accuracy=spec["min_accuracy"]
            )
            ratio = (
                ratio_score(spec["accuracy"], spec["energy"], params)
                if spec["energy"] > 0
                else None
            )
            cases.append(
                dict(
                    spec,
                    balanced=balanced,
                    manhattan=manhattan_score(
                        spec["accuracy"], spec["energy"], params, balanced=balanced
                    ),
                    ratio=ratio,
                )
            )
    return cases


def build_expected_rankings(bundle: dict) -> list[dict]:
    """Reference rankings the explorer must reproduce on the demo bundle."""
    out = []
    for setup_id in ("sim-gpu/graph", "sim-gpu/eager"):
        acc = {
            m["model_id"]: mean_accuracy(m["accuracies"]) for m in bundle["models"]
        }
        entries = [
            (m["model_id"], acc[m["model_id"]], m["energy_per_image"])
            for m in bundle["metrics"]
            if m["setup_id"] == setup_id
        ]
        for metric, weight, min_acc in (
            ("manhattan", 0.5, 0.0),
            ("manhattan", 0.0, 0.0),
            ("ratio", 0.5, 75.0),
        ):
            surviving = [e[2] for e in entries if e[1] >= min_acc]
            norm = max(surviving)
            params = ScoreParams(weight=weight, norm=norm, min_accuracy=min_acc)
            ranking = rank(entries, metric, params)
            out.append(
                {
                    "setup_id": setup_id,
                    "metric": metric,
                    "weight": weight,
                    "min_accuracy": min_acc,
                    "norm": norm,
                    "datasets": None,
                    "ranking": [
                        {"model_id": r.model_id, "score": r.score} for r in ranking
                    ],
                }
            )
    return out


def build_grid_fixture(bundle: dict) -> dict:
    energies = [m["energy_per_image"] for m in bundle["metrics"]]
    params = ScoreParams(weight=0.5, norm=max(energies), min_accuracy=0.0)
    grid = score_grid(
        params, (min(energies), max(energies) * 10), (0.0, 100.0), 12, metric="manhattan"
    )
    return {
        "metric": "manhattan",
        "weight": params.weight,
        "norm": params.norm,
        "balanced": False,
        "energies": list(grid.energies),
        "accuracies": list(grid.accuracies),
        "values": [list(row) for row in grid.values],
    }


def main() -> int:
    parser = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    parser.add_argument(
        "--repo-root", type=Path, default=Path(__file__).resolve().parents[1]
    )
    args = parser.parse_args()
    demo_dir = args.repo_root / "demo"
    demo_dir.mkdir(exist_ok=True)

    demo.write_inputs(demo_dir)
    print(f"wrote {demo_dir}/metadata.csv and replay logs")

    with tempfile.TemporaryDirectory() as tmp:
        paths = demo.run_pipeline(demo_dir, Path(tmp))
        shutil.copyfile(paths["bundle"], demo_dir / "bundle.json")
    print(f"wrote {demo_dir}/bundle.json")

    bundle = load_bundle(demo_dir / "bundle.json")
    dump(demo_dir / "score_vectors.json", build_score_vectors())
    dump(demo_dir / "expected_ranking.json", build_expected_rankings(bundle))
    dump(demo_dir / "score_grid.json", build_grid_fixture(bundle))

    fixtures = args.repo_root / "frontend" / "fixtures"
    fixtures.mkdir(parents=True, exist_ok=True)
    for name in ("bundle.json", "score_vectors.json", "expected_ranking.json", "score_grid.json"):
        shutil.copyfile(demo_dir / name, fixtures / name)
        print(f"copied {fixtures / name}")
    return 0


if __name__ == "__main__":
    sys.exit(main())
