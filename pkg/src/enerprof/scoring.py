"""Efficiency scores: thresholded accuracy-per-joule and the weighted
Manhattan distance to the ideal point (100% accuracy, 0 J).

The Manhattan score is, as printed:

    score = 100 - (W * (E / N) + (1 - W) * (100 - A))

where N normalizes energy (default: max energy among the scored set) and W
in [0, 1] weights energy against accuracy. The printed formula mixes the
[0, 1]-ish E/N with the percent-scaled accuracy term; ``balanced=True``
rescales the energy term by 100 so both share the 0-100 range. The literal
formula is the default.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, replace
from typing import Optional, Sequence, Union

from .errors import ScoringError
from .types import ScoreParams

METRIC_RATIO = "ratio"
METRIC_MANHATTAN = "manhattan"


def ratio_score(
    accuracy: float, energy_per_image: float, params: ScoreParams
) -> Optional[float]:
    """Accuracy per joule, or None when the model misses the accuracy floor."""
    if energy_per_image <= 0:
        raise ScoringError("energy must be positive for the ratio score")
    if accuracy < params.min_accuracy:
        return None
    return accuracy / energy_per_image


def manhattan_score(
    accuracy: float,
    energy_per_image: float,
    params: ScoreParams,
    balanced: bool = False,
) -> float:
    """Weighted Manhattan score; W=0 collapses to accuracy, W=1 to energy only."""
    if params.norm <= 0:
        raise ScoringError("norm must be positive")
    if energy_per_image < 0:
        raise ScoringError("energy must be nonnegative")
    energy_term = energy_per_image / params.norm
    if balanced:
        energy_term *= 100.0
    return 100.0 - (params.weight * energy_term + (1.0 - params.weight) * (100.0 - accuracy))


def resolve_norm(energies: Sequence[float], spec: Union[str, float] = "auto") -> float:
    """N for the Manhattan score: max energy of the selected set, or a pin."""
    if isinstance(spec, str):
        if spec != "auto":
            raise ScoringError(f"unknown norm spec {spec!r}")
        if not energies:
            raise ScoringError("cannot auto-normalize an empty set")
        return max(energies)
    if spec <= 0:
        raise ScoringError("norm must be positive")
    return float(spec)


@dataclass(frozen=True)
class ScoredModel:
    model_id: str
    accuracy: float
    energy_per_image: float
    score: float


def rank(
    records: Sequence[tuple[str, float, float]],
    metric: str,
    params: ScoreParams,
    top_n: Optional[int] = None,
    balanced: bool = False,
) -> list[ScoredModel]:
    """Score and order models, best first; ties break by model_id.

    ``records`` are (model_id, accuracy %, energy J/img). Models below the
    accuracy floor are dropped for both metrics.
    """
    if metric not in (METRIC_RATIO, METRIC_MANHATTAN):
        raise ScoringError(f"unknown metric {metric!r}")
    scored = []
    for model_id, accuracy, energy in records:
        if accuracy < params.min_accuracy:
            continue
        if metric == METRIC_RATIO:
            value = ratio_score(accuracy, energy, params)
            if value is None:
                continue
        else:
            value = manhattan_score(accuracy, energy, params, balanced=balanced)
        scored.append(ScoredModel(model_id, accuracy, energy, value))
    if not scored:
        raise ScoringError("every model was filtered out by the accuracy floor")
    scored.sort(key=lambda s: (-s.score, s.model_id))
    return scored[:top_n] if top_n is not None else scored


@dataclass(frozen=True)
class ScoreGrid:
    energies: tuple[float, ...]  # log-spaced
    accuracies: tuple[float, ...]  # linear
    values: tuple[tuple[float, ...], ...]  # values[i][j] = score(acc_i, energy_j)
    metric: str


def score_grid(
    params: ScoreParams,
    energy_range: tuple[float, float],
    accuracy_range: tuple[float, float],
    resolution: int,
    metric: str = METRIC_MANHATTAN,
    balanced: bool = False,
) -> ScoreGrid:
    """Score evaluated over a log-energy x linear-accuracy grid for contour
    backgrounds. The accuracy floor is ignored here so contours stay
    continuous; threshold lines are drawn separately."""
    e_lo, e_hi = energy_range
    a_lo, a_hi = accuracy_range
    if e_lo <= 0 or e_hi <= e_lo:
        raise ScoringError("energy range must be positive and increasing")
    if a_hi <= a_lo:
        raise ScoringError("accuracy range must be increasing")
    if resolution < 2:
        raise ScoringError("resolution must be at least 2")
    log_lo, log_hi = math.log10(e_lo), math.log10(e_hi)
    energies = tuple(
        10 ** (log_lo + (log_hi - log_lo) * j / (resolution - 1)) for j in range(resolution)
    )
    accuracies = tuple(
        a_lo + (a_hi - a_lo) * i / (resolution - 1) for i in range(resolution)
    )
    unfiltered = replace(params, min_accuracy=0.0)
    rows = []
    for acc in accuracies:
        if metric == METRIC_RATIO:
            row = tuple(ratio_score(acc, e, unfiltered) for e in energies)
        else:
            row = tuple(
                manhattan_score(acc, e, unfiltered, balanced=balanced) for e in energies
            )
        rows.append(row)
    return ScoreGrid(
        energies=energies, accuracies=accuracies, values=tuple(rows), metric=metric
    )


def mean_accuracy(accuracies, datasets: Optional[Sequence[str]] = None) -> float:
    """Accuracy of a model for scoring: one dataset, or the arithmetic mean
    of the selected (default: all) datasets."""
    keys = list(datasets) if datasets else sorted(accuracies)
    missing = [k for k in keys if k not in accuracies]
    if missing:
        raise ScoringError(f"model lacks accuracy for datasets: {missing}")
    if not keys:
        raise ScoringError("no datasets to average")
    return sum(accuracies[k] for k in keys) / len(keys)
