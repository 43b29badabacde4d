"""Trade-off statistics: correlations, Pareto fronts, hulls, trend fits,
naive-estimate error factors, paired setup improvements, input-size scaling.

Energy is joules per image throughout; accuracy is percent.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Mapping, Optional, Sequence

import numpy as np
from scipy.optimize import least_squares

from .errors import AnalysisError
from .types import EnergyMetrics, InferenceSetup


# --------------------------------------------------------------------------
# correlation coefficients


def pearson(xs: Sequence[float], ys: Sequence[float]) -> float:
    """Product-moment correlation coefficient."""
    x = np.asarray(xs, dtype=float)
    y = np.asarray(ys, dtype=float)
    if x.shape != y.shape or x.ndim != 1:
        raise AnalysisError("pearson needs two equally sized vectors")
    if len(x) < 2:
        raise AnalysisError("pearson needs at least 2 points")
    xc = x - x.mean()
    yc = y - y.mean()
    sx = math.sqrt(float(xc @ xc))
    sy = math.sqrt(float(yc @ yc))
    if sx == 0 or sy == 0:
        raise AnalysisError("degenerate variance")
    r = float(xc @ yc) / (sx * sy)
    return max(-1.0, min(1.0, r))


def average_ranks(xs: Sequence[float]) -> np.ndarray:
    """1-based ranks, ties averaged."""
    x = np.asarray(xs, dtype=float)
    order = np.argsort(x, kind="mergesort")
    ranks = np.empty(len(x), dtype=float)
    i = 0
    while i < len(x):
        j = i
        while j + 1 < len(x) and x[order[j + 1]] == x[order[i]]:
            j += 1
        ranks[order[i : j + 1]] = (i + j) / 2 + 1
        i = j + 1
    return ranks


def spearman(xs: Sequence[float], ys: Sequence[float]) -> float:
    """Rank correlation: pearson of average-ranked data."""
    return pearson(average_ranks(xs), average_ranks(ys))


# --------------------------------------------------------------------------
# Pareto front and yearly hulls

Point = tuple[float, float]  # (energy J, accuracy %)


def dominates(p: Point, q: Point) -> bool:
    """p dominates q iff p is no worse on both axes and better on one."""
    return p[0] <= q[0] and p[1] >= q[1] and (p[0] < q[0] or p[1] > q[1])


def pareto_indices(points: Sequence[Point]) -> list[int]:
    """Indices of non-dominated points, ordered by increasing energy."""
    if not points:
        raise AnalysisError("pareto front of empty set")
    order = sorted(range(len(points)), key=lambda i: (points[i][0], -points[i][1]))
    kept: list[int] = []
    best_acc = -math.inf
    best_energy = math.nan
    for i in order:
        energy, acc = points[i]
        if acc > best_acc:
            kept.append(i)
            best_acc = acc
            best_energy = energy
        elif acc == best_acc and energy == best_energy:
            kept.append(i)  # exact duplicate of a front point: not dominated
    return kept


def pareto_front(points: Sequence[Point]) -> list[Point]:
    return [points[i] for i in pareto_indices(points)]


def _cross(o: Point, a: Point, b: Point) -> float:
    return (a[0] - o[0]) * (b[1] - o[1]) - (a[1] - o[1]) * (b[0] - o[0])


def convex_hull(points: Sequence[Point]) -> list[Point]:
    """Convex hull vertices in counterclockwise order (monotone chain).

    Collinear boundary points are dropped; degenerate inputs (< 3 distinct
    points, or all collinear) return the extreme points.
    """
    pts = sorted(set(points))
    if len(pts) <= 2:
        return pts
    lower: list[Point] = []
    for p in pts:
        while len(lower) >= 2 and _cross(lower[-2], lower[-1], p) <= 0:
            lower.pop()
        lower.append(p)
    upper: list[Point] = []
    for p in reversed(pts):
        while len(upper) >= 2 and _cross(upper[-2], upper[-1], p) <= 0:
            upper.pop()
        upper.append(p)
    hull = lower[:-1] + upper[:-1]
    if len(hull) < 2:  # all points collinear: keep the two extremes
        return [pts[0], pts[-1]]
    return hull


@dataclass(frozen=True)
class YearlyHullEntry:
    year: int
    points: tuple[Point, ...]  # (log10 energy, accuracy) of the cumulative set
    hull: tuple[Point, ...]


def yearly_hulls(
    entries: Sequence[tuple[int, float, float]],
) -> list[YearlyHullEntry]:
    """Cumulative convex hulls per publication year.

    ``entries`` are (year, energy J, accuracy %); hulls are computed in
    (log10 energy, accuracy) space, matching logarithmic energy axes.
    """
    dated = [(y, e, a) for y, e, a in entries if y is not None]
    if not dated:
        raise AnalysisError("no entries with publication years")
    if any(e <= 0 for _, e, _ in dated):
        raise AnalysisError("energies must be positive for log-space hulls")
    out = []
    for year in sorted({y for y, _, _ in dated}):
        pts = [(math.log10(e), a) for y, e, a in dated if y <= year]
        out.append(
            YearlyHullEntry(year=year, points=tuple(pts), hull=tuple(convex_hull(pts)))
        )
    return out


# --------------------------------------------------------------------------
# frontier trend fit and extrapolation


@dataclass(frozen=True)
class FrontierFit:
    """Coefficients of accuracy(E) = c1 * ln(ln E + c2) + c3 (E in joules)."""

    c1: float
    c2: float
    c3: float
    residual_norm: float
    e_min: float
    e_max: float

    def predict(self, energy: float) -> float:
        inner = math.log(energy) + self.c2
        if inner <= 0:
            raise AnalysisError("energy outside the fit's valid domain")
        return self.c1 * math.log(inner) + self.c3


_INIT_SCALES = (1.0, 0.3, 3.0, 0.1, 10.0)  # jittered multi-start ladder


def fit_frontier(points: Sequence[Point]) -> FrontierFit:
    """Least-squares fit of the nested-log growth curve to frontier points.

    Given c2 the model is linear in (c1, c3), so each start solves that
    subproblem for its initial guess before the joint minimization; five
    spread-out c2 starts guard against local minima.
    """
    if len(points) < 4:
        raise AnalysisError("frontier fit needs at least 4 points")
    energy = np.asarray([p[0] for p in points], dtype=float)
    acc = np.asarray([p[1] for p in points], dtype=float)
    if np.any(energy <= 0):
        raise AnalysisError("energies must be positive")
    x = np.log(energy)
    lb = -x.min() + 1e-9  # keeps ln E + c2 > 0 over the fit domain

    def residuals(theta):
        c1, c2, c3 = theta
        return c1 * np.log(x + c2) + c3 - acc

    base_offset = 1.0 + 0.1  # c2 such that min(ln E) + c2 = 1.1
    best = None
    for scale in _INIT_SCALES:
        c2_0 = lb + base_offset * scale
        u = np.log(x + c2_0)
        design = np.column_stack([u, np.ones_like(u)])
        (c1_0, c3_0), *_ = np.linalg.lstsq(design, acc, rcond=None)
        try:
            result = least_squares(
                residuals,
                x0=[c1_0, c2_0, c3_0],
                bounds=([-np.inf, lb, -np.inf], [np.inf, np.inf, np.inf]),
                xtol=1e-15,
                ftol=1e-15,
                gtol=1e-15,
                max_nfev=5000,
            )
        except Exception:
            continue
        if best is None or result.cost < best.cost:
            best = result
    if best is None:
        raise AnalysisError("frontier fit diverged from every start")
    c1, c2, c3 = (float(v) for v in best.x)
    return FrontierFit(
        c1=c1,
        c2=c2,
        c3=c3,
        residual_norm=float(np.linalg.norm(residuals(best.x))),
        e_min=float(energy.min()),
        e_max=float(energy.max()),
    )


def extrapolate_energy(fit: FrontierFit, target_accuracy: float) -> float:
    """Invert the fitted curve: E = exp(exp((A - c3) / c1) - c2)."""
    if fit.c1 == 0:
        raise AnalysisError("degenerate fit: c1 is zero")
    try:
        inner = math.exp((target_accuracy - fit.c3) / fit.c1)
    except OverflowError as exc:
        raise AnalysisError("extrapolation overflows") from exc
    ln_e = inner - fit.c2
    if ln_e > 709.0:  # beyond exp() range for float64
        raise AnalysisError("extrapolated energy overflows float range")
    return math.exp(ln_e)


# --------------------------------------------------------------------------
# naive estimate and error factors


def naive_estimate(flops: float, setup: InferenceSetup) -> float:
    """Idealized lower-bound energy: FLOPs / peak FLOP/s * TDP."""
    if setup.peak_compute is None:
        raise AnalysisError(f"setup {setup.setup_id} has no peak_compute")
    if flops < 0:
        raise AnalysisError("flops must be nonnegative")
    return flops / setup.peak_compute * setup.tdp


def geometric_stats(values: Sequence[float]) -> tuple[float, float]:
    """(geometric mean, geometric std) via log space; population std."""
    arr = np.asarray(values, dtype=float)
    if len(arr) == 0:
        raise AnalysisError("no values")
    if np.any(arr <= 0):
        raise AnalysisError("geometric stats need positive values")
    logs = np.log(arr)
    return float(np.exp(logs.mean())), float(np.exp(logs.std()))


@dataclass(frozen=True)
class UnderestimationStats:
    factors: tuple[float, ...]  # measured / estimated per model
    geometric_mean: float
    geometric_std: float


def underestimation_factors(
    measured: Sequence[float], estimated: Sequence[float]
) -> UnderestimationStats:
    """How far below reality the naive estimate lands, per model and aggregated."""
    if len(measured) != len(estimated):
        raise AnalysisError("measured/estimated length mismatch")
    if any(v <= 0 for v in measured) or any(v <= 0 for v in estimated):
        raise AnalysisError("energies must be positive")
    factors = tuple(m / e for m, e in zip(measured, estimated))
    gmean, gstd = geometric_stats(factors)
    return UnderestimationStats(factors=factors, geometric_mean=gmean, geometric_std=gstd)


# --------------------------------------------------------------------------
# paired setup improvement


@dataclass(frozen=True)
class PairedImprovement:
    model_id: str
    throughput_ratio: float  # optimized / baseline
    energy_ratio: float  # baseline / optimized energy per image


@dataclass(frozen=True)
class PairedStats:
    improvements: tuple[PairedImprovement, ...]
    geometric_mean: float  # of energy ratios
    geometric_std: float
    log_pearson: Optional[float]  # pearson of ln(throughput_ratio) vs ln(energy_ratio)


def paired_improvement(
    baseline: Mapping[str, EnergyMetrics], optimized: Mapping[str, EnergyMetrics]
) -> PairedStats:
    """Per-model improvement when switching deployment setups."""
    shared = sorted(set(baseline) & set(optimized))
    if not shared:
        raise AnalysisError("no shared models between the two setups")
    improvements = []
    for model_id in shared:
        base = baseline[model_id]
        opt = optimized[model_id]
        if base.throughput <= 0 or opt.energy_per_image <= 0:
            raise AnalysisError(f"degenerate metrics for {model_id}")
        improvements.append(
            PairedImprovement(
                model_id=model_id,
                throughput_ratio=opt.throughput / base.throughput,
                energy_ratio=base.energy_per_image / opt.energy_per_image,
            )
        )
    ratios = [imp.energy_ratio for imp in improvements]
    gmean, gstd = geometric_stats(ratios)
    try:
        log_r = pearson(
            [math.log(imp.throughput_ratio) for imp in improvements],
            [math.log(imp.energy_ratio) for imp in improvements],
        )
    except AnalysisError:
        log_r = None  # fewer than 2 models or constant ratios
    return PairedStats(
        improvements=tuple(improvements),
        geometric_mean=gmean,
        geometric_std=gstd,
        log_pearson=log_r,
    )


# --------------------------------------------------------------------------
# input-size scaling


@dataclass(frozen=True)
class SizeScaling:
    group: str
    sizes: tuple[int, ...]
    accuracy_deltas: tuple[float, ...]  # vs the smallest input size
    energy_ratios: tuple[float, ...]
    slope_per_pixel: float  # linear fit of energy vs pixel count


def input_size_scaling(
    groups: Mapping[str, Sequence[tuple[int, float, float]]],
) -> tuple[list[SizeScaling], list[str]]:
    """Per-group scaling of accuracy and energy with input size.

    Each group maps to (input_size, accuracy, energy) entries. Groups with a
    single size are skipped and reported.
    """
    results = []
    skipped = []
    for name, entries in groups.items():
        distinct = sorted(set(e[0] for e in entries))
        if len(distinct) < 2:
            skipped.append(name)
            continue
        ordered = sorted(entries, key=lambda e: e[0])
        base_size, base_acc, base_energy = ordered[0]
        if base_energy <= 0:
            raise AnalysisError(f"group {name} has nonpositive base energy")
        pixels = np.asarray([s * s for s, _, _ in ordered], dtype=float)
        energy = np.asarray([e for _, _, e in ordered], dtype=float)
        slope = float(np.polyfit(pixels, energy, 1)[0])
        results.append(
            SizeScaling(
                group=name,
                sizes=tuple(s for s, _, _ in ordered),
                accuracy_deltas=tuple(a - base_acc for _, a, _ in ordered),
                energy_ratios=tuple(e / base_energy for _, _, e in ordered),
                slope_per_pixel=slope,
            )
        )
    return results, skipped


# --------------------------------------------------------------------------
# cross-setup correlation


@dataclass(frozen=True)
class CrossSetupCorrelation:
    setups: tuple[str, ...]
    pearson: tuple[tuple[float, ...], ...]
    spearman: tuple[tuple[float, ...], ...]
    shared_models: tuple[tuple[int, ...], ...]  # count per pair


def cross_setup_correlation(
    energies: Mapping[str, Mapping[str, float]],
) -> CrossSetupCorrelation:
    """Pairwise correlation of per-model energy across deployment setups."""
    setups = sorted(energies)
    if len(setups) < 2:
        raise AnalysisError("need at least 2 setups")
    n = len(setups)
    pcc = [[1.0] * n for _ in range(n)]
    rho = [[1.0] * n for _ in range(n)]
    counts = [[len(energies[s]) for s in setups] for _ in range(n)]
    for i in range(n):
        for j in range(i + 1, n):
            shared = sorted(set(energies[setups[i]]) & set(energies[setups[j]]))
            if len(shared) < 2:
                raise AnalysisError(
                    f"setups {setups[i]} and {setups[j]} share fewer than 2 models"
                )
            xi = [energies[setups[i]][m] for m in shared]
            xj = [energies[setups[j]][m] for m in shared]
            pcc[i][j] = pcc[j][i] = pearson(xi, xj)
            rho[i][j] = rho[j][i] = spearman(xi, xj)
            counts[i][j] = counts[j][i] = len(shared)
    return CrossSetupCorrelation(
        setups=tuple(setups),
        pearson=tuple(tuple(row) for row in pcc),
        spearman=tuple(tuple(row) for row in rho),
        shared_models=tuple(tuple(row) for row in counts),
    )
