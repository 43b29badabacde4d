"""Efficiency scores, ranking, and contour grids."""

import numpy as np
import pytest
from hypothesis import given, strategies as st

from enerprof.errors import ScoringError
from enerprof.scoring import (
    manhattan_score,
    mean_accuracy,
    rank,
    ratio_score,
    resolve_norm,
    score_grid,
)
from enerprof.types import ScoreParams


def params(weight=0.5, norm=10.0, min_accuracy=0.0):
    return ScoreParams(weight=weight, norm=norm, min_accuracy=min_accuracy)


def test_ratio_score_basic():
    assert ratio_score(80.0, 2.0, params(min_accuracy=50.0)) == pytest.approx(40.0)


def test_ratio_score_filters_degenerate_model():
    # the trivial constant-output model: 0.1% accuracy, negligible energy
    assert ratio_score(0.1, 1e-6, params(min_accuracy=50.0)) is None


def test_ratio_score_zero_energy_errors():
    with pytest.raises(ScoringError):
        ratio_score(80.0, 0.0, params())


def test_manhattan_weight_zero_is_accuracy():
    assert manhattan_score(87.3, 123.0, params(weight=0.0, norm=200.0)) == pytest.approx(87.3)


def test_manhattan_weight_one_energy_equals_norm():
    # literal printed formula: 100 - (1 * (E/N)) with E == N gives 99
    assert manhattan_score(50.0, 10.0, params(weight=1.0, norm=10.0)) == pytest.approx(99.0)


def test_manhattan_direct_substitution():
    # W=0.5, A=90, E=N/2: 100 - (0.5*0.5 + 0.5*10) = 94.75
    assert manhattan_score(90.0, 5.0, params(weight=0.5, norm=10.0)) == pytest.approx(94.75)


def test_manhattan_balanced_variant():
    # balanced scales the energy term onto 0-100: W*100*(E/N)
    assert manhattan_score(90.0, 5.0, params(weight=0.5, norm=10.0), balanced=True) == (
        pytest.approx(100.0 - (0.5 * 100.0 * 0.5 + 0.5 * 10.0))
    )


@given(
    w=st.floats(min_value=0.0, max_value=1.0),
    a=st.floats(min_value=0.0, max_value=100.0),
    e1=st.floats(min_value=0.0, max_value=100.0),
    e2=st.floats(min_value=0.0, max_value=100.0),
)
def test_manhattan_monotone_in_energy_and_accuracy(w, a, e1, e2):
    p = params(weight=w, norm=50.0)
    lo, hi = sorted([e1, e2])
    assert manhattan_score(a, lo, p) >= manhattan_score(a, hi, p)
    if a < 100.0:
        assert manhattan_score(min(a + 1, 100.0), e1, p) >= manhattan_score(a, e1, p)


def test_rank_ordering_and_ties():
    p = params(weight=0.0, norm=10.0)
    entries = [("m-b", 50.0, 1.0), ("m-a", 70.0, 2.0)]
    ranking = rank(entries, "manhattan", p)
    assert [r.model_id for r in ranking] == ["m-a", "m-b"]
    tied = [("zed", 70.0, 2.0), ("abc", 70.0, 2.0)]
    ranking = rank(tied, "manhattan", p)
    assert [r.model_id for r in ranking] == ["abc", "zed"]


def test_rank_filters_below_threshold():
    p = params(min_accuracy=60.0)
    entries = [("keep", 80.0, 1.0), ("drop", 10.0, 0.001)]
    for metric in ("ratio", "manhattan"):
        ranking = rank(entries, metric, p)
        assert [r.model_id for r in ranking] == ["keep"]


def test_rank_all_filtered_errors():
    with pytest.raises(ScoringError, match="filtered"):
        rank([("a", 10.0, 1.0)], "ratio", params(min_accuracy=50.0))


def test_rank_matches_full_sort_oracle(rng):
    for _ in range(50):
        n = int(rng.integers(2, 30))
        entries = [
            (f"m{i:02d}", float(rng.uniform(0, 100)), float(rng.uniform(0.1, 50)))
            for i in range(n)
        ]
        p = params(weight=float(rng.uniform(0, 1)), norm=50.0)
        ranking = rank(entries, "manhattan", p)
        oracle = sorted(
            (
                (-manhattan_score(a, e, p), mid)
                for mid, a, e in entries
            )
        )
        assert [r.model_id for r in ranking] == [mid for _, mid in oracle]


def test_rank_top_n():
    entries = [(f"m{i}", 50.0 + i, 1.0) for i in range(10)]
    assert len(rank(entries, "manhattan", params(), top_n=3)) == 3


@given(scale=st.floats(min_value=0.01, max_value=100.0))
def test_ratio_ranking_invariant_to_energy_rescale(scale):
    entries = [("a", 80.0, 2.0), ("b", 60.0, 1.0), ("c", 90.0, 5.0)]
    base = [r.model_id for r in rank(entries, "ratio", params())]
    scaled = [
        r.model_id
        for r in rank([(m, a, e * scale) for m, a, e in entries], "ratio", params())
    ]
    assert base == scaled


def test_weight_extremes_match_single_axis_rankings(rng):
    for _ in range(100):
        n = int(rng.integers(2, 20))
        entries = [
            (f"m{i:02d}", float(rng.uniform(0, 100)), float(rng.uniform(0.1, 50)))
            for i in range(n)
        ]
        by_accuracy = [m for m, _, _ in sorted(entries, key=lambda t: (-t[1], t[0]))]
        by_energy = [m for m, _, _ in sorted(entries, key=lambda t: (t[2], t[0]))]
        w0 = [r.model_id for r in rank(entries, "manhattan", params(weight=0.0, norm=50.0))]
        w1 = [r.model_id for r in rank(entries, "manhattan", params(weight=1.0, norm=50.0))]
        assert w0 == by_accuracy
        assert w1 == by_energy


def test_resolve_norm():
    assert resolve_norm([1.0, 5.0, 3.0], "auto") == 5.0
    assert resolve_norm([], 7.5) == 7.5
    with pytest.raises(ScoringError):
        resolve_norm([], "auto")
    with pytest.raises(ScoringError):
        resolve_norm([1.0], 0.0)


def test_grid_weight_zero_rows_constant_in_energy():
    grid = score_grid(params(weight=0.0, norm=10.0), (0.1, 100.0), (0.0, 100.0), 8)
    for i, row in enumerate(grid.values):
        assert len(set(row)) == 1
        assert row[0] == pytest.approx(grid.accuracies[i])


def test_ratio_grid_monotone_decreasing_in_energy():
    grid = score_grid(params(), (0.1, 100.0), (10.0, 100.0), 12, metric="ratio")
    for row in grid.values:
        assert all(a > b for a, b in zip(row, row[1:]))


def test_grid_values_equal_direct_calls():
    p = params(weight=0.7, norm=42.0)
    grid = score_grid(p, (0.5, 80.0), (0.0, 100.0), 9)
    for i, acc in enumerate(grid.accuracies):
        for j, e in enumerate(grid.energies):
            assert grid.values[i][j] == pytest.approx(
                manhattan_score(acc, e, p), abs=1e-12
            )


def test_grid_validation():
    with pytest.raises(ScoringError):
        score_grid(params(), (0.0, 10.0), (0.0, 100.0), 4)
    with pytest.raises(ScoringError):
        score_grid(params(), (1.0, 10.0), (50.0, 50.0), 4)
    with pytest.raises(ScoringError):
        score_grid(params(), (1.0, 10.0), (0.0, 100.0), 1)


def test_mean_accuracy_selection():
    accs = {"d1": 70.0, "d2": 80.0, "d3": 90.0}
    assert mean_accuracy(accs) == pytest.approx(80.0)
    assert mean_accuracy(accs, ["d1"]) == 70.0
    assert mean_accuracy(accs, ["d1", "d3"]) == pytest.approx(80.0)
    with pytest.raises(ScoringError, match="lacks"):
        mean_accuracy(accs, ["nope"])
