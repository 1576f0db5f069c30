"""Confusion counts, sweeps, and the threshold-selection rule."""

from __future__ import annotations

import random

import pytest

from conftest import DATA_DIR
from memeground.errors import CoverageError, FormatError, SelectionError
from memeground.evaluation import (
    LabeledExample,
    SweepPoint,
    confusion,
    default_grid,
    read_labels_tsv,
    read_sweep_tsv,
    select_threshold,
    sweep,
    write_sweep_tsv,
)

FOUR_LABELS = [
    LabeledExample("p1", True),
    LabeledExample("p2", False),
    LabeledExample("p3", True),
    LabeledExample("p4", False),
]
FOUR_SCORES = {"p1": 0.9, "p2": 0.7, "p3": 0.5, "p4": 0.3}


def point(threshold, precision, recall) -> SweepPoint:
    return SweepPoint(
        threshold=threshold,
        tp=0,
        fp=0,
        tn=0,
        fn=0,
        precision=precision,
        recall=recall,
        f1=0.0,
        predicted_meme_count=0,
    )


class TestConfusion:
    def test_enumerated_example(self):
        tp, fp, tn, fn = confusion(FOUR_LABELS, FOUR_SCORES, 0.6)
        assert (tp, fp, tn, fn) == (1, 1, 1, 1)
        points = sweep(FOUR_LABELS, FOUR_SCORES, [0.6])
        assert points[0].precision == 0.5 and points[0].recall == 0.5

    def test_all_below_threshold(self):
        tp, fp, tn, fn = confusion(FOUR_LABELS, FOUR_SCORES, 0.95)
        assert (tp, fp) == (0, 0)
        assert sweep(FOUR_LABELS, FOUR_SCORES, [0.95])[0].precision == 0.0

    def test_empty_label_set(self):
        assert confusion([], {}, 0.5) == (0, 0, 0, 0)

    def test_missing_score(self):
        with pytest.raises(CoverageError) as err:
            confusion(FOUR_LABELS, {"p1": 0.9}, 0.5)
        assert err.value.missing_ids == ["p2", "p3", "p4"]

    def test_boundary_is_predicted(self):
        tp, fp, tn, fn = confusion([LabeledExample("x", True)], {"x": 0.6}, 0.6)
        assert (tp, fn) == (1, 0)

    def test_matches_independent_oracle(self):
        # Oracle counts via set algebra instead of the per-item branch chain.
        rng = random.Random(17)
        for _ in range(100):
            size = rng.randrange(0, 300)
            labels = [LabeledExample(f"p{i}", rng.random() < 0.5) for i in range(size)]
            scores = {f"p{i}": rng.random() for i in range(size)}
            t = rng.random()
            memes = {x.post_id for x in labels if x.is_meme}
            predicted = {pid for pid, s in scores.items() if s >= t}
            expected = (
                len(memes & predicted),
                len(predicted - memes),
                size - len(memes | predicted),
                len(memes - predicted),
            )
            assert confusion(labels, scores, t) == expected

    def test_counts_sum_to_label_size(self):
        rng = random.Random(19)
        for _ in range(50):
            size = rng.randrange(0, 100)
            labels = [LabeledExample(f"p{i}", rng.random() < 0.4) for i in range(size)]
            scores = {f"p{i}": rng.random() for i in range(size)}
            assert sum(confusion(labels, scores, rng.random())) == size


class TestSweep:
    def test_predicted_counts_over_grid(self):
        # At 0.70 the 0.7-scored item still counts (boundary is >=), so the
        # counts are 3, 2, 2.
        points = sweep(FOUR_LABELS, FOUR_SCORES, [0.5, 0.6, 0.7])
        assert [p.predicted_meme_count for p in points] == [3, 2, 2]

    def test_single_threshold(self):
        assert len(sweep(FOUR_LABELS, FOUR_SCORES, [0.6])) == 1

    def test_duplicate_thresholds_pass_through(self):
        points = sweep(FOUR_LABELS, FOUR_SCORES, [0.6, 0.6])
        assert points[0] == points[1]

    def test_recall_non_increasing_property(self):
        rng = random.Random(29)
        for _ in range(50):
            size = rng.randrange(1, 200)
            labels = [LabeledExample(f"p{i}", rng.random() < 0.5) for i in range(size)]
            scores = {f"p{i}": rng.random() for i in range(size)}
            points = sweep(labels, scores, default_grid())
            recalls = [p.recall for p in points]
            assert all(a >= b for a, b in zip(recalls, recalls[1:]))
            counts = [p.predicted_meme_count for p in points]
            assert all(a >= b for a, b in zip(counts, counts[1:]))

    def test_default_grid(self):
        grid = default_grid()
        assert grid[0] == 0.50 and grid[-1] == 0.70 and len(grid) == 21


class TestSelectThreshold:
    def test_paper_shaped_selection(self):
        points = [point(0.5, 0.77, 0.80), point(0.6, 0.95, 0.55), point(0.7, 1.00, 0.38)]
        assert select_threshold(points, min_precision=0.9) == 0.6

    def test_no_qualifying_point(self):
        with pytest.raises(SelectionError):
            select_threshold([point(0.5, 0.5, 0.9)], min_precision=0.9)

    def test_recall_tie_goes_to_higher_precision(self):
        points = [point(0.55, 0.92, 0.6), point(0.6, 0.95, 0.6)]
        assert select_threshold(points, min_precision=0.9) == 0.6

    def test_full_tie_goes_to_lower_threshold(self):
        points = [point(0.6, 0.95, 0.6), point(0.55, 0.95, 0.6)]
        assert select_threshold(points, min_precision=0.9) == 0.55

    def test_boundary_precision_qualifies(self):
        assert select_threshold([point(0.5, 0.9, 0.5)], min_precision=0.9) == 0.5

    def test_selection_is_member_with_required_precision(self):
        rng = random.Random(37)
        for _ in range(100):
            points = [
                point(t / 100, rng.random(), rng.random()) for t in range(50, 71)
            ]
            try:
                chosen = select_threshold(points, min_precision=0.9)
            except SelectionError:
                assert all(p.precision < 0.9 for p in points)
                continue
            matching = [p for p in points if p.threshold == chosen]
            assert matching and any(p.precision >= 0.9 for p in matching)


class TestFiles:
    def test_labels_roundtrip(self, tmp_path):
        path = tmp_path / "labels.tsv"
        path.write_text("p1\t1\np2\t0\n", encoding="utf-8")
        assert read_labels_tsv(path) == [
            LabeledExample("p1", True),
            LabeledExample("p2", False),
        ]

    def test_labels_bad_value(self, tmp_path):
        path = tmp_path / "labels.tsv"
        path.write_text("p1\tyes\n", encoding="utf-8")
        with pytest.raises(FormatError, match="row 1"):
            read_labels_tsv(path)

    def test_labels_duplicate_id(self, tmp_path):
        path = tmp_path / "labels.tsv"
        path.write_text("p1\t1\np1\t0\n", encoding="utf-8")
        with pytest.raises(FormatError, match="duplicate"):
            read_labels_tsv(path)

    def test_sweep_tsv_roundtrip(self, tmp_path):
        points = sweep(FOUR_LABELS, FOUR_SCORES, [0.5, 0.6, 0.7])
        path = tmp_path / "sweep.tsv"
        write_sweep_tsv(points, path)
        reread = read_sweep_tsv(path)
        assert [p.threshold for p in reread] == [0.5, 0.6, 0.7]
        assert [p.predicted_meme_count for p in reread] == [3, 2, 2]
        assert [(p.tp, p.fp, p.tn, p.fn) for p in reread] == [
            (p.tp, p.fp, p.tn, p.fn) for p in points
        ]

    def test_fig2_fixture_selects_060(self):
        points = read_sweep_tsv(DATA_DIR / "sweep_fig2.tsv")
        assert select_threshold(points, min_precision=0.9) == 0.60
