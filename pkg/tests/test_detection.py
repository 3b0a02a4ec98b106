"""Two-threshold detection post-processing and localization scoring."""

from __future__ import annotations

import random

import pytest

from partkit.detection import (
    Detection,
    PcpReport,
    Thresholds,
    compute_pcp,
    filter_training_boxes,
    group_by_image,
    select_all,
    select_valid_parts,
)
from partkit.errors import ConfigError, InputError, ScoreOutOfRange
from partkit.geometry import Box, iou
from partkit.parts import REGION_KINDS, PartKind
from partkit.regions import PartRegionSet


def det(image_id, kind, score, box):
    return Detection(image_id, kind, score, box)


GT_BOX = Box(0.0, 0.0, 10.0, 10.0)


def box_with_iou(fraction: float) -> Box:
    """Axis cut of the 10x10 ground truth: iou(GT_BOX, cut) == fraction."""
    return Box(0.0, 0.0, 10.0, 10.0 * fraction)


class TestThresholds:
    def test_defaults(self):
        t = Thresholds()
        assert t.train_iou_min == 0.6
        assert t.score_min == 0.3

    def test_range_checks(self):
        with pytest.raises(ConfigError):
            Thresholds(train_iou_min=1.5)
        with pytest.raises(ConfigError):
            Thresholds(score_min=-0.1)

    def test_detection_score_range(self):
        with pytest.raises(ScoreOutOfRange):
            Detection(1, PartKind.HEAD, 1.2, GT_BOX)


class TestSelectValidParts:
    def test_highest_score_wins(self):
        dets = [
            det(1, PartKind.HEAD, 0.9, Box(0, 0, 10, 10)),
            det(1, PartKind.HEAD, 0.7, Box(5, 5, 15, 15)),
        ]
        selected = select_valid_parts(dets, 0.3)
        assert selected[PartKind.HEAD].score == 0.9

    def test_below_threshold_absent(self):
        dets = [det(1, PartKind.LEG, 0.25, GT_BOX)]
        assert PartKind.LEG not in select_valid_parts(dets, 0.3)

    def test_strictly_greater_required(self):
        for score, admitted in ((0.31, True), (0.30, False), (0.29, False)):
            dets = [det(1, PartKind.HEAD, score, GT_BOX)]
            assert (PartKind.HEAD in select_valid_parts(dets, 0.3)) is admitted

    def test_score_tie_smaller_area_wins(self):
        small = Box(0, 0, 10, 10)  # area 100
        large = Box(0, 0, 20, 20)  # area 400
        dets = [det(1, PartKind.WING, 0.5, large), det(1, PartKind.WING, 0.5, small)]
        assert select_valid_parts(dets, 0.3)[PartKind.WING].box == small

    def test_full_tie_lexicographic_corners(self):
        a = Box(0, 0, 10, 10)
        b = Box(1, 0, 11, 10)  # same area, larger x1
        dets = [det(1, PartKind.WING, 0.5, b), det(1, PartKind.WING, 0.5, a)]
        assert select_valid_parts(dets, 0.3)[PartKind.WING].box == a

    def test_one_entry_per_kind_and_scores_above_threshold(self):
        rng = random.Random(4)
        dets = []
        for _ in range(40):
            kind = rng.choice(REGION_KINDS)
            x1, y1 = rng.uniform(0, 50), rng.uniform(0, 50)
            dets.append(
                det(1, kind, round(rng.random(), 3), Box(x1, y1, x1 + 5, y1 + 5))
            )
        selected = select_valid_parts(dets, 0.4)
        assert len(selected) <= len(REGION_KINDS)
        for kind, chosen in selected.items():
            assert chosen.kind is kind
            assert chosen.score > 0.4
            same_kind = [d.score for d in dets if d.kind is kind]
            assert chosen.score == max(same_kind)

    def test_mixed_images_rejected(self):
        dets = [det(1, PartKind.HEAD, 0.5, GT_BOX), det(2, PartKind.HEAD, 0.5, GT_BOX)]
        with pytest.raises(InputError):
            select_valid_parts(dets, 0.3)

    def test_monotone_in_threshold(self):
        rng = random.Random(9)
        dets = [
            det(1, rng.choice(REGION_KINDS), round(rng.random(), 3), Box(0, 0, 5 + i, 5 + i))
            for i in range(30)
        ]
        previous = None
        for step in range(101):
            threshold = step / 100
            count = len(select_valid_parts(dets, threshold))
            if previous is not None:
                assert count <= previous
            previous = count


class TestFilterTrainingBoxes:
    def test_iou_above_threshold_kept(self):
        gt = PartRegionSet(1, {PartKind.HEAD: GT_BOX})
        kept = filter_training_boxes([det(1, PartKind.HEAD, 0.9, box_with_iou(0.7))], gt, 0.6)
        assert len(kept) == 1

    def test_iou_below_threshold_dropped(self):
        gt = PartRegionSet(1, {PartKind.HEAD: GT_BOX})
        assert filter_training_boxes([det(1, PartKind.HEAD, 0.9, box_with_iou(0.5))], gt, 0.6) == []

    def test_exact_threshold_kept(self):
        gt = PartRegionSet(1, {PartKind.HEAD: GT_BOX})
        kept = filter_training_boxes([det(1, PartKind.HEAD, 0.9, box_with_iou(0.6))], gt, 0.6)
        assert len(kept) == 1  # inclusive comparison

    def test_kind_without_ground_truth_dropped(self):
        gt = PartRegionSet(1, {PartKind.HEAD: GT_BOX})
        assert filter_training_boxes([det(1, PartKind.TAIL, 0.9, GT_BOX)], gt, 0.0) == []


class TestComputePcp:
    def _selected(self, per_image: dict[int, Box]) -> dict[int, dict[PartKind, Detection]]:
        return {
            image_id: {PartKind.HEAD: det(image_id, PartKind.HEAD, 0.9, box)}
            for image_id, box in per_image.items()
        }

    def _gt(self, image_ids) -> dict[int, PartRegionSet]:
        return {i: PartRegionSet(i, {PartKind.HEAD: GT_BOX}) for i in image_ids}

    def test_two_of_three_heads(self):
        selected = self._selected({1: box_with_iou(0.6), 2: box_with_iou(0.8), 3: box_with_iou(0.2)})
        report = compute_pcp(selected, self._gt([1, 2, 3]), 0.5)
        entry = report.per_kind[PartKind.HEAD]
        assert (entry.localized_count, entry.visible_count) == (2, 3)
        assert entry.pcp == pytest.approx(2 / 3)

    def test_exact_threshold_counts_as_localized(self):
        report = compute_pcp(self._selected({1: box_with_iou(0.5)}), self._gt([1]), 0.5)
        assert report.per_kind[PartKind.HEAD].localized_count == 1

    def test_selected_equal_to_gt_scores_one(self):
        report = compute_pcp(self._selected({1: GT_BOX, 2: GT_BOX}), self._gt([1, 2]), 0.5)
        assert report.per_kind[PartKind.HEAD].pcp == 1.0

    def test_missing_selection_counts_in_denominator(self):
        report = compute_pcp(self._selected({1: GT_BOX}), self._gt([1, 2]), 0.5)
        entry = report.per_kind[PartKind.HEAD]
        assert (entry.localized_count, entry.visible_count) == (1, 2)

    def test_kind_without_ground_truth_omitted(self):
        report = compute_pcp(self._selected({1: GT_BOX}), self._gt([1]), 0.5)
        assert PartKind.TAIL not in report.per_kind

    def test_selected_image_without_gt_ignored(self):
        report = compute_pcp(self._selected({1: GT_BOX, 9: GT_BOX}), self._gt([1]), 0.5)
        assert report.per_kind[PartKind.HEAD].visible_count == 1

    def test_threshold_domain(self):
        with pytest.raises(ConfigError):
            compute_pcp({}, self._gt([1]), 0.0)
        with pytest.raises(ConfigError):
            compute_pcp({}, self._gt([1]), 1.0)

    def test_matches_brute_force_recount(self):
        rng = random.Random(31)
        for _ in range(25):
            image_ids = list(range(1, rng.randint(2, 10)))
            gt = {}
            selected = {}
            for i in image_ids:
                regions = {}
                chosen = {}
                for kind in REGION_KINDS:
                    if rng.random() < 0.7:
                        x1, y1 = rng.uniform(0, 40), rng.uniform(0, 40)
                        regions[kind] = Box(x1, y1, x1 + rng.uniform(2, 20), y1 + rng.uniform(2, 20))
                    if rng.random() < 0.7:
                        x1, y1 = rng.uniform(0, 40), rng.uniform(0, 40)
                        chosen[kind] = det(
                            i, kind, 0.9, Box(x1, y1, x1 + rng.uniform(2, 20), y1 + rng.uniform(2, 20))
                        )
                if regions:
                    gt[i] = PartRegionSet(i, regions)
                if chosen:
                    selected[i] = chosen
            threshold = rng.uniform(0.05, 0.95)
            report = compute_pcp(selected, gt, threshold)

            # independent recount, one part kind at a time
            for kind in REGION_KINDS:
                visible = [i for i in gt if kind in gt[i].regions]
                localized = 0
                for i in visible:
                    pick = selected.get(i, {}).get(kind)
                    if pick is not None and iou(pick.box, gt[i].regions[kind]) >= threshold:
                        localized += 1
                if not visible:
                    assert kind not in report.per_kind
                else:
                    entry = report.per_kind[kind]
                    assert entry.visible_count == len(visible)
                    assert entry.localized_count == localized

    def test_raising_iou_threshold_never_increases_pcp(self):
        rng = random.Random(42)
        gt = {}
        selected = {}
        for i in range(1, 11):
            x1, y1 = rng.uniform(0, 20), rng.uniform(0, 20)
            gt[i] = PartRegionSet(i, {PartKind.HEAD: Box(x1, y1, x1 + 10, y1 + 10)})
            dx, dy = rng.uniform(-8, 8), rng.uniform(-8, 8)
            selected[i] = {
                PartKind.HEAD: det(i, PartKind.HEAD, 0.9, Box(x1 + dx, y1 + dy, x1 + 10 + dx, y1 + 10 + dy))
            }
        previous = None
        for step in range(1, 100):
            report = compute_pcp(selected, gt, step / 100)
            value = report.per_kind[PartKind.HEAD].pcp
            if previous is not None:
                assert value <= previous
            previous = value


class TestReportAndHelpers:
    def test_tsv_format(self):
        selected = {
            i: {PartKind.HEAD: det(i, PartKind.HEAD, 0.9, box)}
            for i, box in {1: box_with_iou(0.6), 2: box_with_iou(0.8), 3: box_with_iou(0.2)}.items()
        }
        gt = {i: PartRegionSet(i, {PartKind.HEAD: GT_BOX}) for i in (1, 2, 3)}
        tsv = compute_pcp(selected, gt, 0.5).to_tsv()
        lines = tsv.splitlines()
        assert lines[0] == "#iou_threshold=0.5"
        assert lines[1] == "head\t2\t3\t0.6667"

    def test_group_by_image(self):
        dets = [det(2, PartKind.HEAD, 0.5, GT_BOX), det(1, PartKind.TAIL, 0.5, GT_BOX)]
        grouped = group_by_image(dets)
        assert set(grouped) == {1, 2}

    def test_select_all(self):
        dets = [
            det(1, PartKind.HEAD, 0.9, GT_BOX),
            det(1, PartKind.HEAD, 0.8, Box(1, 1, 2, 2)),
            det(2, PartKind.TAIL, 0.7, GT_BOX),
            det(2, PartKind.TAIL, 0.1, Box(1, 1, 2, 2)),
        ]
        selected = select_all(dets, 0.3)
        assert selected[1][PartKind.HEAD].score == 0.9
        assert selected[2][PartKind.TAIL].score == 0.7

    def test_empty_report_tsv(self):
        report = PcpReport(iou_threshold=0.5)
        assert report.to_tsv() == "#iou_threshold=0.5\n"
