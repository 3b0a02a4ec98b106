"""Detector output post-processing and part-localization scoring.

Raw per-image candidates are reduced to at most one box per part kind (the
highest-scoring candidate above a confidence floor), and localization
quality is reported as the fraction of visible ground-truth parts whose
selected box overlaps ground truth at or above an IoU cutoff.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Iterable, Mapping, Sequence

from .errors import ConfigError, InputError, ScoreOutOfRange
from .geometry import Box, iou
from .parts import REGION_KINDS, PartKind
from .regions import PartRegionSet


@dataclass(frozen=True)
class Detection:
    """One scored candidate box for a part kind on one image."""

    image_id: int
    kind: PartKind
    score: float
    box: Box

    def __post_init__(self):
        if not 0.0 <= self.score <= 1.0:
            raise ScoreOutOfRange(f"score {self.score} outside [0, 1]")


@dataclass(frozen=True)
class Thresholds:
    """train_iou_min filters training boxes by IoU against ground truth;
    score_min is the confidence a detection must exceed to count at test
    time."""

    train_iou_min: float = 0.6
    score_min: float = 0.3

    def __post_init__(self):
        if not 0.0 <= self.train_iou_min <= 1.0:
            raise ConfigError("train_iou_min must be in [0, 1]")
        if not 0.0 <= self.score_min <= 1.0:
            raise ConfigError("score_min must be in [0, 1]")


@dataclass(frozen=True)
class PcpEntry:
    localized_count: int
    visible_count: int

    @property
    def pcp(self) -> float:
        return self.localized_count / self.visible_count


@dataclass
class PcpReport:
    iou_threshold: float
    per_kind: dict[PartKind, PcpEntry] = field(default_factory=dict)

    def to_tsv(self) -> str:
        lines = [f"#iou_threshold={self.iou_threshold!r}"]
        for kind in REGION_KINDS:
            entry = self.per_kind.get(kind)
            if entry is None:
                continue
            lines.append(
                f"{kind.value}\t{entry.localized_count}\t{entry.visible_count}\t{entry.pcp:.4f}"
            )
        return "".join(line + "\n" for line in lines)


def _require_single_image(detections: Sequence[Detection]) -> None:
    ids = {d.image_id for d in detections}
    if len(ids) > 1:
        raise InputError(f"detections span multiple images: {sorted(ids)}")


def select_valid_parts(
    detections: Sequence[Detection], score_min: float
) -> dict[PartKind, Detection]:
    """Best valid detection per part kind for one image.

    A detection is valid only when its score is strictly greater than
    ``score_min``; among valid ones of the same kind the highest score wins,
    with exact ties going to the smaller box, then lexicographically
    smaller corners.
    """
    _require_single_image(detections)
    selected: dict[PartKind, Detection] = {}
    for kind in REGION_KINDS:
        valid = [d for d in detections if d.kind is kind and d.score > score_min]
        if not valid:
            continue
        valid.sort(key=lambda d: (-d.score, d.box.area, d.box.x1, d.box.y1, d.box.x2, d.box.y2))
        selected[kind] = valid[0]
    return selected


def filter_training_boxes(
    predicted: Sequence[Detection], ground_truth: PartRegionSet, train_iou_min: float
) -> list[Detection]:
    """Keep predictions overlapping same-kind ground truth at IoU >= the
    threshold; predictions of kinds without ground truth are dropped."""
    _require_single_image(predicted)
    kept = []
    for det in predicted:
        reference = ground_truth.regions.get(det.kind)
        if reference is not None and iou(det.box, reference) >= train_iou_min:
            kept.append(det)
    return kept


def compute_pcp(
    selected: Mapping[int, Mapping[PartKind, Detection]],
    ground_truth: Mapping[int, PartRegionSet],
    iou_threshold: float = 0.5,
) -> PcpReport:
    """Percentage of correctly localized parts, per part kind.

    A visible ground-truth part counts as localized iff a selected
    detection of that kind exists and overlaps it at IoU >= iou_threshold;
    the denominator is the number of images where the part exists.  Parts
    visible nowhere are omitted from the report rather than reported as
    failures.
    """
    if not 0.0 < iou_threshold < 1.0:
        raise ConfigError("iou_threshold must be in (0, 1)")
    localized = {kind: 0 for kind in REGION_KINDS}
    visible = {kind: 0 for kind in REGION_KINDS}
    for image_id in sorted(ground_truth):
        regions = ground_truth[image_id].regions
        chosen = selected.get(image_id, {})
        for kind, reference in regions.items():
            visible[kind] += 1
            det = chosen.get(kind)
            if det is not None and iou(det.box, reference) >= iou_threshold:
                localized[kind] += 1
    report = PcpReport(iou_threshold=iou_threshold)
    for kind in REGION_KINDS:
        if visible[kind] > 0:
            report.per_kind[kind] = PcpEntry(localized[kind], visible[kind])
    return report


def group_by_image(detections: Iterable[Detection]) -> dict[int, list[Detection]]:
    grouped: dict[int, list[Detection]] = {}
    for det in detections:
        grouped.setdefault(det.image_id, []).append(det)
    return grouped


def select_all(
    detections: Iterable[Detection], score_min: float
) -> dict[int, dict[PartKind, Detection]]:
    """select_valid_parts applied per image over a mixed detection list."""
    return {
        image_id: select_valid_parts(dets, score_min)
        for image_id, dets in sorted(group_by_image(detections).items())
    }
