"""Part vocabulary shared across the toolkit.

Five bird part regions are derived from the 15 CUB-style keypoints; two
pseudo-groups (the full image and its center crop) join them downstream as
feature groups.
"""

from __future__ import annotations

import enum


class PartKind(enum.Enum):
    """A part region or whole-image feature group."""

    HEAD = "head"
    BREAST = "breast"
    TAIL = "tail"
    WING = "wing"
    LEG = "leg"
    ORIGINAL = "original"
    CROPPED = "cropped"

    def __str__(self) -> str:
        return self.value


#: Region kinds in the fixed generation order (head first: envelope parts
#: scale from the head box, and left/right elimination for a later part sees
#: every earlier one).
REGION_KINDS: tuple[PartKind, ...] = (
    PartKind.HEAD,
    PartKind.BREAST,
    PartKind.TAIL,
    PartKind.WING,
    PartKind.LEG,
)

#: Feature groups in canonical concatenation order.
GROUP_ORDER: tuple[PartKind, ...] = (
    PartKind.ORIGINAL,
    PartKind.CROPPED,
    PartKind.HEAD,
    PartKind.WING,
    PartKind.BREAST,
    PartKind.LEG,
    PartKind.TAIL,
)

#: Canonical CUB part-keypoint names, indexed by part_id 1..15.
CUB_PART_NAMES: tuple[str, ...] = (
    "back",
    "beak",
    "belly",
    "breast",
    "crown",
    "forehead",
    "left eye",
    "left leg",
    "left wing",
    "nape",
    "right eye",
    "right leg",
    "right wing",
    "tail",
    "throat",
)

#: Keypoint names contributing to each part region.  "back" feeds no region.
KIND_TO_KEYPOINT_NAMES: dict[PartKind, frozenset[str]] = {
    PartKind.HEAD: frozenset(
        {"beak", "crown", "forehead", "left eye", "nape", "right eye", "throat"}
    ),
    PartKind.BREAST: frozenset({"belly", "breast"}),
    PartKind.TAIL: frozenset({"tail"}),
    PartKind.WING: frozenset({"left wing", "right wing"}),
    PartKind.LEG: frozenset({"left leg", "right leg"}),
}

_NAME_TO_KIND = {k.value: k for k in PartKind}


def kind_from_name(name: str) -> PartKind:
    """Look up a PartKind by its lowercase file-format name."""
    try:
        return _NAME_TO_KIND[name]
    except KeyError:
        raise KeyError(f"unknown part/group name: {name!r}") from None


def keypoint_ids_for(kind: PartKind, part_names: dict[int, str]) -> frozenset[int]:
    """Resolve the keypoint ids feeding ``kind`` from a part-name table.

    ``part_names`` maps part_id -> name as parsed from ``parts/parts.txt``;
    names are matched case-insensitively.
    """
    wanted = KIND_TO_KEYPOINT_NAMES[kind]
    return frozenset(
        pid for pid, name in part_names.items() if name.strip().lower() in wanted
    )
