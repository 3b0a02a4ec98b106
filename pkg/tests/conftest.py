"""Shared builders for on-disk annotation trees used across test modules."""

from __future__ import annotations

from pathlib import Path
from typing import Optional, Sequence

from partkit.parts import CUB_PART_NAMES


def keypoint_position(part_id: int) -> tuple[float, float]:
    """Distinct, non-collinear spot per part id, inside a 200x200 image."""
    return (10.0 + 5.0 * part_id, 10.0 + 7.0 * part_id)


def default_part_rows(image_ids: Sequence[int]) -> list[str]:
    rows = []
    for image_id in image_ids:
        for part_id in range(1, len(CUB_PART_NAMES) + 1):
            x, y = keypoint_position(part_id)
            rows.append(f"{image_id} {part_id} {x} {y} 1")
    return rows


def build_tree(
    root: Path,
    images: Sequence[tuple[int, str, int, int, int]],
    part_rows: Optional[Sequence[str]] = None,
    part_names: Sequence[str] = CUB_PART_NAMES,
) -> Path:
    """Write a complete annotation tree.

    ``images`` rows are (image_id, relative_path, class_id, width, height);
    ``part_rows`` are raw part_locs.txt lines (defaults to every part
    visible at its canonical toy position).
    """
    root = Path(root)
    (root / "parts").mkdir(parents=True, exist_ok=True)
    lines = lambda rows: "".join(f"{row}\n" for row in rows)

    (root / "images.txt").write_text(
        lines(f"{i} {path}" for i, path, _, _, _ in images), encoding="utf-8"
    )
    (root / "image_sizes.txt").write_text(
        lines(f"{i} {w} {h}" for i, _, _, w, h in images), encoding="utf-8"
    )
    (root / "image_class_labels.txt").write_text(
        lines(f"{i} {c}" for i, _, c, _, _ in images), encoding="utf-8"
    )
    class_ids = sorted({c for _, _, c, _, _ in images})
    (root / "classes.txt").write_text(
        lines(f"{c} {c:03d}.Class_{c:03d}" for c in class_ids), encoding="utf-8"
    )
    (root / "parts" / "parts.txt").write_text(
        lines(f"{i} {name}" for i, name in enumerate(part_names, start=1)), encoding="utf-8"
    )
    if part_rows is None:
        part_rows = default_part_rows([i for i, _, _, _, _ in images])
    (root / "parts" / "part_locs.txt").write_text(lines(part_rows), encoding="utf-8")
    return root


def toy_images(n: int = 3, size: int = 200) -> list[tuple[int, str, int, int, int]]:
    return [(i, f"{1:03d}.Class_001/img_{i:04d}.jpg", 1, size, size) for i in range(1, n + 1)]
