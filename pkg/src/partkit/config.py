"""Plain-text key=value configuration.

One flat namespace, `#` comments, no nesting.  Every key has a default and
every value is range-checked at load time; unknown keys are rejected so
typos surface immediately instead of silently running with defaults.
"""

from __future__ import annotations

from dataclasses import dataclass, fields, replace
from pathlib import Path
from typing import Optional

from .detection import Thresholds
from .errors import BadRatios, ConfigError, MissingFile
from .parts import GROUP_ORDER, PartKind, kind_from_name
from .regions import RegionConfig
from .synth import SynthConfig

_CANONICAL_GROUP_NAMES = tuple(g.value for g in GROUP_ORDER)


def _parse_bool(raw: str) -> bool:
    lowered = raw.lower()
    if lowered in ("true", "1", "yes"):
        return True
    if lowered in ("false", "0", "no"):
        return False
    raise ValueError(f"not a boolean: {raw!r}")


def _parse_optional_float(raw: str) -> Optional[float]:
    if raw.lower() == "none":
        return None
    return float(raw)


def parse_group_list(raw: str) -> tuple[PartKind, ...]:
    if not raw.strip():
        return ()
    groups = []
    for token in raw.split(","):
        name = token.strip()
        try:
            groups.append(kind_from_name(name))
        except KeyError:
            raise ValueError(f"unknown group name {name!r}") from None
    return tuple(groups)


@dataclass(frozen=True)
class ToolkitConfig:
    # region generation
    pad_w: float = 0.2
    pad_h: float = 0.2
    breast_pad_w: Optional[float] = None
    breast_pad_h: Optional[float] = None
    envelope_scale_tail: float = 1.0
    envelope_scale_wing: float = 1.0
    envelope_scale_leg: float = 0.6
    head_fallback_fraction: float = 0.1
    center_crop_fraction: float = 0.875
    tie_seed: int = 0
    # detection thresholds and localization scoring
    train_iou_min: float = 0.6
    score_min: float = 0.3
    pcp_iou_min: float = 0.5
    # classification
    svm_c: float = 1.0
    svm_epochs: int = 50
    l2_normalize: bool = False
    group_order: tuple[PartKind, ...] = GROUP_ORDER
    # randomness and splitting
    seed: int = 0
    train_frac: float = 0.5
    val_frac: float = 0.2
    test_frac: float = 0.3
    # synthetic corpus
    synth_classes: int = 4
    synth_images_per_class: int = 10
    synth_image_size: int = 200
    synth_jitter: float = 0.0
    synth_score_noise: float = 0.0
    synth_part_dropout: float = 0.0
    synth_feature_dim: int = 16
    synth_signal_groups: tuple[PartKind, ...] = GROUP_ORDER
    # default paths (positional CLI arguments take precedence)
    data_root: str = ""
    out_dir: str = ""

    def __post_init__(self):
        if not 0.0 < self.pcp_iou_min < 1.0:
            raise ConfigError("pcp_iou_min must be in (0, 1)")
        if sorted(g.value for g in self.group_order) != sorted(_CANONICAL_GROUP_NAMES):
            raise ConfigError(
                f"group_order must be a permutation of {', '.join(_CANONICAL_GROUP_NAMES)}"
            )
        ratios = (self.train_frac, self.val_frac, self.test_frac)
        if any(r <= 0 for r in ratios) or abs(sum(ratios) - 1.0) > 1e-9:
            raise BadRatios(f"split fractions must be positive and sum to 1, got {ratios}")
        # delegate the remaining range checks to the owning configs
        self.region_config()
        self.thresholds()
        self.synth_config()

    def region_config(self) -> RegionConfig:
        return RegionConfig(
            pad_w=self.pad_w,
            pad_h=self.pad_h,
            breast_pad_w=self.breast_pad_w,
            breast_pad_h=self.breast_pad_h,
            envelope_scales={
                PartKind.TAIL: self.envelope_scale_tail,
                PartKind.WING: self.envelope_scale_wing,
                PartKind.LEG: self.envelope_scale_leg,
            },
            head_fallback_fraction=self.head_fallback_fraction,
            center_crop_fraction=self.center_crop_fraction,
            tie_seed=self.tie_seed,
        )

    def thresholds(self) -> Thresholds:
        return Thresholds(train_iou_min=self.train_iou_min, score_min=self.score_min)

    def synth_config(self) -> SynthConfig:
        return SynthConfig(
            num_classes=self.synth_classes,
            images_per_class=self.synth_images_per_class,
            image_size=self.synth_image_size,
            jitter_px=self.synth_jitter,
            score_noise=self.synth_score_noise,
            part_dropout=self.synth_part_dropout,
            feature_dim=self.synth_feature_dim,
            signal_groups=frozenset(self.synth_signal_groups),
            seed=self.seed,
        )

    def ratios(self) -> tuple[float, float, float]:
        return (self.train_frac, self.val_frac, self.test_frac)

    def with_seed(self, seed: int) -> "ToolkitConfig":
        return replace(self, seed=seed)


_PARSERS = {
    "pad_w": float,
    "pad_h": float,
    "breast_pad_w": _parse_optional_float,
    "breast_pad_h": _parse_optional_float,
    "envelope_scale_tail": float,
    "envelope_scale_wing": float,
    "envelope_scale_leg": float,
    "head_fallback_fraction": float,
    "center_crop_fraction": float,
    "tie_seed": int,
    "train_iou_min": float,
    "score_min": float,
    "pcp_iou_min": float,
    "svm_c": float,
    "svm_epochs": int,
    "l2_normalize": _parse_bool,
    "group_order": parse_group_list,
    "seed": int,
    "train_frac": float,
    "val_frac": float,
    "test_frac": float,
    "synth_classes": int,
    "synth_images_per_class": int,
    "synth_image_size": int,
    "synth_jitter": float,
    "synth_score_noise": float,
    "synth_part_dropout": float,
    "synth_feature_dim": int,
    "synth_signal_groups": parse_group_list,
    "data_root": str,
    "out_dir": str,
}

assert set(_PARSERS) == {f.name for f in fields(ToolkitConfig)}


def parse_config_text(text: str, source: str = "<config>") -> ToolkitConfig:
    """Parse `key = value` lines; `#` starts a comment, blank lines ignored."""
    values: dict[str, object] = {}
    for line_no, raw in enumerate(text.splitlines(), start=1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        if "=" not in line:
            raise ConfigError(f"{source}:{line_no}: expected 'key = value', got {raw.strip()!r}")
        key, _, raw_value = line.partition("=")
        key = key.strip()
        raw_value = raw_value.strip()
        if key not in _PARSERS:
            raise ConfigError(f"{source}:{line_no}: unknown key {key!r}")
        if key in values:
            raise ConfigError(f"{source}:{line_no}: duplicate key {key!r}")
        try:
            values[key] = _PARSERS[key](raw_value)
        except ValueError as exc:
            raise ConfigError(f"{source}:{line_no}: bad value for {key}: {exc}") from None
    return ToolkitConfig(**values)


def load_config(path=None) -> ToolkitConfig:
    """Defaults when ``path`` is None, otherwise the parsed file."""
    if path is None:
        return ToolkitConfig()
    path = Path(path)
    if not path.is_file():
        raise MissingFile(path)
    return parse_config_text(path.read_text(encoding="utf-8"), source=str(path))
