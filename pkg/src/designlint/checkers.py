"""Deterministic guideline-violation checkers.

Each checker is a pure function over extracted property records (or mapped
component instances plus a snapshot) and emits Violation records tied to a
knowledge-base guideline through the rule table shipped with the KB bundle.
Thresholds live in one overridable structure; none of them are exceeded
without a violation and no violation is emitted at or below its threshold.

Evidence keys per rule:

    contrast          contrast_ratio, required, fg, bg, font_size_px
    label-overflow    label_width, content_width, bbox_width, padding_h
    target-size       width, height, required
    missing-label     tag
    heading-order     previous_level, level
    spacing-symmetry  padding_left, padding_right, difference, tolerance
"""

from __future__ import annotations

import json
from dataclasses import dataclass, replace
from pathlib import Path

from .color import to_hex
from .errors import DesignLintError
from .extraction import (
    ComponentInstance,
    Confidence,
    ExtractionBundle,
    PropertyRecord,
)
from .kb import ConstraintKind, KnowledgeBase, PropertyGroup, Tier
from .staticdom import TEXT_WIDTH_FACTOR
from .snapshot import DomSnapshot


@dataclass(frozen=True)
class Thresholds:
    """Numeric limits used by the checkers; override via CLI config."""

    contrast_normal: float = 4.5
    contrast_large: float = 3.0
    large_text_min_px: float = 24.0
    min_target_px: float = 48.0
    spacing_tolerance_px: float = 2.0
    max_heading_jump: int = 1

    @classmethod
    def from_overrides(cls, overrides: dict) -> "Thresholds":
        base = cls()
        unknown = set(overrides) - set(base.__dataclass_fields__)
        if unknown:
            raise DesignLintError(f"unknown threshold keys: {sorted(unknown)}")
        return replace(base, **overrides)

    @classmethod
    def from_file(cls, path: str | Path) -> "Thresholds":
        return cls.from_overrides(json.loads(Path(path).read_text(encoding="utf-8")))


DEFAULT_THRESHOLDS = Thresholds()


class RuleTableError(DesignLintError):
    pass


@dataclass(frozen=True)
class RuleBinding:
    rule: str
    guideline_id: str
    unit_kind: str  # "component" | "property"
    unit_name: str


# Expected tier/kind of the bound guideline, enforced at load time.
_RULE_CONTRACT: dict[str, tuple[Tier, ConstraintKind]] = {
    "contrast": (Tier.SYSTEM, ConstraintKind.HARD),
    "label-overflow": (Tier.COMPONENT, ConstraintKind.HARD),
    "target-size": (Tier.SYSTEM, ConstraintKind.HARD),
    "missing-label": (Tier.SYSTEM, ConstraintKind.HARD),
    "heading-order": (Tier.SYSTEM, ConstraintKind.HARD),
    "spacing-symmetry": (Tier.SYSTEM, ConstraintKind.HARD),
}

RULES_FILENAME = "checker_rules.json"


def load_rule_table(bundle_path: str | Path, kb: KnowledgeBase) -> dict[str, RuleBinding]:
    """Load the rule -> guideline mapping; unmappable rules are an error."""
    path = Path(bundle_path) / RULES_FILENAME
    if not path.is_file():
        raise RuleTableError(f"rule table missing: {path}")
    raw = json.loads(path.read_text(encoding="utf-8"))
    table: dict[str, RuleBinding] = {}
    for rule, spec in sorted(raw.items()):
        if rule not in _RULE_CONTRACT:
            raise RuleTableError(f"unknown checker rule {rule!r} in {path}")
        guideline_id = spec.get("guideline_id", "")
        if guideline_id not in kb.entries:
            raise RuleTableError(f"rule {rule!r} maps to missing guideline {guideline_id!r}")
        entry = kb.entries[guideline_id]
        expected_tier, expected_kind = _RULE_CONTRACT[rule]
        if entry.tier is not expected_tier or entry.constraint_kind is not expected_kind:
            raise RuleTableError(
                f"rule {rule!r} needs a {expected_tier.value}-tier "
                f"{expected_kind.value} guideline, got {guideline_id}"
            )
        unit = spec.get("unit", {})
        table[rule] = RuleBinding(
            rule=rule,
            guideline_id=guideline_id,
            unit_kind=unit.get("kind", ""),
            unit_name=unit.get("name", ""),
        )
    missing = set(_RULE_CONTRACT) - set(table)
    if missing:
        raise RuleTableError(f"rule table lacks bindings for: {sorted(missing)}")
    return table


@dataclass(frozen=True)
class Violation:
    rule: str
    guideline_id: str
    constraint_kind: ConstraintKind
    xpath: str | None
    source_span: tuple[int, int] | None
    evidence: dict
    message: str
    confidence: Confidence


def _violation(
    binding: RuleBinding,
    record_or_xpath,
    evidence: dict,
    message: str,
    confidence: Confidence,
) -> Violation:
    xpath = record_or_xpath.xpath if isinstance(record_or_xpath, PropertyRecord) else record_or_xpath
    return Violation(
        rule=binding.rule,
        guideline_id=binding.guideline_id,
        constraint_kind=ConstraintKind.HARD,
        xpath=xpath,
        source_span=None,
        evidence=evidence,
        message=message,
        confidence=confidence,
    )


def check_contrast(
    records: list[PropertyRecord],
    rules: dict[str, RuleBinding],
    thresholds: Thresholds = DEFAULT_THRESHOLDS,
) -> list[Violation]:
    """Flag text whose contrast ratio is below the size-dependent minimum."""
    binding = rules["contrast"]
    out = []
    for record in records:
        ratio = record.values["contrast_ratio"]
        font_size = record.values.get("font_size_px", 16.0)
        required = (
            thresholds.contrast_large
            if font_size >= thresholds.large_text_min_px
            else thresholds.contrast_normal
        )
        if ratio < required:
            out.append(
                _violation(
                    binding,
                    record,
                    {
                        "contrast_ratio": ratio,
                        "required": required,
                        "fg": to_hex(record.values["fg"]),
                        "bg": to_hex(record.values["bg"]),
                        "font_size_px": font_size,
                    },
                    f"text contrast {ratio:.2f}:1 is below the required {required}:1",
                    record.confidence,
                )
            )
    return out


def check_label_overflow(
    components: list[ComponentInstance],
    snapshot: DomSnapshot,
    rules: dict[str, RuleBinding],
    thresholds: Thresholds = DEFAULT_THRESHOLDS,
) -> list[Violation]:
    """Flag buttons whose estimated label width exceeds their content width."""
    binding = rules["label-overflow"]
    button_tags = {"button"} | {
        c.raw_name.lower() for c in components if c.canonical_type == "button"
    }
    confidence = Confidence.ESTIMATED if snapshot.estimated else Confidence.MEASURED
    out = []
    for node in snapshot.nodes:
        if node.styles.get("display") == "none":
            continue
        if node.tag not in button_tags and node.attributes.get("role") != "button":
            continue
        if not node.text:
            continue
        font_size = node.style_px("font-size", 16.0)
        label_width = TEXT_WIDTH_FACTOR * font_size * len(node.text)
        padding_h = node.style_px("padding-left") + node.style_px("padding-right")
        content_width = node.bbox.width - padding_h
        if label_width > content_width:
            out.append(
                _violation(
                    binding,
                    node.xpath,
                    {
                        "label_width": label_width,
                        "content_width": content_width,
                        "bbox_width": node.bbox.width,
                        "padding_h": padding_h,
                    },
                    f"button label needs {label_width:g}px but the container "
                    f"leaves {content_width:g}px",
                    confidence,
                )
            )
    return out


def check_target_size(
    records: list[PropertyRecord],
    rules: dict[str, RuleBinding],
    thresholds: Thresholds = DEFAULT_THRESHOLDS,
) -> list[Violation]:
    binding = rules["target-size"]
    out = []
    for record in records:
        if record.values.get("display") == "inline":
            continue  # inline targets (links in running text) are exempt
        width, height = record.values["width"], record.values["height"]
        if width < thresholds.min_target_px or height < thresholds.min_target_px:
            out.append(
                _violation(
                    binding,
                    record,
                    {"width": width, "height": height, "required": thresholds.min_target_px},
                    f"clickable target is {width:g}x{height:g}px, below "
                    f"{thresholds.min_target_px:g}x{thresholds.min_target_px:g}px",
                    record.confidence,
                )
            )
    return out


_NAME_REQUIRED_TAGS = ("img", "input", "button")


def check_missing_label(
    records: list[PropertyRecord],
    rules: dict[str, RuleBinding],
    thresholds: Thresholds = DEFAULT_THRESHOLDS,
) -> list[Violation]:
    binding = rules["missing-label"]
    out = []
    for record in records:
        tag = record.values.get("tag")
        if tag in _NAME_REQUIRED_TAGS and record.values.get("accessible_name") is None:
            out.append(
                _violation(
                    binding,
                    record,
                    {"tag": tag},
                    f"<{tag}> has no accessible name (alt, aria-label, or label)",
                    record.confidence,
                )
            )
    return out


def check_heading_order(
    records: list[PropertyRecord],
    rules: dict[str, RuleBinding],
    thresholds: Thresholds = DEFAULT_THRESHOLDS,
) -> list[Violation]:
    binding = rules["heading-order"]
    out = []
    previous: int | None = None
    for record in records:
        level = record.values.get("heading_level")
        if level is None:
            continue
        if previous is not None and level - previous > thresholds.max_heading_jump:
            out.append(
                _violation(
                    binding,
                    record,
                    {"previous_level": previous, "level": level},
                    f"heading jumps from h{previous} to h{level}",
                    record.confidence,
                )
            )
        previous = level
    return out


def check_spacing_symmetry(
    records: list[PropertyRecord],
    rules: dict[str, RuleBinding],
    thresholds: Thresholds = DEFAULT_THRESHOLDS,
) -> list[Violation]:
    binding = rules["spacing-symmetry"]
    out = []
    for record in records:
        padding = record.values["padding"]
        left, right = padding[3], padding[1]
        difference = abs(left - right)
        if difference > thresholds.spacing_tolerance_px:
            out.append(
                _violation(
                    binding,
                    record,
                    {
                        "padding_left": left,
                        "padding_right": right,
                        "difference": difference,
                        "tolerance": thresholds.spacing_tolerance_px,
                    },
                    f"horizontal padding differs by {difference:g}px "
                    f"({left:g} left vs {right:g} right)",
                    record.confidence,
                )
            )
    return out


def run_checkers(
    bundle: ExtractionBundle,
    snapshot: DomSnapshot,
    rules: dict[str, RuleBinding],
    thresholds: Thresholds = DEFAULT_THRESHOLDS,
) -> list[Violation]:
    """Run every deterministic checker; result ordered by (xpath, rule)."""
    groups = bundle.property_groups
    violations = [
        *check_contrast(groups[PropertyGroup.COLOR], rules, thresholds),
        *check_label_overflow(bundle.components, snapshot, rules, thresholds),
        *check_target_size(groups[PropertyGroup.CLICKABLE], rules, thresholds),
        *check_missing_label(groups[PropertyGroup.LABEL], rules, thresholds),
        *check_heading_order(groups[PropertyGroup.TEXT], rules, thresholds),
        *check_spacing_symmetry(groups[PropertyGroup.SPACING], rules, thresholds),
    ]
    return sorted(violations, key=lambda v: (v.xpath or "", v.rule))
