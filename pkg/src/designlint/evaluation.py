"""Scoring against labeled ground truth, with ablation modes.

Ground truth is a line-delimited JSON file of labels (fixture, guideline
id, locus, constraint kind, origin). A prediction matches a label when the
guideline ids agree and the loci overlap: identical xpath, or spans whose
character overlap covers at least half of the shorter span. Matching is
one-to-one and greedy by overlap quality.

Ablation modes mirror the strategy-isolation protocol: each repair mode
disables the complementary stream and is scored only against the matching
label subset.
"""

from __future__ import annotations

import json
import warnings as _std_warnings
from dataclasses import dataclass
from enum import Enum
from pathlib import Path

from .errors import DesignLintError
from .kb import ConstraintKind
from .repair import Origin, RepairSuggestion

OVERLAP_THRESHOLD = 0.5


class EvalMode(str, Enum):
    DETECT = "detect"
    REPAIR_ALL = "repair-all"
    REPAIR_COMPONENT_ONLY = "repair-component-only"
    REPAIR_PROPERTY_ONLY = "repair-property-only"
    REPAIR_SOFT_ONLY = "repair-soft-only"
    REPAIR_HARD_ONLY = "repair-hard-only"


class GroundTruthError(DesignLintError):
    pass


class EmptySubsetWarning(UserWarning):
    pass


@dataclass(frozen=True)
class GroundTruthLabel:
    fixture: str
    guideline_id: str
    constraint_kind: ConstraintKind
    origin: Origin
    xpath: str | None = None
    span: tuple[int, int] | None = None


def load_labels(path: str | Path) -> list[GroundTruthLabel]:
    labels = []
    text = Path(path).read_text(encoding="utf-8")
    for lineno, line in enumerate(text.splitlines(), start=1):
        if not line.strip():
            continue
        try:
            raw = json.loads(line)
        except json.JSONDecodeError as exc:
            raise GroundTruthError(f"{path}:{lineno}: invalid JSON: {exc}")
        for key in ("fixture", "guideline_id", "constraint_kind", "origin"):
            if key not in raw:
                raise GroundTruthError(f"{path}:{lineno}: missing field {key!r}")
        span = tuple(raw["span"]) if raw.get("span") is not None else None
        if raw.get("xpath") is None and span is None:
            raise GroundTruthError(f"{path}:{lineno}: label needs an xpath or a span")
        labels.append(
            GroundTruthLabel(
                fixture=raw["fixture"],
                guideline_id=raw["guideline_id"],
                constraint_kind=ConstraintKind(raw["constraint_kind"]),
                origin=Origin(raw["origin"]),
                xpath=raw.get("xpath"),
                span=span,
            )
        )
    return labels


@dataclass(frozen=True)
class Prediction:
    """Locus+guideline view of a Violation or RepairSuggestion."""

    guideline_ids: tuple[str, ...]
    xpath: str | None
    span: tuple[int, int] | None

    @classmethod
    def from_violation(cls, violation) -> "Prediction":
        return cls(
            guideline_ids=(violation.guideline_id,),
            xpath=violation.xpath,
            span=violation.source_span,
        )

    @classmethod
    def from_suggestion(cls, suggestion: RepairSuggestion) -> "Prediction":
        return cls(
            guideline_ids=suggestion.guideline_ids,
            xpath=None,
            span=suggestion.target_span,
        )


def _span_overlap(a: tuple[int, int], b: tuple[int, int]) -> float:
    inter = min(a[1], b[1]) - max(a[0], b[0])
    if inter <= 0:
        return 0.0
    shorter = min(a[1] - a[0], b[1] - b[0])
    return inter / shorter if shorter > 0 else 0.0


def _match_score(
    prediction: Prediction, label: GroundTruthLabel, overlap_threshold: float
) -> float:
    if label.guideline_id not in prediction.guideline_ids:
        return 0.0
    if prediction.xpath is not None and label.xpath is not None:
        if prediction.xpath == label.xpath:
            return 1.0
    if prediction.span is not None and label.span is not None:
        overlap = _span_overlap(prediction.span, label.span)
        if overlap >= overlap_threshold:
            return overlap
    return 0.0


@dataclass(frozen=True)
class MatchCounts:
    tp: int
    fp: int
    fn: int


def match_predictions(
    predictions: list[Prediction],
    truth: list[GroundTruthLabel],
    overlap_threshold: float = OVERLAP_THRESHOLD,
) -> MatchCounts:
    """Greedy one-to-one matching by descending overlap quality."""
    scored = []
    for p_index, prediction in enumerate(predictions):
        for l_index, label in enumerate(truth):
            score = _match_score(prediction, label, overlap_threshold)
            if score > 0.0:
                scored.append((-score, p_index, l_index))
    scored.sort()
    used_predictions: set[int] = set()
    used_labels: set[int] = set()
    tp = 0
    for _, p_index, l_index in scored:
        if p_index in used_predictions or l_index in used_labels:
            continue
        used_predictions.add(p_index)
        used_labels.add(l_index)
        tp += 1
    return MatchCounts(tp=tp, fp=len(predictions) - tp, fn=len(truth) - tp)


@dataclass(frozen=True)
class EvalReport:
    mode: EvalMode
    tp: int
    fp: int
    fn: int
    per_fixture: tuple[dict, ...]

    @property
    def precision(self) -> float | None:
        return self.tp / (self.tp + self.fp) if (self.tp + self.fp) > 0 else None

    @property
    def recall(self) -> float | None:
        return self.tp / (self.tp + self.fn) if (self.tp + self.fn) > 0 else None

    def to_dict(self) -> dict:
        return {
            "mode": self.mode.value,
            "tp": self.tp,
            "fp": self.fp,
            "fn": self.fn,
            "precision": self.precision,
            "recall": self.recall,
            "per_fixture": list(self.per_fixture),
        }

    def format_table(self) -> str:
        def fmt(value: float | None) -> str:
            return "n/a" if value is None else f"{value:.3f}"

        lines = [
            f"mode: {self.mode.value}",
            f"{'fixture':<24} {'tp':>4} {'fp':>4} {'fn':>4}",
        ]
        for row in self.per_fixture:
            lines.append(
                f"{row['fixture']:<24} {row['tp']:>4} {row['fp']:>4} {row['fn']:>4}"
            )
        lines.append(
            f"{'TOTAL':<24} {self.tp:>4} {self.fp:>4} {self.fn:>4}"
            f"   precision={fmt(self.precision)} recall={fmt(self.recall)}"
        )
        return "\n".join(lines)


def labels_for_mode(mode: EvalMode, labels: list[GroundTruthLabel]) -> list[GroundTruthLabel]:
    if mode is EvalMode.REPAIR_COMPONENT_ONLY:
        return [l for l in labels if l.origin is Origin.COMPONENT]
    if mode is EvalMode.REPAIR_PROPERTY_ONLY:
        return [l for l in labels if l.origin is Origin.PROPERTY]
    if mode is EvalMode.REPAIR_SOFT_ONLY:
        return [l for l in labels if l.constraint_kind is ConstraintKind.SOFT]
    if mode is EvalMode.REPAIR_HARD_ONLY:
        return [l for l in labels if l.constraint_kind is ConstraintKind.HARD]
    return list(labels)


def run_ablation(mode: EvalMode, corpus_dir: str | Path, config) -> EvalReport:
    """Score one mode over a fixture corpus directory.

    The directory holds `pages/*.html` and `labels.jsonl`. Repair modes
    disable the complementary stream inside the pipeline and are scored
    only against their own label subset; an empty subset raises an
    EmptySubsetWarning and yields undefined-marked metrics.
    """
    from . import pipeline  # local import to avoid a cycle

    corpus = Path(corpus_dir)
    pages_dir = corpus / "pages"
    labels_path = corpus / "labels.jsonl"
    if not labels_path.is_file():
        raise GroundTruthError(f"ground truth missing: {labels_path}")
    pages = sorted(pages_dir.glob("*.html"))
    if not pages:
        raise GroundTruthError(f"no fixture pages under {pages_dir}")

    all_labels = load_labels(labels_path)
    scoped = labels_for_mode(mode, all_labels)
    if not scoped:
        _std_warnings.warn(
            f"no ground-truth labels for mode {mode.value}", EmptySubsetWarning
        )
    by_fixture: dict[str, list[GroundTruthLabel]] = {}
    for label in scoped:
        by_fixture.setdefault(label.fixture, []).append(label)

    only_origin = {
        EvalMode.REPAIR_COMPONENT_ONLY: Origin.COMPONENT,
        EvalMode.REPAIR_PROPERTY_ONLY: Origin.PROPERTY,
    }.get(mode)
    only_kind = {
        EvalMode.REPAIR_SOFT_ONLY: ConstraintKind.SOFT,
        EvalMode.REPAIR_HARD_ONLY: ConstraintKind.HARD,
    }.get(mode)

    rows = []
    total_tp = total_fp = total_fn = 0
    for page in pages:
        fixture = page.stem
        source = page.read_text(encoding="utf-8")
        truth = by_fixture.get(fixture, [])
        if mode is EvalMode.DETECT:
            analysis = pipeline.analyze_page(source, config, source_ref=page.name)
            predictions = [Prediction.from_violation(v) for v in analysis.violations]
        else:
            result = pipeline.repair_page(
                source, config, source_ref=page.name,
                only_origin=only_origin, only_kind=only_kind,
            )
            applied = set(result.page.applied)
            predictions = [
                Prediction.from_suggestion(s)
                for s in result.suggestions
                if s.id in applied
            ]
        counts = match_predictions(predictions, truth)
        rows.append(
            {"fixture": fixture, "tp": counts.tp, "fp": counts.fp, "fn": counts.fn}
        )
        total_tp += counts.tp
        total_fp += counts.fp
        total_fn += counts.fn

    return EvalReport(
        mode=mode, tp=total_tp, fp=total_fp, fn=total_fn, per_fixture=tuple(rows)
    )
