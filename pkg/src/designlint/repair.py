"""Divide-and-conquer repair orchestration.

Repair runs one LLM round per component type and per non-empty property
group (individual repair), then splices the collected suggestions into the
page in a single conflict-aware merge pass (overall repair). Completions
must be JSON arrays of objects carrying exactly the keys bad_design_code,
detailed_reference_guidelines and suggestion_fix_code; anything that fails
the schema or cannot be located in the source is dropped with a warning.

Overlapping suggestions are resolved by a documented priority order (hard
before soft, property-origin before component-origin, then larger spans),
except that overlap sets containing two or more hard suggestions with
distinct fixes are handed to the LLM with a merge prompt. Checkers re-run
on the merged page to fill the residual-violation report; re-validation is
not optional.
"""

from __future__ import annotations

import hashlib
import json
import re
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass
from enum import Enum

from .checkers import RuleBinding, Violation
from .errors import DesignLintError
from .extraction import ExtractionBundle, KnowledgeBundle
from .kb import ConstraintKind, GuidelineEntry
from .llm import (
    ISSUES_MARKER,
    MERGE_MARKER,
    TASK_MARKER,
    LlmClient,
    LlmProtocolError,
    PromptTooLarge,
    extract_json,
)
from .staticdom import parse_static_indexed
from .snapshot import EmptyDocument

MAX_RETRIES = 2

HARD_FRAMING = (
    "Here are the guidelines you must follow, we name it 'hard constraints'. "
    "Remember this is mandatory. Once you find a bad design not following the "
    "guideline, you must fix it."
)
SOFT_FRAMING = (
    "Here are the general guidelines you can use, we name it 'soft constraints'. "
    "Remember this is not mandatory, regarded as optional."
)

C3_KEYS = ("bad_design_code", "detailed_reference_guidelines", "suggestion_fix_code")


class Origin(str, Enum):
    COMPONENT = "component"
    PROPERTY = "property"


class ApplyError(DesignLintError):
    """Span arithmetic went inconsistent while splicing; an internal bug."""


@dataclass(frozen=True)
class RepairUnit:
    kind: Origin
    name: str

    @property
    def label(self) -> str:
        return f"{self.kind.value}:{self.name}"


@dataclass(frozen=True)
class RepairSuggestion:
    id: str
    bad_design_code: str
    detailed_reference_guidelines: tuple[str, ...]
    suggestion_fix_code: str
    origin: Origin
    constraint_kind: ConstraintKind
    target_span: tuple[int, int]
    unit: str
    guideline_ids: tuple[str, ...]


@dataclass(frozen=True)
class SkippedSuggestion:
    id: str
    reason: str


@dataclass(frozen=True)
class RepairedPage:
    source: str
    applied: tuple[str, ...]
    skipped: tuple[SkippedSuggestion, ...]
    residual_violations: tuple[Violation, ...]


def _jsonable(value):
    if isinstance(value, tuple):
        return [_jsonable(v) for v in value]
    if isinstance(value, dict):
        return {k: _jsonable(v) for k, v in value.items()}
    if isinstance(value, Enum):
        return value.value
    return value


def build_individual_prompt(
    source: str,
    unit: RepairUnit,
    knowledge: list[GuidelineEntry],
    evidence: list | None = None,
    issues: list[dict] | None = None,
    client_max: int | None = None,
) -> str:
    """Compose one unit's repair prompt.

    Hard and soft guideline sections carry their fixed framing sentences;
    an empty section reads "none". Raises PromptTooLarge when the result
    exceeds the client's declared limit.
    """
    hard, soft = KnowledgeBundle.partition(knowledge)

    def guideline_lines(entries: list[GuidelineEntry]) -> str:
        if not entries:
            return "none"
        return "\n".join(f"- [{e.id}] {e.text}" for e in entries)

    issues_block = (
        json.dumps(_jsonable(issues), ensure_ascii=False, indent=1, sort_keys=True)
        if issues
        else "none"
    )
    evidence_block = (
        json.dumps(_jsonable(evidence), ensure_ascii=False, indent=1, sort_keys=True)
        if evidence
        else "none"
    )

    prompt = (
        f"{TASK_MARKER} individual-repair\n"
        "You are a frontend design reviewer. Inspect the page source below for "
        f"design problems in the {unit.kind.value} unit '{unit.name}' and propose repairs.\n"
        "\n"
        "### PAGE SOURCE\n"
        f"{source}\n"
        "### END\n"
        "\n"
        "### UNIT\n"
        f"{json.dumps({'kind': unit.kind.value, 'name': unit.name})}\n"
        "\n"
        "### UNIT EVIDENCE (JSON)\n"
        f"{evidence_block}\n"
        "### END\n"
        "\n"
        f"{ISSUES_MARKER}\n"
        f"{issues_block}\n"
        "### END\n"
        "\n"
        "### HARD CONSTRAINTS\n"
        f"{HARD_FRAMING}\n"
        f"{guideline_lines(hard)}\n"
        "### END\n"
        "\n"
        "### SOFT CONSTRAINTS\n"
        f"{SOFT_FRAMING}\n"
        f"{guideline_lines(soft)}\n"
        "### END\n"
        "\n"
        "### OUTPUT FORMAT\n"
        "Respond with a JSON array only. Each element is an object with exactly "
        f"the keys {json.dumps(list(C3_KEYS))}.\n"
        "bad_design_code is copied verbatim from the page source. "
        "detailed_reference_guidelines is a list of strings, each formatted "
        "'<guideline id>: <guideline text>'. suggestion_fix_code is the full "
        "replacement for bad_design_code. Return [] when nothing needs fixing.\n"
    )
    if client_max is not None and len(prompt) > client_max:
        raise PromptTooLarge(len(prompt), client_max)
    return prompt


_WS_RUN = re.compile(r"\s+")


def locate_excerpt(source: str, excerpt: str) -> tuple[int, int] | None:
    """Find an excerpt in the source, exact first, then whitespace-normalized."""
    excerpt = excerpt.strip()
    if not excerpt:
        return None
    at = source.find(excerpt)
    if at >= 0:
        return (at, at + len(excerpt))
    tokens = _WS_RUN.sub(" ", excerpt).split(" ")
    pattern = r"\s+".join(re.escape(token) for token in tokens)
    match = re.search(pattern, source)
    if match:
        return (match.start(), match.end())
    return None


def _reference_ids(references: list) -> tuple[tuple[str, ...], tuple[str, ...]]:
    """Normalize reference entries to display strings plus bare ids."""
    display: list[str] = []
    ids: list[str] = []
    for ref in references:
        if isinstance(ref, dict):
            rid = str(ref.get("id", "")).strip()
            text = str(ref.get("text", "")).strip()
            display.append(f"{rid}: {text}" if text else rid)
        elif isinstance(ref, str):
            display.append(ref.strip())
            rid = ref.split(":", 1)[0].strip()
        else:
            continue
        if rid:
            ids.append(rid)
    return tuple(display), tuple(ids)


def _suggestion_id(span: tuple[int, int], fix: str) -> str:
    digest = hashlib.sha1(f"{span[0]}:{span[1]}:{fix}".encode("utf-8")).hexdigest()
    return f"s-{digest[:12]}"


def _parse_unit_completion(
    completion: str,
    source: str,
    unit: RepairUnit,
    known_entries: dict[str, GuidelineEntry],
    warnings: list[str] | None,
) -> list[RepairSuggestion]:
    payload = extract_json(completion)
    if not isinstance(payload, list):
        raise LlmProtocolError("completion is not a JSON array")
    suggestions = []
    for item in payload:
        if not isinstance(item, dict) or not all(key in item for key in C3_KEYS):
            if warnings is not None:
                warnings.append(f"{unit.label}: dropped entry lacking the required keys")
            continue
        bad = item["bad_design_code"]
        fix = item["suggestion_fix_code"]
        references = item["detailed_reference_guidelines"]
        if not isinstance(bad, str) or not isinstance(fix, str) or not isinstance(references, list):
            if warnings is not None:
                warnings.append(f"{unit.label}: dropped entry with wrongly typed values")
            continue
        span = locate_excerpt(source, bad)
        if span is None:
            if warnings is not None:
                warnings.append(
                    f"{unit.label}: dropped suggestion whose bad_design_code "
                    "does not occur in the source"
                )
            continue
        display, ids = _reference_ids(references)
        known = [known_entries[i] for i in ids if i in known_entries]
        if not known:
            if warnings is not None:
                warnings.append(
                    f"{unit.label}: dropped suggestion referencing no known guideline"
                )
            continue
        kind = (
            ConstraintKind.HARD
            if any(e.constraint_kind is ConstraintKind.HARD for e in known)
            else ConstraintKind.SOFT
        )
        suggestions.append(
            RepairSuggestion(
                id=_suggestion_id(span, fix),
                bad_design_code=source[span[0] : span[1]],
                detailed_reference_guidelines=display,
                suggestion_fix_code=fix,
                origin=unit.kind,
                constraint_kind=kind,
                target_span=span,
                unit=unit.name,
                guideline_ids=tuple(i for i in ids if i in known_entries),
            )
        )
    return suggestions


def _issues_for_unit(
    unit: RepairUnit,
    violations: list[Violation],
    rules: dict[str, RuleBinding],
    span_index: dict[str, tuple[int, int]],
    source: str,
    known_entries: dict[str, GuidelineEntry],
    warnings: list[str] | None,
) -> list[dict]:
    issues = []
    for violation in violations:
        binding = rules.get(violation.rule)
        if binding is None or (binding.unit_kind, binding.unit_name) != (
            unit.kind.value,
            unit.name,
        ):
            continue
        span = span_index.get(violation.xpath or "")
        if span is None and violation.source_span is not None:
            span = violation.source_span
        if span is None:
            if warnings is not None:
                warnings.append(
                    f"{unit.label}: cannot locate {violation.rule} violation "
                    f"at {violation.xpath} in the source"
                )
            continue
        entry = known_entries.get(violation.guideline_id)
        issues.append(
            {
                "rule": violation.rule,
                "guideline_id": violation.guideline_id,
                "guideline_text": entry.text if entry else "",
                "xpath": violation.xpath,
                "bad_design_code": source[span[0] : span[1]],
                "evidence": _jsonable(violation.evidence),
                "message": violation.message,
            }
        )
    return issues


def individual_repair(
    source: str,
    bundle: ExtractionBundle,
    knowledge: KnowledgeBundle,
    pre_found: list[Violation],
    llm: LlmClient,
    rules: dict[str, RuleBinding] | None = None,
    only_origin: Origin | None = None,
    only_kind: ConstraintKind | None = None,
    max_workers: int = 1,
    warnings: list[str] | None = None,
) -> list[RepairSuggestion]:
    """Run one repair round per component type and non-empty property group.

    Checker findings are injected into their unit's prompt as structured
    issues. Units whose completions stay unusable after the retry budget
    are skipped and recorded as warnings. The result is normalized by
    target span so concurrency never changes the output.
    """
    rules = rules or {}
    known_entries = knowledge.all_entries()

    units: list[tuple[RepairUnit, list[GuidelineEntry]]] = []
    if only_origin in (None, Origin.COMPONENT):
        for ctype, entries in knowledge.component_knowledge.items():
            units.append((RepairUnit(Origin.COMPONENT, ctype), entries))
    if only_origin in (None, Origin.PROPERTY):
        for group, records in bundle.property_groups.items():
            if records:
                entries = knowledge.property_knowledge.get(group, [])
                units.append((RepairUnit(Origin.PROPERTY, group.value), entries))

    if only_kind is not None:
        units = [
            (unit, [e for e in entries if e.constraint_kind is only_kind])
            for unit, entries in units
        ]

    try:
        _, span_index = parse_static_indexed(source)
    except EmptyDocument:
        span_index = {}

    def run_unit(item: tuple[RepairUnit, list[GuidelineEntry]]) -> list[RepairSuggestion]:
        unit, entries = item
        unit_warnings: list[str] = []
        issues = _issues_for_unit(
            unit, pre_found, rules, span_index, source, known_entries, unit_warnings
        )
        if only_kind is not None:
            allowed = {e.id for e in entries}
            issues = [i for i in issues if i["guideline_id"] in allowed]
        evidence = _unit_evidence(unit, bundle)
        prompt = build_individual_prompt(
            source, unit, entries, evidence=evidence, issues=issues,
            client_max=llm.max_prompt_chars,
        )
        last_error: LlmProtocolError | None = None
        for attempt in range(1 + MAX_RETRIES):
            try:
                completion = llm.send(prompt)
                result = _parse_unit_completion(
                    completion, source, unit, known_entries, unit_warnings
                )
                if warnings is not None:
                    warnings.extend(unit_warnings)
                return result
            except LlmProtocolError as exc:
                last_error = exc
                prompt = (
                    prompt
                    + "\nYour previous answer was rejected: "
                    + str(exc)
                    + "\nAnswer again with only a valid JSON array of objects "
                    f"with exactly the keys {json.dumps(list(C3_KEYS))}.\n"
                )
        if warnings is not None:
            warnings.extend(unit_warnings)
            warnings.append(f"{unit.label}: skipped after {MAX_RETRIES} retries ({last_error})")
        return []

    workers = max_workers if llm.concurrency_safe else 1
    if workers > 1 and len(units) > 1:
        with ThreadPoolExecutor(max_workers=workers) as pool:
            per_unit = list(pool.map(run_unit, units))
    else:
        per_unit = [run_unit(u) for u in units]

    merged: list[RepairSuggestion] = []
    seen: set[tuple[tuple[int, int], tuple[str, ...]]] = set()
    for suggestions in per_unit:
        for suggestion in suggestions:
            key = (suggestion.target_span, tuple(sorted(suggestion.guideline_ids)))
            if key in seen:
                continue
            seen.add(key)
            merged.append(suggestion)
    return sorted(merged, key=lambda s: (s.target_span, s.origin.value, s.id))


def _unit_evidence(unit: RepairUnit, bundle: ExtractionBundle) -> list:
    if unit.kind is Origin.COMPONENT:
        return [
            {"raw_name": c.raw_name, "sample_markup": c.sample_markup}
            for c in bundle.components
            if c.canonical_type == unit.name
        ]
    for group, records in bundle.property_groups.items():
        if group.value == unit.name:
            return [
                {"xpath": r.xpath, "outer_html": r.outer_html, "values": _jsonable(r.values)}
                for r in records
            ]
    return []


def _build_merge_prompt(region: str, candidates: list[str]) -> str:
    payload = json.dumps(
        {"region": region, "candidates": candidates}, ensure_ascii=False, indent=1
    )
    return (
        f"{TASK_MARKER} merge-region\n"
        "Several repair suggestions target overlapping parts of one page "
        "region. Merge them into a single replacement, keeping every "
        "mandatory fix. Candidates are ordered by priority, highest first; "
        "each candidate is the full region with one suggestion applied.\n"
        f"{MERGE_MARKER}\n"
        f"{payload}\n"
        "### END\n"
        "### OUTPUT FORMAT\n"
        'Respond with a JSON object: {"merged_region": "<replacement for the region>"}.\n'
    )


def _priority_order(suggestions: list[RepairSuggestion]) -> list[RepairSuggestion]:
    return sorted(
        suggestions,
        key=lambda s: (
            s.constraint_kind is not ConstraintKind.HARD,
            s.origin is not Origin.PROPERTY,
            -(s.target_span[1] - s.target_span[0]),
            s.target_span[0],
            s.id,
        ),
    )


def _normalized(text: str) -> str:
    return _WS_RUN.sub(" ", text).strip()


def overall_repair(
    source: str,
    suggestions: list[RepairSuggestion],
    llm: LlmClient,
    revalidate=None,
    warnings: list[str] | None = None,
) -> RepairedPage:
    """Merge suggestions into the final page and re-validate.

    Non-overlapping suggestions are spliced mechanically in descending span
    order, leaving every byte outside the applied spans untouched. Overlap
    sets are resolved by the priority order (hard > soft, property >
    component, larger span), with the LLM consulted when two or more hard
    suggestions disagree. `revalidate` is called with the repaired source
    to produce the residual-violation report.
    """
    for suggestion in suggestions:
        start, end = suggestion.target_span
        if not (0 <= start < end <= len(source)):
            raise ApplyError(f"suggestion {suggestion.id} span {suggestion.target_span} out of range")
        slice_ = source[start:end]
        if slice_ != suggestion.bad_design_code and _normalized(slice_) != _normalized(
            suggestion.bad_design_code
        ):
            raise ApplyError(
                f"suggestion {suggestion.id} bad_design_code does not match its span"
            )

    ordered = sorted(suggestions, key=lambda s: (s.target_span, s.id))
    clusters: list[list[RepairSuggestion]] = []
    for suggestion in ordered:
        if clusters and suggestion.target_span[0] < max(
            s.target_span[1] for s in clusters[-1]
        ):
            clusters[-1].append(suggestion)
        else:
            clusters.append([suggestion])

    splices: list[tuple[int, int, str]] = []
    applied: list[RepairSuggestion] = []
    skipped: list[SkippedSuggestion] = []

    for cluster in clusters:
        if len(cluster) == 1:
            only = cluster[0]
            splices.append((*only.target_span, only.suggestion_fix_code))
            applied.append(only)
            continue

        ranked = _priority_order(cluster)
        winner = ranked[0]
        hard = [s for s in cluster if s.constraint_kind is ConstraintKind.HARD]
        distinct_hard_fixes = {s.suggestion_fix_code for s in hard}
        region_start = min(s.target_span[0] for s in cluster)
        region_end = max(s.target_span[1] for s in cluster)
        region = source[region_start:region_end]

        if len(hard) >= 2 and len(distinct_hard_fixes) >= 2:
            candidates = [
                region[: s.target_span[0] - region_start]
                + s.suggestion_fix_code
                + region[s.target_span[1] - region_start :]
                for s in ranked
            ]
            merged_region = None
            try:
                answer = extract_json(llm.send(_build_merge_prompt(region, candidates)))
                if isinstance(answer, dict) and isinstance(answer.get("merged_region"), str):
                    merged_region = answer["merged_region"]
            except LlmProtocolError as exc:
                if warnings is not None:
                    warnings.append(f"merge prompt failed ({exc}); falling back to priority rule")
            if merged_region is None:
                merged_region = candidates[0]
            splices.append((region_start, region_end, merged_region))
            normalized_merged = _normalized(merged_region)
            for suggestion in cluster:
                if _normalized(suggestion.suggestion_fix_code) in normalized_merged:
                    applied.append(suggestion)
                else:
                    skipped.append(SkippedSuggestion(suggestion.id, "conflict"))
        else:
            splices.append((*winner.target_span, winner.suggestion_fix_code))
            applied.append(winner)
            for suggestion in cluster:
                if suggestion.id != winner.id:
                    skipped.append(SkippedSuggestion(suggestion.id, "conflict"))

    repaired = source
    last_start = len(source) + 1
    for start, end, replacement in sorted(splices, key=lambda s: -s[0]):
        if end > last_start:
            raise ApplyError("computed splices overlap")
        last_start = start
        repaired = repaired[:start] + replacement + repaired[end:]

    residuals = tuple(revalidate(repaired)) if revalidate is not None else ()
    return RepairedPage(
        source=repaired,
        applied=tuple(s.id for s in sorted(applied, key=lambda s: s.target_span)),
        skipped=tuple(sorted(skipped, key=lambda s: s.id)),
        residual_violations=residuals,
    )
