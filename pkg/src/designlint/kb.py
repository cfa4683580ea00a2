"""Two-tier design-guideline knowledge base: loading, validation, queries.

The base splits into a component tier (guidelines attached to individual UI
component types such as buttons or navigation bars) and a system tier
(foundation/style guidelines reachable through <design aspect, property group,
relation> triples). Hard guidelines are mandatory do/don't rules; soft ones
are recommendations.

Bundle layout on disk (see docs/kb_bundle_format.md):

    entries.jsonl   one guideline record per line, sorted by id
    triples.jsonl   one system triple per line
    aliases.json    raw component name -> canonical component type
    manifest.json   declared entry counts per (tier, constraint kind)

A loaded KnowledgeBase is immutable; share it freely across threads.
"""

from __future__ import annotations

import json
import re
from dataclasses import dataclass, field
from enum import Enum
from pathlib import Path

from .errors import DesignLintError

ID_PATTERN = re.compile(r"^(COMP|SYS)-[a-z0-9-]+$")


class Tier(str, Enum):
    COMPONENT = "component"
    SYSTEM = "system"


class ConstraintKind(str, Enum):
    HARD = "hard"
    SOFT = "soft"


class Polarity(str, Enum):
    DO = "do"
    DONT = "dont"
    RECOMMENDED = "recommended"


class SourceSection(str, Enum):
    FOUNDATIONS = "foundations"
    STYLES = "styles"
    COMPONENTS = "components"


class PropertyGroup(str, Enum):
    """The seven actionable property groups extracted from rendered pages."""

    GROUP = "Group"
    CLICKABLE = "Clickable"
    SPACING = "Spacing"
    PLATFORM = "Platform"
    LABEL = "Label"
    TEXT = "Text"
    COLOR = "Color"


ALL_GROUPS: tuple[PropertyGroup, ...] = tuple(PropertyGroup)


class KbError(DesignLintError):
    """Base class for knowledge-base bundle problems."""


class MalformedEntry(KbError):
    def __init__(self, entry_id: str, fieldname: str, detail: str):
        super().__init__(f"entry {entry_id!r}, field {fieldname!r}: {detail}")
        self.entry_id = entry_id
        self.fieldname = fieldname


class ManifestMismatch(KbError):
    pass


class DanglingReference(KbError):
    def __init__(self, guideline_id: str):
        super().__init__(f"reference to missing guideline id {guideline_id!r}")
        self.guideline_id = guideline_id


class UnknownComponentType(KbError):
    def __init__(self, component_type: str):
        super().__init__(f"component type {component_type!r} not in the knowledge base")
        self.component_type = component_type


@dataclass(frozen=True)
class GuidelineEntry:
    """One guideline record, component tier or system tier."""

    id: str
    tier: Tier
    design_aspect: str
    constraint_kind: ConstraintKind
    polarity: Polarity
    text: str
    source_section: SourceSection
    component_type: str | None = None

    def to_record(self) -> dict:
        record = {
            "id": self.id,
            "tier": self.tier.value,
            "design_aspect": self.design_aspect,
            "constraint_kind": self.constraint_kind.value,
            "polarity": self.polarity.value,
            "text": self.text,
            "source_section": self.source_section.value,
        }
        if self.component_type is not None:
            record["component_type"] = self.component_type
        return record


@dataclass(frozen=True)
class SystemTriple:
    """<design aspect, property group, relation> link into the system tier."""

    design_aspect: str
    property_group: PropertyGroup
    relation: str
    guideline_ids: tuple[str, ...]

    def to_record(self) -> dict:
        return {
            "design_aspect": self.design_aspect,
            "property_group": self.property_group.value,
            "relation": self.relation,
            "guideline_ids": list(self.guideline_ids),
        }


@dataclass(frozen=True)
class KnowledgeBase:
    entries: dict[str, GuidelineEntry]
    triples: tuple[SystemTriple, ...]
    component_index: dict[str, tuple[str, ...]]
    aliases: dict[str, str]
    manifest: dict
    bundle_path: Path | None = field(default=None, compare=False)

    def entry(self, guideline_id: str) -> GuidelineEntry:
        return self.entries[guideline_id]

    @property
    def component_types(self) -> tuple[str, ...]:
        return tuple(sorted(self.component_index))


def _parse_enum(enum_cls, raw, entry_id: str, fieldname: str):
    try:
        return enum_cls(raw)
    except ValueError:
        allowed = ", ".join(m.value for m in enum_cls)
        raise MalformedEntry(entry_id, fieldname, f"{raw!r} not one of: {allowed}")


def _parse_entry(record: dict, lineno: int) -> GuidelineEntry:
    entry_id = record.get("id", f"<line {lineno}>")
    if not isinstance(entry_id, str) or not ID_PATTERN.match(entry_id):
        raise MalformedEntry(str(entry_id), "id", "must match ^(COMP|SYS)-[a-z0-9-]+$")
    for key in ("tier", "design_aspect", "constraint_kind", "polarity", "text", "source_section"):
        if key not in record:
            raise MalformedEntry(entry_id, key, "missing")
    tier = _parse_enum(Tier, record["tier"], entry_id, "tier")
    kind = _parse_enum(ConstraintKind, record["constraint_kind"], entry_id, "constraint_kind")
    polarity = _parse_enum(Polarity, record["polarity"], entry_id, "polarity")
    section = _parse_enum(SourceSection, record["source_section"], entry_id, "source_section")
    component_type = record.get("component_type")

    if tier is Tier.COMPONENT and not component_type:
        raise MalformedEntry(entry_id, "component_type", "required for component-tier entries")
    if tier is Tier.SYSTEM and component_type is not None:
        raise MalformedEntry(entry_id, "component_type", "must be absent for system-tier entries")
    if kind is ConstraintKind.HARD and polarity not in (Polarity.DO, Polarity.DONT):
        raise MalformedEntry(entry_id, "polarity", "hard entries must be do or dont")
    if kind is ConstraintKind.SOFT and polarity is not Polarity.RECOMMENDED:
        raise MalformedEntry(entry_id, "polarity", "soft entries must be recommended")
    if not isinstance(record["text"], str) or not record["text"].strip():
        raise MalformedEntry(entry_id, "text", "must be non-empty")

    unknown = set(record) - {
        "id", "tier", "design_aspect", "constraint_kind", "polarity",
        "text", "source_section", "component_type",
    }
    if unknown:
        raise MalformedEntry(entry_id, sorted(unknown)[0], "unknown field")

    return GuidelineEntry(
        id=entry_id,
        tier=tier,
        design_aspect=str(record["design_aspect"]),
        constraint_kind=kind,
        polarity=polarity,
        text=record["text"],
        source_section=section,
        component_type=component_type,
    )


def _read_jsonl(path: Path) -> list[tuple[int, dict]]:
    records = []
    for lineno, line in enumerate(path.read_text(encoding="utf-8").splitlines(), start=1):
        if not line.strip():
            continue
        try:
            record = json.loads(line)
        except json.JSONDecodeError as exc:
            raise MalformedEntry(f"<{path.name} line {lineno}>", "-", f"invalid JSON: {exc}")
        if not isinstance(record, dict):
            raise MalformedEntry(f"<{path.name} line {lineno}>", "-", "record must be an object")
        records.append((lineno, record))
    return records


def load_kb(path: str | Path) -> KnowledgeBase:
    """Load and fully validate a KB bundle directory.

    Raises MalformedEntry, ManifestMismatch or DanglingReference; a returned
    KnowledgeBase satisfies every invariant (unique ids, coherent tiers,
    resolving triples, manifest counts equal to actual counts).
    """
    bundle = Path(path)
    for name in ("entries.jsonl", "triples.jsonl", "aliases.json", "manifest.json"):
        if not (bundle / name).is_file():
            raise KbError(f"bundle file missing: {bundle / name}")

    entries: dict[str, GuidelineEntry] = {}
    for lineno, record in _read_jsonl(bundle / "entries.jsonl"):
        entry = _parse_entry(record, lineno)
        if entry.id in entries:
            raise MalformedEntry(entry.id, "id", "duplicate id")
        entries[entry.id] = entry

    triples: list[SystemTriple] = []
    for lineno, record in _read_jsonl(bundle / "triples.jsonl"):
        where = f"<triples.jsonl line {lineno}>"
        for key in ("design_aspect", "property_group", "relation", "guideline_ids"):
            if key not in record:
                raise MalformedEntry(where, key, "missing")
        group = _parse_enum(PropertyGroup, record["property_group"], where, "property_group")
        ids = record["guideline_ids"]
        if not isinstance(ids, list) or not all(isinstance(i, str) for i in ids):
            raise MalformedEntry(where, "guideline_ids", "must be a list of ids")
        for gid in ids:
            if gid not in entries:
                raise DanglingReference(gid)
            if entries[gid].tier is not Tier.SYSTEM:
                raise MalformedEntry(where, "guideline_ids", f"{gid} is not system-tier")
        triples.append(
            SystemTriple(
                design_aspect=str(record["design_aspect"]),
                property_group=group,
                relation=str(record["relation"]),
                guideline_ids=tuple(ids),
            )
        )

    component_index: dict[str, list[str]] = {}
    for entry in entries.values():
        if entry.component_type is not None:
            component_index.setdefault(entry.component_type, []).append(entry.id)
    frozen_index = {
        ctype: tuple(sorted(ids)) for ctype, ids in sorted(component_index.items())
    }

    aliases_raw = json.loads((bundle / "aliases.json").read_text(encoding="utf-8"))
    if not isinstance(aliases_raw, dict):
        raise MalformedEntry("<aliases.json>", "-", "must be an object")
    for raw_name, target in aliases_raw.items():
        if target not in frozen_index:
            raise MalformedEntry("<aliases.json>", raw_name, f"target {target!r} has no component entries")

    manifest = json.loads((bundle / "manifest.json").read_text(encoding="utf-8"))
    if not isinstance(manifest, dict) or "counts" not in manifest:
        raise ManifestMismatch("manifest.json must contain a 'counts' object")
    counts = manifest["counts"]
    actual = {
        tier.value: {
            kind.value: sum(
                1 for e in entries.values() if e.tier is tier and e.constraint_kind is kind
            )
            for kind in ConstraintKind
        }
        for tier in Tier
    }
    if counts != actual:
        raise ManifestMismatch(f"declared counts {counts} != actual {actual}")

    return KnowledgeBase(
        entries=dict(sorted(entries.items())),
        triples=tuple(triples),
        component_index=frozen_index,
        aliases=dict(sorted(aliases_raw.items())),
        manifest=manifest,
        bundle_path=bundle,
    )


def _hard_first(items: list[GuidelineEntry]) -> list[GuidelineEntry]:
    # Partition-stable: hard entries before soft, ties broken by id.
    return sorted(items, key=lambda e: (e.constraint_kind is ConstraintKind.SOFT, e.id))


def query_component(kb: KnowledgeBase, component_type: str) -> list[GuidelineEntry]:
    """All component-tier entries for a canonical type, hard before soft."""
    if component_type not in kb.component_index:
        raise UnknownComponentType(component_type)
    return _hard_first([kb.entries[eid] for eid in kb.component_index[component_type]])


def query_property(kb: KnowledgeBase, group: PropertyGroup) -> list[GuidelineEntry]:
    """System-tier entries reachable via triples for a group, deduplicated."""
    seen: dict[str, GuidelineEntry] = {}
    for triple in kb.triples:
        if triple.property_group is group:
            for gid in triple.guideline_ids:
                seen.setdefault(gid, kb.entries[gid])
    return _hard_first(list(seen.values()))


def canonical_entry_line(entry: GuidelineEntry) -> str:
    return json.dumps(entry.to_record(), ensure_ascii=False, sort_keys=True)


def serialize_kb(kb: KnowledgeBase) -> dict[str, bytes]:
    """Canonical bundle bytes, filename -> content. load_kb of these equals kb."""
    entry_lines = [canonical_entry_line(e) for _, e in sorted(kb.entries.items())]
    triple_lines = [
        json.dumps(t.to_record(), ensure_ascii=False, sort_keys=True)
        for t in sorted(kb.triples, key=lambda t: (t.property_group.value, t.design_aspect, t.relation))
    ]
    return {
        "entries.jsonl": ("\n".join(entry_lines) + "\n" if entry_lines else "").encode("utf-8"),
        "triples.jsonl": ("\n".join(triple_lines) + "\n" if triple_lines else "").encode("utf-8"),
        "aliases.json": (json.dumps(kb.aliases, ensure_ascii=False, indent=2, sort_keys=True) + "\n").encode("utf-8"),
        "manifest.json": (json.dumps(kb.manifest, ensure_ascii=False, indent=2, sort_keys=True) + "\n").encode("utf-8"),
    }


def write_bundle(kb: KnowledgeBase, path: str | Path) -> None:
    target = Path(path)
    target.mkdir(parents=True, exist_ok=True)
    for name, data in serialize_kb(kb).items():
        (target / name).write_bytes(data)


def default_bundle_path() -> Path:
    """Location of the KB bundle shipped inside the package."""
    return Path(__file__).resolve().parent / "data" / "kb"
