"""Dual-stream page extraction and knowledge retrieval.

Stream one scans the page source for component usages (tag names, ARIA
roles, class-name tokens, data-component attributes, plus optional LLM
candidates) and maps the raw names onto canonical knowledge-base component
types. Stream two walks rendered snapshots and files measurements into the
seven property groups. retrieve_knowledge then pulls the matching guideline
entries for both streams.

Every extracted raw name is guaranteed to occur verbatim in the source at
its recorded span; LLM candidates that cannot be located are dropped.

Property-group value schemas (author-chosen concretization):

    Color     fg, bg (effective, opaque), contrast_ratio, font_size_px
    Clickable x, y, width, height, focusable, display
    Spacing   padding (t,r,b,l), margin (t,r,b,l)
    Platform  viewport_widths, widths, x_offsets, width_delta
    Label     tag, accessible_name (None when absent)
    Text      font_size_px, heading_level (None unless h1..h6), tag
    Group     landmark_role
"""

from __future__ import annotations

import json
import re
from dataclasses import dataclass, replace
from enum import Enum

from .color import alpha_over, contrast_ratio
from .kb import (
    ALL_GROUPS,
    ConstraintKind,
    GuidelineEntry,
    KnowledgeBase,
    PropertyGroup,
    query_component,
    query_property,
)
from .llm import LlmClient, LlmProtocolError, TASK_MARKER, extract_json
from .snapshot import DomNode, DomSnapshot, effective_background


class Confidence(str, Enum):
    MEASURED = "measured"
    ESTIMATED = "estimated"


@dataclass(frozen=True)
class ComponentInstance:
    raw_name: str
    source_span: tuple[int, int]
    sample_markup: str
    canonical_type: str | None = None


@dataclass(frozen=True)
class PropertyRecord:
    group: PropertyGroup
    xpath: str
    outer_html: str
    values: dict
    confidence: Confidence


@dataclass(frozen=True)
class ExtractionBundle:
    components: list[ComponentInstance]
    property_groups: dict[PropertyGroup, list[PropertyRecord]]

    def __post_init__(self):
        missing = [g for g in ALL_GROUPS if g not in self.property_groups]
        if missing:
            raise ValueError(f"property_groups missing {missing}")


@dataclass(frozen=True)
class KnowledgeBundle:
    component_knowledge: dict[str, list[GuidelineEntry]]
    property_knowledge: dict[PropertyGroup, list[GuidelineEntry]]

    def all_entries(self) -> dict[str, GuidelineEntry]:
        entries: dict[str, GuidelineEntry] = {}
        for items in self.component_knowledge.values():
            entries.update({e.id: e for e in items})
        for items in self.property_knowledge.values():
            entries.update({e.id: e for e in items})
        return entries

    @staticmethod
    def partition(entries: list[GuidelineEntry]) -> tuple[list[GuidelineEntry], list[GuidelineEntry]]:
        """Split into (hard, soft); the two sides are disjoint and complete."""
        hard = [e for e in entries if e.constraint_kind is ConstraintKind.HARD]
        soft = [e for e in entries if e.constraint_kind is ConstraintKind.SOFT]
        return hard, soft


# --- component extraction ------------------------------------------------

KNOWN_HTML_TAGS = frozenset(
    """a abbr address area article aside audio b base bdi bdo blockquote body br
    button canvas caption cite code col colgroup data datalist dd del details dfn
    dialog div dl dt em embed fieldset figcaption figure footer form h1 h2 h3 h4
    h5 h6 head header hgroup hr html i iframe img input ins kbd label legend li
    link main map mark menu meta meter nav noscript object ol optgroup option
    output p param picture pre progress q rp rt ruby s samp script section select
    slot small source span strong style sub summary sup svg table tbody td
    template textarea tfoot th thead time title tr track u ul var video wbr
    path circle rect line polygon polyline g defs use text tspan""".split()
)

COMPONENT_TAGS = frozenset({"button", "nav", "select", "textarea", "ul", "ol"})
ROLE_COMPONENTS = frozenset(
    {"button", "navigation", "checkbox", "list", "listbox", "textbox", "menubar"}
)
CLASS_COMPONENT_TOKENS = frozenset(
    {
        "btn", "button", "navbar", "navbars", "nav", "navigation", "navigation-menu",
        "card", "list", "list-group", "checkbox", "textfield", "text-field", "input",
    }
)

_TAG_RE = re.compile(r"<([a-zA-Z][a-zA-Z0-9-]*)")
_ATTR_RES = {
    "role": re.compile(r"""role\s*=\s*["']([^"']+)["']"""),
    "type": re.compile(r"""type\s*=\s*["']([^"']+)["']"""),
    "class": re.compile(r"""class\s*=\s*["']([^"']*)["']"""),
    "data-component": re.compile(r"""data-component\s*=\s*["']([^"']+)["']"""),
}


def _sample_markup(source: str, span: tuple[int, int]) -> str:
    lt = source.rfind("<", 0, span[0] + 1)
    if lt < 0 or span[0] - lt > 200:
        lt = span[0]
    gt = source.find(">", span[1])
    end = gt + 1 if 0 <= gt and gt - lt <= 240 else min(span[1] + 80, len(source))
    return source[lt:end]


def _candidate(source: str, span: tuple[int, int]) -> ComponentInstance:
    return ComponentInstance(
        raw_name=source[span[0] : span[1]],
        source_span=span,
        sample_markup=_sample_markup(source, span),
    )


def extract_components(
    source: str,
    llm: LlmClient | None = None,
    warnings: list[str] | None = None,
) -> list[ComponentInstance]:
    """Collect component usages from page source.

    The heuristic passes (tags, roles, class tokens, data-component) always
    run; LLM candidates are unioned in afterwards and deduplicated against
    them. Every returned raw_name occurs verbatim at its source span.
    """
    candidates: list[ComponentInstance] = []

    for match in _TAG_RE.finditer(source):
        tag = match.group(1)
        span = (match.start(1), match.end(1))
        lowered = tag.lower()
        if lowered == "input":
            tag_close = source.find(">", match.end(1))
            segment = source[match.start(1) : tag_close if tag_close > 0 else match.end(1)]
            type_match = _ATTR_RES["type"].search(segment)
            if type_match and type_match.group(1).lower() in ("checkbox", "radio"):
                offset = match.start(1)
                candidates.append(
                    _candidate(source, (offset + type_match.start(1), offset + type_match.end(1)))
                )
            else:
                candidates.append(_candidate(source, span))
        elif lowered in COMPONENT_TAGS or lowered not in KNOWN_HTML_TAGS:
            candidates.append(_candidate(source, span))

    for match in _ATTR_RES["role"].finditer(source):
        if match.group(1).lower() in ROLE_COMPONENTS:
            candidates.append(_candidate(source, (match.start(1), match.end(1))))

    for match in _ATTR_RES["class"].finditer(source):
        base = match.start(1)
        for token_match in re.finditer(r"\S+", match.group(1)):
            if token_match.group(0).lower() in CLASS_COMPONENT_TOKENS:
                candidates.append(
                    _candidate(source, (base + token_match.start(), base + token_match.end()))
                )

    for match in _ATTR_RES["data-component"].finditer(source):
        candidates.append(_candidate(source, (match.start(1), match.end(1))))

    if llm is not None:
        candidates.extend(_llm_component_candidates(source, llm, warnings))

    return _dedupe(candidates)


def _llm_component_candidates(
    source: str, llm: LlmClient, warnings: list[str] | None
) -> list[ComponentInstance]:
    prompt = (
        f"{TASK_MARKER} extract-components\n"
        "List the UI component type names used in the following page source.\n"
        "Answer with a JSON array of strings, each a name that appears verbatim "
        "in the source. No prose.\n"
        "### SOURCE\n"
        f"{source}\n"
        "### END\n"
    )
    try:
        names = extract_json(llm.send(prompt))
        if not isinstance(names, list):
            raise LlmProtocolError("component extraction answer is not a list")
    except LlmProtocolError as exc:
        if warnings is not None:
            warnings.append(f"llm component extraction failed: {exc}")
        return []
    out = []
    for name in names:
        if not isinstance(name, str):
            continue
        at = source.find(name)
        if at < 0:
            continue  # soundness: only names that occur verbatim
        out.append(_candidate(source, (at, at + len(name))))
    return out


def _dedupe(candidates: list[ComponentInstance]) -> list[ComponentInstance]:
    kept: list[ComponentInstance] = []
    for candidate in sorted(candidates, key=lambda c: (c.source_span, c.raw_name)):
        duplicate = any(
            k.raw_name.lower() == candidate.raw_name.lower()
            and k.source_span[0] < candidate.source_span[1]
            and candidate.source_span[0] < k.source_span[1]
            for k in kept
        )
        if not duplicate:
            kept.append(candidate)
    return kept


# --- component mapping ----------------------------------------------------

_PUNCT_RE = re.compile(r"[-_./]+")
_DROP_RE = re.compile(r"[^a-z0-9 ]+")


def normalize_name(name: str) -> str:
    """Lowercase, fold punctuation to spaces, strip plural s per token."""
    text = _DROP_RE.sub("", _PUNCT_RE.sub(" ", name.lower()))
    tokens = []
    for token in text.split():
        if len(token) > 3 and token.endswith("s") and not token.endswith("ss"):
            token = token[:-1]
        tokens.append(token)
    return " ".join(tokens)


def _squash(name: str) -> str:
    return name.replace(" ", "")


def _common_prefix_len(a: str, b: str) -> int:
    n = 0
    for x, y in zip(a, b):
        if x != y:
            break
        n += 1
    return n


def _match_canonical(raw: str, kb: KnowledgeBase) -> str | None:
    """Deterministic name resolution; see docs/component_mapping.md."""
    if raw in kb.aliases:
        return kb.aliases[raw]
    normalized = normalize_name(raw)
    alias_lookup = {normalize_name(k): v for k, v in sorted(kb.aliases.items())}
    if normalized in alias_lookup:
        return alias_lookup[normalized]
    canon_by_norm = {normalize_name(c): c for c in kb.component_types}
    if normalized in canon_by_norm:
        return canon_by_norm[normalized]
    squashed = _squash(normalized)
    canon_by_squash = {_squash(normalize_name(c)): c for c in kb.component_types}
    if squashed in canon_by_squash:
        return canon_by_squash[squashed]
    suffix_hits = [
        (canon_squash, canon)
        for canon_squash, canon in canon_by_squash.items()
        if len(canon_squash) >= 4 and squashed.endswith(canon_squash) and squashed != canon_squash
    ]
    if suffix_hits:
        suffix_hits.sort(
            key=lambda item: (
                -len(item[0]),
                -_common_prefix_len(squashed, item[0]),
                item[1],
            )
        )
        return suffix_hits[0][1]
    return None


def map_components(
    instances: list[ComponentInstance],
    kb: KnowledgeBase,
    llm: LlmClient | None = None,
    warnings: list[str] | None = None,
) -> list[ComponentInstance]:
    """Fill canonical_type on each instance; idempotent.

    Resolution order: exact alias, normalized alias, normalized canonical,
    squashed canonical, suffix match, then an optional LLM proposal checked
    against the component index. Unresolved instances stay unmapped and are
    reported through `warnings`.
    """
    out = []
    for instance in instances:
        if instance.canonical_type is not None:
            out.append(instance)
            continue
        canonical = _match_canonical(instance.raw_name, kb)
        if canonical is None and llm is not None:
            canonical = _llm_map(instance, kb, llm, warnings)
        if canonical is None:
            if warnings is not None:
                warnings.append(f"unmapped component: {instance.raw_name!r}")
            out.append(instance)
        else:
            out.append(replace(instance, canonical_type=canonical))
    return out


def _llm_map(
    instance: ComponentInstance,
    kb: KnowledgeBase,
    llm: LlmClient,
    warnings: list[str] | None,
) -> str | None:
    prompt = (
        f"{TASK_MARKER} map-component\n"
        f"Component name found in a page: {json.dumps(instance.raw_name)}\n"
        f"Usage excerpt: {json.dumps(instance.sample_markup)}\n"
        f"Known component types: {json.dumps(list(kb.component_types))}\n"
        "Answer with a JSON string naming the matching known type, "
        "or null if none applies. No prose.\n"
        "### END\n"
    )
    try:
        answer = extract_json(llm.send(prompt))
    except LlmProtocolError as exc:
        if warnings is not None:
            warnings.append(f"llm mapping failed for {instance.raw_name!r}: {exc}")
        return None
    if not isinstance(answer, str):
        return None
    if answer in kb.component_index:
        return answer
    normalized = normalize_name(answer)
    for canonical in kb.component_types:
        if normalize_name(canonical) == normalized:
            return canonical
    return None


# --- property extraction ---------------------------------------------------

CLICKABLE_TAGS = frozenset({"button", "select", "textarea", "summary"})
NATURALLY_FOCUSABLE = frozenset({"button", "select", "textarea", "input", "a"})
# layout containers checked for spacing symmetry; list markup is content,
# not layout, and its default asymmetric padding-left is fine
CONTAINER_TAGS = frozenset(
    {"div", "section", "article", "aside", "header", "footer", "main", "nav", "form", "body"}
)
LABELABLE_TAGS = frozenset({"img", "input", "button", "a"})
LANDMARK_TAGS = {
    "nav": "navigation",
    "main": "main",
    "header": "banner",
    "footer": "contentinfo",
    "aside": "complementary",
}
LANDMARK_ROLES = frozenset(
    {"banner", "navigation", "main", "contentinfo", "complementary", "form", "region", "search"}
)
_HEADING_RE = re.compile(r"^h([1-6])$")


def _hidden_ids(snapshot: DomSnapshot) -> set[int]:
    hidden: set[int] = set()
    for node in snapshot.nodes:
        if node.styles.get("display") == "none" or (
            node.parent_id is not None and node.parent_id in hidden
        ):
            hidden.add(node.id)
    return hidden


def _reconstruct_outer_html(node: DomNode, limit: int = 160) -> str:
    attrs = "".join(f' {k}="{v}"' for k, v in sorted(node.attributes.items()))
    text = node.text[:60]
    markup = f"<{node.tag}{attrs}>{text}"
    return markup[:limit]


def _is_clickable(node: DomNode) -> bool:
    if node.tag in CLICKABLE_TAGS:
        return True
    if node.tag == "a" and "href" in node.attributes:
        return True
    if node.tag == "input" and node.attributes.get("type", "").lower() != "hidden":
        return True
    return node.attributes.get("role", "").lower() in ("button", "link", "checkbox")


def _is_focusable(node: DomNode) -> bool:
    if "disabled" in node.attributes:
        return False
    tabindex = node.attributes.get("tabindex")
    if tabindex is not None:
        try:
            return int(tabindex) >= 0
        except ValueError:
            return False
    return node.tag in NATURALLY_FOCUSABLE


def _subtree_text(snapshot: DomSnapshot, node: DomNode) -> str:
    parts = [node.text]
    for child in snapshot.children(node.id):
        parts.append(_subtree_text(snapshot, child))
    return " ".join(p for p in parts if p).strip()


def accessible_name(snapshot: DomSnapshot, node: DomNode) -> str | None:
    """Accessible name with precedence: aria-label, aria-labelledby target
    text, alt, associated label[for], then inner text for buttons/links."""
    if "aria-label" in node.attributes:
        return node.attributes["aria-label"]
    labelledby = node.attributes.get("aria-labelledby")
    if labelledby:
        for other in snapshot.nodes:
            if other.attributes.get("id") == labelledby:
                return _subtree_text(snapshot, other)
    if "alt" in node.attributes:
        return node.attributes["alt"]
    node_dom_id = node.attributes.get("id")
    if node_dom_id:
        for other in snapshot.nodes:
            if other.tag == "label" and other.attributes.get("for") == node_dom_id:
                return _subtree_text(snapshot, other)
    if node.tag in ("button", "a") or node.attributes.get("role") in ("button", "link"):
        text = _subtree_text(snapshot, node)
        if text:
            return text
    if node.tag == "input":
        value = node.attributes.get("value")
        if value and node.attributes.get("type", "").lower() in ("submit", "button", "reset"):
            return value
    return None


def _composite_fg(node: DomNode, bg) -> tuple[float, float, float, float]:
    fg = node.style_color("color")
    if fg[3] >= 1.0:
        return fg
    composed = alpha_over(fg, bg)
    return (composed[0], composed[1], composed[2], 1.0)


def extract_properties(
    snapshots: list[DomSnapshot] | DomSnapshot,
    warnings: list[str] | None = None,
) -> dict[PropertyGroup, list[PropertyRecord]]:
    """Walk snapshots and fill the seven property groups in document order.

    The first snapshot drives everything except Platform, which compares
    geometry across snapshots and needs at least two distinct viewport
    widths (otherwise it stays empty and a warning is emitted). Nodes in
    display:none subtrees are skipped.
    """
    if isinstance(snapshots, DomSnapshot):
        snapshots = [snapshots]
    if not snapshots:
        raise ValueError("need at least one snapshot")

    primary = snapshots[0]
    confidence = Confidence.ESTIMATED if primary.estimated else Confidence.MEASURED
    hidden = _hidden_ids(primary)
    groups: dict[PropertyGroup, list[PropertyRecord]] = {g: [] for g in ALL_GROUPS}

    def record(group: PropertyGroup, node: DomNode, values: dict) -> None:
        groups[group].append(
            PropertyRecord(
                group=group,
                xpath=node.xpath,
                outer_html=_reconstruct_outer_html(node),
                values=values,
                confidence=confidence,
            )
        )

    for node in primary.nodes:
        if node.id in hidden:
            continue

        if node.text:
            bg = effective_background(primary, node.id)
            fg = _composite_fg(node, bg)
            record(
                PropertyGroup.COLOR,
                node,
                {
                    "fg": fg,
                    "bg": bg,
                    "contrast_ratio": contrast_ratio(fg, bg),
                    "font_size_px": node.style_px("font-size", 16.0),
                },
            )
            heading = _HEADING_RE.match(node.tag)
            record(
                PropertyGroup.TEXT,
                node,
                {
                    "font_size_px": node.style_px("font-size", 16.0),
                    "heading_level": int(heading.group(1)) if heading else None,
                    "tag": node.tag,
                },
            )

        if _is_clickable(node):
            record(
                PropertyGroup.CLICKABLE,
                node,
                {
                    "x": node.bbox.x,
                    "y": node.bbox.y,
                    "width": node.bbox.width,
                    "height": node.bbox.height,
                    "focusable": _is_focusable(node),
                    "display": node.styles.get("display", "block"),
                },
            )

        if node.tag in CONTAINER_TAGS:
            record(
                PropertyGroup.SPACING,
                node,
                {
                    "padding": tuple(
                        node.style_px(f"padding-{side}") for side in ("top", "right", "bottom", "left")
                    ),
                    "margin": tuple(
                        node.style_px(f"margin-{side}") for side in ("top", "right", "bottom", "left")
                    ),
                },
            )

        if node.tag in LABELABLE_TAGS and node.attributes.get("type", "").lower() != "hidden":
            record(
                PropertyGroup.LABEL,
                node,
                {"tag": node.tag, "accessible_name": accessible_name(primary, node)},
            )

        role = node.attributes.get("role", "").lower()
        landmark = role if role in LANDMARK_ROLES else LANDMARK_TAGS.get(node.tag)
        if landmark:
            record(PropertyGroup.GROUP, node, {"landmark_role": landmark})

    _extract_platform(snapshots, groups, warnings)
    return groups


def _extract_platform(
    snapshots: list[DomSnapshot],
    groups: dict[PropertyGroup, list[PropertyRecord]],
    warnings: list[str] | None,
) -> None:
    widths = sorted({s.viewport[0] for s in snapshots})
    if len(widths) < 2:
        if warnings is not None:
            warnings.append(
                "platform records need snapshots at two or more distinct viewport widths"
            )
        return
    ordered = sorted(snapshots, key=lambda s: s.viewport[0])
    base = ordered[0]
    by_xpath = [{n.xpath: n for n in s.nodes} for s in ordered]
    hidden = _hidden_ids(base)
    confidence = (
        Confidence.ESTIMATED if any(s.estimated for s in ordered) else Confidence.MEASURED
    )
    for node in base.nodes:
        if node.id in hidden:
            continue
        if not all(node.xpath in index for index in by_xpath):
            continue
        node_widths = [index[node.xpath].bbox.width for index in by_xpath]
        x_offsets = [index[node.xpath].bbox.x for index in by_xpath]
        groups[PropertyGroup.PLATFORM].append(
            PropertyRecord(
                group=PropertyGroup.PLATFORM,
                xpath=node.xpath,
                outer_html=_reconstruct_outer_html(node),
                values={
                    "viewport_widths": tuple(s.viewport[0] for s in ordered),
                    "widths": tuple(node_widths),
                    "x_offsets": tuple(x_offsets),
                    "width_delta": max(node_widths) - min(node_widths),
                },
                confidence=confidence,
            )
        )


def retrieve_knowledge(
    bundle: ExtractionBundle,
    kb: KnowledgeBase,
    warnings: list[str] | None = None,
) -> KnowledgeBundle:
    """Aggregate guideline entries for the bundle's components and groups."""
    component_knowledge: dict[str, list[GuidelineEntry]] = {}
    for instance in bundle.components:
        if instance.canonical_type is None:
            if warnings is not None:
                warnings.append(f"skipping unmapped component {instance.raw_name!r}")
            continue
        if instance.canonical_type not in component_knowledge:
            component_knowledge[instance.canonical_type] = query_component(
                kb, instance.canonical_type
            )
    property_knowledge: dict[PropertyGroup, list[GuidelineEntry]] = {}
    for group in ALL_GROUPS:
        if bundle.property_groups.get(group):
            property_knowledge[group] = query_property(kb, group)
    return KnowledgeBundle(
        component_knowledge=dict(sorted(component_knowledge.items())),
        property_knowledge=property_knowledge,
    )
