#!/usr/bin/env python3
"""Author the shipped KB bundle.

Regenerates src/designlint/data/kb/ from the guideline definitions below,
going through the canonical serializer so the bundle bytes always satisfy
the loader round-trip invariant. Run after editing guidelines:

    python tools/build_kb.py
"""

from __future__ import annotations

import json
import sys
from pathlib import Path

REPO = Path(__file__).resolve().parents[1]
sys.path.insert(0, str(REPO / "src"))

from designlint.kb import (  # noqa: E402
    ConstraintKind,
    GuidelineEntry,
    KnowledgeBase,
    Polarity,
    PropertyGroup,
    SourceSection,
    SystemTriple,
    Tier,
    load_kb,
    write_bundle,
)

H, S = ConstraintKind.HARD, ConstraintKind.SOFT
DO, DONT, REC = Polarity.DO, Polarity.DONT, Polarity.RECOMMENDED
F, ST, C = SourceSection.FOUNDATIONS, SourceSection.STYLES, SourceSection.COMPONENTS


def comp(eid, ctype, aspect, kind, polarity, text):
    return GuidelineEntry(
        id=eid, tier=Tier.COMPONENT, design_aspect=aspect, constraint_kind=kind,
        polarity=polarity, text=text, source_section=C, component_type=ctype,
    )


def sys_(eid, aspect, section, kind, polarity, text):
    return GuidelineEntry(
        id=eid, tier=Tier.SYSTEM, design_aspect=aspect, constraint_kind=kind,
        polarity=polarity, text=text, source_section=section,
    )


ENTRIES = [
    # button
    comp("COMP-button-label-width", "button", "usage", H, DONT,
         "A button container's width shouldn't be narrower than its label text."),
    comp("COMP-button-filled-prominence", "button", "usage", S, REC,
         "Use visually prominent filled buttons for the most important actions."),
    comp("COMP-button-target-size", "button", "anatomy", H, DO,
         "Give buttons a touch target of at least 48x48 pixels so they stay comfortably tappable."),
    comp("COMP-button-accessible-name", "button", "anatomy", H, DO,
         "Icon-only buttons must expose an accessible name for assistive technology."),
    comp("COMP-button-label-concise", "button", "usage", S, REC,
         "Keep button labels short, action-led, and specific to the action they trigger."),
    comp("COMP-button-one-primary", "button", "layout", S, REC,
         "Prefer a single high-emphasis button per view so the primary action stays obvious."),
    # navigation bar
    comp("COMP-navigation-bar-destinations", "navigation bar", "usage", H, DO,
         "Use a navigation bar for three to seven top-level destinations of equal importance."),
    comp("COMP-navigation-bar-labels", "navigation bar", "anatomy", H, DO,
         "Show a text label with every navigation icon so destinations stay identifiable."),
    comp("COMP-navigation-bar-landmark", "navigation bar", "anatomy", H, DO,
         "Mark the primary navigation with a nav landmark so assistive technology can reach it directly."),
    comp("COMP-navigation-bar-order", "navigation bar", "behavior", S, REC,
         "Keep destination order stable across sessions and screen sizes."),
    # card
    comp("COMP-card-padding", "card", "layout", H, DO,
         "Keep card inner padding consistent on the left and right edges."),
    comp("COMP-card-single-topic", "card", "usage", S, REC,
         "A card should represent a single coherent subject; split unrelated content into separate cards."),
    comp("COMP-card-action-placement", "card", "layout", S, REC,
         "Place card actions at the bottom of the card, aligned to the start edge."),
    # list
    comp("COMP-list-semantics", "list", "anatomy", H, DO,
         "Build lists from list markup so item count and position are announced to assistive technology."),
    comp("COMP-list-item-consistency", "list", "layout", S, REC,
         "Keep item heights consistent within a list block."),
    comp("COMP-list-divider-restraint", "list", "usage", S, REC,
         "Use dividers sparingly; whitespace alone can separate short list items."),
    # text field
    comp("COMP-text-field-label", "text field", "anatomy", H, DO,
         "Every text field needs a visible or programmatic label describing the expected input."),
    comp("COMP-text-field-placeholder", "text field", "usage", H, DONT,
         "Don't use placeholder text as the only label; it disappears once the user types."),
    comp("COMP-text-field-error-text", "text field", "behavior", S, REC,
         "Pair validation errors with supporting text explaining how to fix the input."),
    # checkbox
    comp("COMP-checkbox-label", "checkbox", "anatomy", H, DO,
         "Give each checkbox a label that states the option it controls."),
    comp("COMP-checkbox-affirmative", "checkbox", "usage", S, REC,
         "Phrase checkbox labels affirmatively so that checked means on."),
    comp("COMP-checkbox-group-title", "checkbox", "layout", S, REC,
         "Title checkbox groups so the set of options reads as one decision."),
    # system: color
    sys_("SYS-color-contrast-minimum", "Color", F, H, DO,
         "Body text must reach a contrast ratio of at least 4.5:1 against its effective background; "
         "text of 24 pixels or larger must reach at least 3:1."),
    sys_("SYS-color-contrast-interactive", "Color", F, H, DO,
         "Text on interactive elements must stay readable against the element's own background in every state."),
    sys_("SYS-color-not-alone", "Color", F, H, DONT,
         "Don't use color as the only means of communicating a state or an action."),
    sys_("SYS-color-roles", "Color", ST, S, REC,
         "Assign colors by role (primary, secondary, surface) rather than hard-coding one-off decorative values."),
    # system: label
    sys_("SYS-label-alt-text", "Label", F, H, DO,
         "Images, icons, and icon buttons must provide alternative text or an accessible name."),
    sys_("SYS-label-captions", "Label", F, S, REC,
         "Provide captions or transcripts for media so content stays usable without audio."),
    sys_("SYS-label-decorative", "Structure", F, S, REC,
         "Mark purely decorative imagery as such so assistive technology can skip it."),
    # system: text
    sys_("SYS-text-heading-hierarchy", "Structure", F, H, DONT,
         "Don't skip heading levels; each heading should be at most one level deeper than the previous one."),
    sys_("SYS-text-minimum-size", "Text", F, H, DO,
         "Keep body text at or above 12 pixels so it stays legible at typical viewing distances."),
    sys_("SYS-text-line-length", "Text", F, S, REC,
         "Keep running text between roughly 40 and 90 characters per line."),
    sys_("SYS-text-type-scale", "Typography", ST, S, REC,
         "Draw font sizes from a defined type scale instead of per-element one-off values."),
    # system: clickable
    sys_("SYS-clickable-target-size", "Structure", F, H, DO,
         "Interactive targets need at least 48x48 pixels of hit area, including padding."),
    sys_("SYS-clickable-focus-order", "Flow", F, H, DO,
         "Focus order must follow the reading order of the page."),
    sys_("SYS-clickable-elevation", "Elevation", ST, S, REC,
         "Reserve raised elevation for elements that float above content, such as dialogs and menus."),
    # system: spacing
    sys_("SYS-spacing-padding-balance", "Layout", F, H, DO,
         "Keep horizontal padding symmetric on layout containers unless the design explicitly calls for an offset."),
    sys_("SYS-spacing-rhythm", "Layout", F, S, REC,
         "Space sibling blocks on a consistent rhythm, preferring multiples of a base unit."),
    # system: group
    sys_("SYS-group-landmarks", "Structure", F, H, DO,
         "Expose page regions as landmarks (banner, navigation, main, contentinfo) exactly once each."),
    sys_("SYS-group-nav-priority", "Flow", F, S, REC,
         "Order navigation by user priority, with the most common destination first."),
    sys_("SYS-group-layout-regions", "Layout", F, S, REC,
         "Compose pages from distinct regions with a single main content area."),
    # system: platform
    sys_("SYS-platform-responsive", "Layout", F, H, DO,
         "Layouts must reflow without clipping or overlap across supported viewport widths."),
    sys_("SYS-platform-consistency", "Implementation", F, S, REC,
         "Keep component behavior consistent across platforms, adapting only presentation."),
    # system: styles odds and ends
    sys_("SYS-icons-recognizable", "Icons", ST, S, REC,
         "Prefer familiar icon metaphors and pair novel icons with text labels."),
    sys_("SYS-shape-consistency", "Shape", ST, S, REC,
         "Apply corner shapes from one shape scale across components of the same family."),
]

TRIPLES = [
    SystemTriple("Structure", PropertyGroup.GROUP, "landmark-structure",
                 ("SYS-group-landmarks",)),
    SystemTriple("Flow", PropertyGroup.GROUP, "navigation-priority",
                 ("SYS-group-nav-priority",)),
    SystemTriple("Layout", PropertyGroup.GROUP, "region-composition",
                 ("SYS-group-layout-regions",)),
    SystemTriple("Structure", PropertyGroup.CLICKABLE, "target-size",
                 ("SYS-clickable-target-size",)),
    SystemTriple("Flow", PropertyGroup.CLICKABLE, "focus-order",
                 ("SYS-clickable-focus-order",)),
    SystemTriple("Elevation", PropertyGroup.CLICKABLE, "floating-elements",
                 ("SYS-clickable-elevation",)),
    SystemTriple("Layout", PropertyGroup.SPACING, "spatial-arrangement",
                 ("SYS-spacing-padding-balance", "SYS-spacing-rhythm")),
    SystemTriple("Implementation", PropertyGroup.PLATFORM, "cross-platform-behavior",
                 ("SYS-platform-consistency",)),
    SystemTriple("Layout", PropertyGroup.PLATFORM, "responsive-layout",
                 ("SYS-platform-responsive",)),
    SystemTriple("Label", PropertyGroup.LABEL, "content-accessibility",
                 ("SYS-label-alt-text", "SYS-label-captions")),
    SystemTriple("Structure", PropertyGroup.LABEL, "accessibility-labeling",
                 ("SYS-label-decorative",)),
    SystemTriple("Typography", PropertyGroup.TEXT, "type-scale",
                 ("SYS-text-type-scale",)),
    SystemTriple("Text", PropertyGroup.TEXT, "content-sizing",
                 ("SYS-text-minimum-size", "SYS-text-line-length")),
    SystemTriple("Structure", PropertyGroup.TEXT, "heading-hierarchy",
                 ("SYS-text-heading-hierarchy",)),
    SystemTriple("Color", PropertyGroup.COLOR, "contrast-accessibility",
                 ("SYS-color-contrast-minimum", "SYS-color-contrast-interactive", "SYS-color-not-alone")),
    SystemTriple("Color", PropertyGroup.COLOR, "color-roles",
                 ("SYS-color-roles",)),
]

ALIASES = {
    # navigation bar
    "Navbars": "navigation bar",
    "Navbar": "navigation bar",
    "navbar": "navigation bar",
    "Navigation Menu": "navigation bar",
    "NavigationMenu": "navigation bar",
    "navigation-menu": "navigation bar",
    "AppBar": "navigation bar",
    "app bar": "navigation bar",
    "TopBar": "navigation bar",
    "menubar": "navigation bar",
    "nav": "navigation bar",
    "navigation": "navigation bar",
    # button
    "btn": "button",
    "push button": "button",
    "PushButton": "button",
    "IconButton": "button",
    "icon button": "button",
    "fab": "button",
    # card
    "Card": "card",
    "tile": "card",
    "panel": "card",
    # list
    "ListView": "list",
    "list-group": "list",
    "ul": "list",
    "ol": "list",
    "listbox": "list",
    # text field
    "TextField": "text field",
    "TextInput": "text field",
    "text input": "text field",
    "textbox": "text field",
    "input": "text field",
    "textarea": "text field",
    # checkbox
    "CheckBox": "checkbox",
    "check box": "checkbox",
    "tick box": "checkbox",
}

# Corpus facts about the upstream guideline source (Material Design 3); the
# shipped bundle is a schema-complete curated subset of it.
SOURCE_CORPUS = {
    "name": "Material Design 3",
    "component_types": 24,
    "component_hard_constraints": 228,
    "component_hard_do": 113,
    "component_hard_dont": 115,
    "component_soft_constraints": 399,
    "system_design_aspects": 12,
    "foundations_entities": 118,
    "styles_entities": 80,
    "property_groups": 7,
    "mapping_relations": 15,
}

CHECKER_RULES = {
    "contrast": {
        "guideline_id": "SYS-color-contrast-minimum",
        "unit": {"kind": "property", "name": "Color"},
    },
    "label-overflow": {
        "guideline_id": "COMP-button-label-width",
        "unit": {"kind": "component", "name": "button"},
    },
    "target-size": {
        "guideline_id": "SYS-clickable-target-size",
        "unit": {"kind": "property", "name": "Clickable"},
    },
    "missing-label": {
        "guideline_id": "SYS-label-alt-text",
        "unit": {"kind": "property", "name": "Label"},
    },
    "heading-order": {
        "guideline_id": "SYS-text-heading-hierarchy",
        "unit": {"kind": "property", "name": "Text"},
    },
    "spacing-symmetry": {
        "guideline_id": "SYS-spacing-padding-balance",
        "unit": {"kind": "property", "name": "Spacing"},
    },
}


def main() -> int:
    entries = {e.id: e for e in ENTRIES}
    counts = {
        tier.value: {
            kind.value: sum(
                1 for e in entries.values()
                if e.tier is tier and e.constraint_kind is kind
            )
            for kind in ConstraintKind
        }
        for tier in Tier
    }
    component_index: dict[str, list[str]] = {}
    for e in entries.values():
        if e.component_type:
            component_index.setdefault(e.component_type, []).append(e.id)
    kb = KnowledgeBase(
        entries=dict(sorted(entries.items())),
        triples=tuple(TRIPLES),
        component_index={k: tuple(sorted(v)) for k, v in sorted(component_index.items())},
        aliases=dict(sorted(ALIASES.items())),
        manifest={
            "counts": counts,
            "component_types": sorted(component_index),
            "source_corpus": SOURCE_CORPUS,
        },
    )
    out = REPO / "src" / "designlint" / "data" / "kb"
    write_bundle(kb, out)
    (out / "checker_rules.json").write_text(
        json.dumps(CHECKER_RULES, indent=2, sort_keys=True) + "\n", encoding="utf-8"
    )
    loaded = load_kb(out)
    total = len(loaded.entries)
    print(f"wrote {out} ({total} entries, {len(loaded.triples)} triples, "
          f"{len(loaded.aliases)} aliases); validation OK")
    return 0


if __name__ == "__main__":
    raise SystemExit(main())
