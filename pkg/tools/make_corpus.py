#!/usr/bin/env python3
"""Generate the seeded-violation fixture corpus.

Writes tests/fixtures/corpus/pages/*.html plus labels.jsonl. Every page is
assembled from recipe elements; seeded violations land on their own
top-level body elements so spans never overlap, and all other content is
authored to stay clean under the default thresholds. Ground-truth labels
come from construction knowledge (what was seeded where), then the script
cross-checks that the pipeline detects exactly the seeded set and that
mock repair converges, failing loudly on any drift.

    python tools/make_corpus.py
"""

from __future__ import annotations

import json
import sys
from dataclasses import dataclass
from pathlib import Path

REPO = Path(__file__).resolve().parents[1]
sys.path.insert(0, str(REPO / "src"))

from designlint.color import contrast_ratio, parse_css_color  # noqa: E402
from designlint.kb import ConstraintKind  # noqa: E402
from designlint.pipeline import PipelineConfig, analyze_page, repair_page  # noqa: E402

RULE_GUIDELINE = {
    "contrast": "SYS-color-contrast-minimum",
    "label-overflow": "COMP-button-label-width",
    "target-size": "SYS-clickable-target-size",
    "missing-label": "SYS-label-alt-text",
    "heading-order": "SYS-text-heading-hierarchy",
    "spacing-symmetry": "SYS-spacing-padding-balance",
}
RULE_ORIGIN = {rule: ("component" if rule == "label-overflow" else "property")
               for rule in RULE_GUIDELINE}


@dataclass
class Element:
    html: str
    seed_rule: str | None = None  # checker rule this element violates, if any


def _ratio(fg_hex: str, bg_hex: str) -> float:
    return contrast_ratio(parse_css_color(fg_hex), parse_css_color(bg_hex))


def _assert_ratio(fg: str, bg: str, low: float, high: float) -> None:
    value = _ratio(fg, bg)
    assert low < value < high, f"{fg} on {bg}: ratio {value:.3f} outside ({low}, {high})"


# --- clean building blocks -------------------------------------------------

def heading(level: int, text: str) -> Element:
    return Element(f"<h{level}>{text}</h{level}>")


def para(text: str, color: str = "#222222") -> Element:
    _assert_ratio(color, "#ffffff", 4.8, 22.0)
    return Element(f'<p style="color:{color}">{text}</p>')


def big_button(label: str) -> Element:
    assert len(label) >= 4, "auto-width buttons need labels of 4+ chars"
    return Element(f'<button style="height:48px">{label}</button>')


def labeled_img(name: str) -> Element:
    return Element(f'<img src="{name}.png" width="120" height="90" alt="{name}">')


def labeled_input(kind: str, label: str) -> Element:
    return Element(
        f'<input type="{kind}" aria-label="{label}" style="width:220px;height:48px">'
    )


def nav_bar(cls: str | None = None, data_component: str | None = None) -> Element:
    attrs = ' aria-label="Main"'
    if cls:
        attrs += f' class="{cls}"'
    if data_component:
        attrs += f' data-component="{data_component}"'
    return Element(
        f"<nav{attrs}><a href=\"/\">Home</a> <a href=\"/docs\">Docs</a> "
        f"<a href=\"/pricing\">Pricing</a></nav>"
    )


def section(text: str, padding: int = 12) -> Element:
    return Element(f'<section style="padding:{padding}px">{text}</section>')


def item_list(items: list[str]) -> Element:
    inner = "".join(f"<li>{item}</li>" for item in items)
    return Element(f"<ul>{inner}</ul>")


def card(title: str, body: str) -> Element:
    return Element(
        f'<div class="card" style="padding:16px;background-color:#f7f7f7">'
        f'<h2 style="font-size:20px">{title}</h2><p>{body}</p></div>'
    )


def custom_buttons() -> list[Element]:
    return [
        Element("<likebutton>Like this</likebutton>"),
        Element("<sharebutton>Share now</sharebutton>"),
    ]


def large_text_ok(text: str, color: str = "#8a8a8a", size: int = 28) -> Element:
    # large text passes at 3:1; keep a safety band on both sides
    _assert_ratio(color, "#ffffff", 3.1, 4.4)
    return Element(f'<p style="font-size:{size}px;color:{color}">{text}</p>')


# --- seeded violations -----------------------------------------------------

def seed_contrast(text: str, color: str = "#999999", bg: str = "#ffffff") -> Element:
    _assert_ratio(color, bg, 1.0, 4.4)
    style = f"color:{color}"
    if bg != "#ffffff":
        style += f";background-color:{bg}"
    return Element(f'<p style="{style}">{text}</p>', seed_rule="contrast")


def seed_contrast_button(label: str) -> Element:
    # white label on the default button face
    _assert_ratio("#ffffff", "#efefef", 1.0, 4.4)
    return Element(
        f'<button style="height:48px;color:#ffffff">{label}</button>',
        seed_rule="contrast",
    )


def seed_contrast_large(text: str, color: str = "#b0b0b0") -> Element:
    _assert_ratio(color, "#ffffff", 1.0, 2.9)
    return Element(
        f'<p style="font-size:32px;color:{color}">{text}</p>', seed_rule="contrast"
    )


def seed_overflow(label: str, width: int = 60) -> Element:
    # label estimate must clearly exceed the content width at 16px base font
    assert 0.6 * 16 * len(label) > width - 24 + 20
    return Element(
        f'<button style="width:{width}px;height:48px">{label}</button>',
        seed_rule="label-overflow",
    )


def seed_target(size: int = 24) -> Element:
    assert size < 44
    return Element(
        f'<button aria-label="close" style="width:{size}px;height:{size}px;padding:0">x</button>',
        seed_rule="target-size",
    )


def seed_missing_img(name: str = "photo") -> Element:
    return Element(f'<img src="{name}.jpg" width="120" height="90">', seed_rule="missing-label")


def seed_missing_input() -> Element:
    return Element(
        '<input type="text" style="width:220px;height:48px">', seed_rule="missing-label"
    )


def seed_missing_icon_button() -> Element:
    return Element(
        '<button style="width:64px;height:64px"></button>', seed_rule="missing-label"
    )


def seed_heading(level: int, text: str) -> Element:
    return Element(f"<h{level}>{text}</h{level}>", seed_rule="heading-order")


def seed_spacing(text: str, left: int = 28, right: int = 10) -> Element:
    assert abs(left - right) > 4
    return Element(
        f'<div style="padding-left:{left}px;padding-right:{right}px">{text}</div>',
        seed_rule="spacing-symmetry",
    )


# --- fixtures ---------------------------------------------------------------

FIXTURES: dict[str, list[Element]] = {
    "fixture-01-clean-landing": [
        heading(1, "Acme Cloud"),
        nav_bar(),
        para("Deploy your services in seconds with sensible defaults."),
        big_button("Get started"),
        labeled_img("dashboard"),
    ],
    "fixture-02-contrast-paragraph": [
        heading(1, "Release notes"),
        para("Everything that changed in the latest version."),
        seed_contrast("Published two weeks ago by the platform team"),
        big_button("Subscribe"),
    ],
    "fixture-03-contrast-button": [
        heading(1, "Documents"),
        para("All drafts are saved automatically."),
        seed_contrast_button("Save Draft"),
    ],
    "fixture-04-label-overflow": [
        heading(1, "Checkout"),
        para("Review the order before paying."),
        seed_overflow("Confirm purchase"),
        big_button("Back to cart"),
    ],
    "fixture-05-target-size": [
        heading(1, "Gallery"),
        para("Browse the latest uploads from your team."),
        seed_target(),
        labeled_img("sunset"),
    ],
    "fixture-06-missing-alt": [
        heading(1, "Our team"),
        para("The people behind the product."),
        seed_missing_img("team"),
        labeled_img("office"),
    ],
    "fixture-07-heading-skip": [
        heading(1, "Handbook"),
        para("Company policies and practical guides."),
        seed_heading(3, "Remote work"),
        para("Work from anywhere within four time zones."),
    ],
    "fixture-08-spacing": [
        heading(1, "Pricing"),
        seed_spacing("Starter plan with community support"),
        section("Pro plan with priority support"),
    ],
    "fixture-09-contrast-and-alt": [
        heading(1, "Blog"),
        seed_contrast("Posted in engineering, photography, design"),
        seed_missing_img("cover"),
        para("Read about how we build and run our stack."),
    ],
    "fixture-10-target-and-spacing": [
        heading(1, "Settings"),
        seed_target(20),
        seed_spacing("Notification preferences", 24, 6),
        big_button("Save changes"),
    ],
    "fixture-11-overflow-and-heading": [
        heading(1, "Careers"),
        heading(2, "Open roles"),
        seed_overflow("Apply immediately", 72),
        seed_heading(4, "Benefits"),
    ],
    "fixture-12-three-issues": [
        heading(1, "Profile"),
        seed_contrast("Member since last spring", "#a0a0a0"),
        seed_target(28),
        seed_missing_input(),
        big_button("Update profile"),
    ],
    "fixture-13-custom-buttons": [
        heading(1, "Feed"),
        *custom_buttons(),
        seed_contrast("Sponsored content appears here"),
        para("Follow topics to tune your feed."),
    ],
    "fixture-14-navbars-alias": [
        heading(1, "Shop"),
        nav_bar(cls="Navbars"),
        seed_spacing("Featured products this week", 30, 8),
        big_button("View cart"),
    ],
    "fixture-15-navigation-menu-alias": [
        heading(1, "Support"),
        nav_bar(data_component="Navigation Menu"),
        seed_heading(3, "Contact options"),
        para("Reach us by chat, email, or phone."),
    ],
    "fixture-16-card-contrast": [
        heading(1, "Projects"),
        card("Apollo", "Migration of the billing pipeline."),
        Element(
            '<div class="card" style="padding:16px;background-color:#f2f2f2;color:#8c8c8c">'
            "Archived project, read only</div>",
            seed_rule="contrast",
        ),
    ],
    "fixture-17-form-labels": [
        heading(1, "Sign up"),
        labeled_input("email", "email address"),
        seed_missing_input(),
        labeled_input("checkbox", "subscribe to newsletter"),
        big_button("Create account"),
    ],
    "fixture-18-list-overflow": [
        heading(1, "Downloads"),
        item_list(["Quarterly report", "Brand assets", "Press kit"]),
        seed_overflow("Download everything", 80),
    ],
    "fixture-19-four-issues": [
        heading(1, "Dashboard"),
        seed_contrast("Refreshed a few seconds ago", "#9a9a9a"),
        seed_target(32),
        seed_missing_img("chart"),
        seed_spacing("Weekly summary", 26, 4),
    ],
    "fixture-20-clean-form": [
        heading(1, "Billing"),
        para("Invoices are emailed on the first of each month."),
        labeled_input("text", "company name"),
        labeled_input("email", "billing email"),
        big_button("Save billing info"),
    ],
    "fixture-21-large-text": [
        heading(1, "Announcements"),
        large_text_ok("Quarterly all-hands on Friday"),
        seed_contrast_large("Archived announcements below"),
        para("Recordings are available for two weeks."),
    ],
    "fixture-22-heading-chain": [
        heading(1, "Guides"),
        heading(2, "Getting started"),
        seed_heading(4, "Advanced topics"),
        seed_contrast("Last reviewed by the docs team", "#989898"),
    ],
    "fixture-23-clean-blog": [
        heading(1, "Why we rewrote the importer"),
        para("The old importer struggled with large workspaces."),
        heading(2, "What changed"),
        para("Batching, retries, and a resumable cursor."),
        item_list(["Faster syncs", "Fewer timeouts", "Clearer errors"]),
    ],
    "fixture-24-kitchen-sink": [
        heading(1, "Component lab"),
        seed_contrast("Specimen caption in light gray"),
        seed_overflow("Regenerate preview", 70),
        seed_target(26),
        seed_missing_img("specimen"),
        seed_heading(4, "Specimen metadata"),
        seed_spacing("Layout scratch area", 22, 2),
    ],
    "fixture-25-two-contrast": [
        heading(1, "Changelog"),
        seed_contrast("Version tags shown in gray", "#a4a4a4"),
        para("Breaking changes are called out explicitly."),
        seed_contrast("Deprecated entries are dimmed", "#9e9e9e"),
        seed_heading(3, "Older releases"),
    ],
    "fixture-26-controls": [
        heading(1, "Editor"),
        seed_overflow("Insert component", 64),
        seed_target(30),
        seed_spacing("Canvas rulers", 18, 40),
        big_button("Preview page"),
    ],
    "fixture-27-clean-pricing": [
        heading(1, "Plans"),
        nav_bar(),
        section("Starter: for personal projects"),
        section("Team: for growing companies"),
        big_button("Compare plans"),
        labeled_img("plans"),
    ],
}

PAGE_HEAD = "<html><head><title>{title}</title></head><body>\n"
PAGE_TAIL = "</body></html>\n"


def build_page(name: str, elements: list[Element]) -> tuple[str, list[dict]]:
    title = name.replace("fixture-", "").replace("-", " ")
    text = PAGE_HEAD.format(title=title)
    tag_counts: dict[str, int] = {}
    labels = []
    for element in elements:
        start = len(text)
        tag = element.html[1:].split(">", 1)[0].split(" ", 1)[0]
        tag_counts[tag] = tag_counts.get(tag, 0) + 1
        xpath = f"/html[1]/body[1]/{tag}[{tag_counts[tag]}]"
        text += element.html
        if element.seed_rule:
            labels.append(
                {
                    "fixture": name,
                    "guideline_id": RULE_GUIDELINE[element.seed_rule],
                    "constraint_kind": "hard",
                    "origin": RULE_ORIGIN[element.seed_rule],
                    "xpath": xpath,
                    "span": [start, start + len(element.html)],
                    "rule": element.seed_rule,
                }
            )
        text += "\n"
    text += PAGE_TAIL
    return text, labels


def cross_check(config: PipelineConfig, name: str, page: str, labels: list[dict]) -> None:
    analysis = analyze_page(page, config, source_ref=name)
    detected = {(v.rule, v.xpath) for v in analysis.violations}
    expected = {(l["rule"], l["xpath"]) for l in labels}
    assert detected == expected, (
        f"{name}: detection drift\n  extra: {sorted(detected - expected)}\n"
        f"  missing: {sorted(expected - detected)}"
    )
    spans = {
        tuple(l["span"]): l["rule"] for l in labels
    }
    result = repair_page(page, config, source_ref=name)
    hard_residuals = [
        v for v in result.page.residual_violations
        if v.constraint_kind is ConstraintKind.HARD
    ]
    assert not hard_residuals, f"{name}: hard residuals remain: {hard_residuals}"
    applied_spans = {
        s.target_span for s in result.suggestions if s.id in set(result.page.applied)
    }
    for span, rule in spans.items():
        assert span in applied_spans, f"{name}: seeded {rule} at {span} not repaired"


def main() -> int:
    corpus = REPO / "tests" / "fixtures" / "corpus"
    pages_dir = corpus / "pages"
    pages_dir.mkdir(parents=True, exist_ok=True)
    for stale in pages_dir.glob("*.html"):
        stale.unlink()

    config = PipelineConfig.load()
    all_labels = []
    seeds_by_rule: dict[str, int] = {}
    for name, elements in sorted(FIXTURES.items()):
        page, labels = build_page(name, elements)
        cross_check(config, name, page, labels)
        (pages_dir / f"{name}.html").write_text(page, encoding="utf-8")
        for label in labels:
            seeds_by_rule[label["rule"]] = seeds_by_rule.get(label["rule"], 0) + 1
        all_labels.extend(labels)

    all_labels.sort(key=lambda l: (l["fixture"], l["span"][0]))
    lines = [json.dumps(l, ensure_ascii=False, sort_keys=True) for l in all_labels]
    (corpus / "labels.jsonl").write_text("\n".join(lines) + "\n", encoding="utf-8")

    print(f"wrote {len(FIXTURES)} pages, {len(all_labels)} seeded violations")
    for rule in sorted(seeds_by_rule):
        print(f"  {rule}: {seeds_by_rule[rule]}")
    assert len(FIXTURES) >= 20, "acceptance needs at least 20 pages"
    assert len(all_labels) >= 40, "acceptance needs at least 40 seeded hard violations"
    assert set(seeds_by_rule) == set(RULE_GUIDELINE), "every checker family must be seeded"
    return 0


if __name__ == "__main__":
    raise SystemExit(main())
