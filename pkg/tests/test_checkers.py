from __future__ import annotations

import pytest

from designlint.checkers import (
    RuleTableError,
    Thresholds,
    check_contrast,
    check_heading_order,
    check_label_overflow,
    check_missing_label,
    check_spacing_symmetry,
    check_target_size,
    load_rule_table,
    run_checkers,
)
from designlint.extraction import (
    Confidence,
    ExtractionBundle,
    PropertyRecord,
    extract_components,
    extract_properties,
    map_components,
)
from designlint.kb import ALL_GROUPS, ConstraintKind, PropertyGroup, default_bundle_path, load_kb
from designlint.staticdom import parse_static

KB = load_kb(default_bundle_path())
RULES = load_rule_table(default_bundle_path(), KB)


def _color_record(ratio, font_size=16.0, confidence=Confidence.MEASURED):
    return PropertyRecord(
        group=PropertyGroup.COLOR,
        xpath="/html[1]/body[1]/p[1]",
        outer_html="<p>",
        values={
            "fg": (0.5, 0.5, 0.5, 1.0),
            "bg": (1.0, 1.0, 1.0, 1.0),
            "contrast_ratio": ratio,
            "font_size_px": font_size,
        },
        confidence=confidence,
    )


def test_rule_table_loads_and_covers_all_rules():
    assert set(RULES) == {
        "contrast", "label-overflow", "target-size",
        "missing-label", "heading-order", "spacing-symmetry",
    }
    for binding in RULES.values():
        entry = KB.entries[binding.guideline_id]
        assert entry.constraint_kind is ConstraintKind.HARD


def test_rule_table_missing_guideline_is_load_error(tmp_path):
    import json
    bundle = default_bundle_path()
    for name in ("entries.jsonl", "triples.jsonl", "aliases.json", "manifest.json"):
        (tmp_path / name).write_bytes((bundle / name).read_bytes())
    rules = json.loads((bundle / "checker_rules.json").read_text())
    rules["contrast"]["guideline_id"] = "SYS-does-not-exist"
    (tmp_path / "checker_rules.json").write_text(json.dumps(rules))
    kb = load_kb(tmp_path)
    with pytest.raises(RuleTableError):
        load_rule_table(tmp_path, kb)


def test_contrast_white_on_white_flags():
    violations = check_contrast([_color_record(1.0)], RULES)
    assert len(violations) == 1
    assert violations[0].guideline_id == "SYS-color-contrast-minimum"
    assert violations[0].constraint_kind is ConstraintKind.HARD


def test_contrast_767676_passes_at_threshold():
    # frozen oracle value: 4.542224959605253 >= 4.5
    violations = check_contrast([_color_record(4.542224959605253)], RULES)
    assert violations == []


def test_contrast_boundary_both_sides():
    assert check_contrast([_color_record(4.49)], RULES)
    assert not check_contrast([_color_record(4.51)], RULES)
    assert not check_contrast([_color_record(4.5)], RULES)  # rule is strictly below


def test_contrast_large_text_threshold():
    assert not check_contrast([_color_record(3.2, font_size=24.0)], RULES)
    assert check_contrast([_color_record(3.2, font_size=23.9)], RULES)
    assert check_contrast([_color_record(2.9, font_size=32.0)], RULES)


def test_contrast_confidence_propagates():
    violation = check_contrast(
        [_color_record(2.0, confidence=Confidence.ESTIMATED)], RULES
    )[0]
    assert violation.confidence is Confidence.ESTIMATED


def test_label_overflow_derived_cases():
    # 40px wide, 10-char label at 16px: 96px estimate > 16px content
    source = '<html><body><button style="width:40px">HelloWorld</button></body></html>'
    snap = parse_static(source)
    components = map_components(extract_components(source), KB)
    violations = check_label_overflow(components, snap, RULES)
    assert len(violations) == 1
    assert violations[0].evidence["label_width"] == pytest.approx(96.0)
    assert violations[0].evidence["content_width"] == pytest.approx(16.0)

    # 200px button with 2-char label: 19.2 < 176, fine
    source2 = '<html><body><button style="width:200px">Go</button></body></html>'
    assert check_label_overflow(
        map_components(extract_components(source2), KB), parse_static(source2), RULES
    ) == []


def test_label_overflow_empty_label_never_flags():
    source = '<html><body><button style="width:1px" aria-label="tiny"></button></body></html>'
    snap = parse_static(source)
    components = map_components(extract_components(source), KB)
    assert check_label_overflow(components, snap, RULES) == []


def test_label_overflow_covers_mapped_custom_buttons():
    source = '<html><body><likebutton style="width:30px">Like it a lot</likebutton></body></html>'
    snap = parse_static(source)
    components = map_components(extract_components(source), KB)
    violations = check_label_overflow(components, snap, RULES)
    assert len(violations) == 1
    assert violations[0].guideline_id == "COMP-button-label-width"


def _clickable(width, height, display="inline-block"):
    return PropertyRecord(
        group=PropertyGroup.CLICKABLE,
        xpath="/html[1]/body[1]/button[1]",
        outer_html="<button>",
        values={
            "x": 0.0, "y": 0.0, "width": width, "height": height,
            "focusable": True, "display": display,
        },
        confidence=Confidence.MEASURED,
    )


def test_target_size_boundaries():
    assert check_target_size([_clickable(20.0, 20.0)], RULES)
    assert check_target_size([_clickable(47.0, 60.0)], RULES)
    assert check_target_size([_clickable(60.0, 47.0)], RULES)
    assert not check_target_size([_clickable(48.0, 48.0)], RULES)


def test_target_size_inline_links_exempt():
    assert not check_target_size([_clickable(20.0, 19.2, display="inline")], RULES)


def _label(tag, name):
    return PropertyRecord(
        group=PropertyGroup.LABEL,
        xpath="/html[1]/body[1]/img[1]",
        outer_html=f"<{tag}>",
        values={"tag": tag, "accessible_name": name},
        confidence=Confidence.MEASURED,
    )


def test_missing_label_cases():
    assert check_missing_label([_label("img", None)], RULES)
    assert not check_missing_label([_label("img", "logo")], RULES)
    assert not check_missing_label([_label("img", "")], RULES)  # explicit decorative
    assert check_missing_label([_label("input", None)], RULES)
    assert check_missing_label([_label("button", None)], RULES)
    assert not check_missing_label([_label("a", None)], RULES)


def _heading(level, n=1):
    return PropertyRecord(
        group=PropertyGroup.TEXT,
        xpath=f"/html[1]/body[1]/h{level}[{n}]",
        outer_html=f"<h{level}>",
        values={"font_size_px": 20.0, "heading_level": level, "tag": f"h{level}"},
        confidence=Confidence.MEASURED,
    )


def _text(size=16.0):
    return PropertyRecord(
        group=PropertyGroup.TEXT,
        xpath="/html[1]/body[1]/p[1]",
        outer_html="<p>",
        values={"font_size_px": size, "heading_level": None, "tag": "p"},
        confidence=Confidence.MEASURED,
    )


def test_heading_order_flags_jump():
    violations = check_heading_order([_heading(1), _heading(3)], RULES)
    assert len(violations) == 1
    assert violations[0].evidence == {"previous_level": 1, "level": 3}


def test_heading_order_allows_steps_and_climbs():
    assert not check_heading_order([_heading(1), _heading(2), _heading(3)], RULES)
    assert not check_heading_order([_heading(3), _heading(1)], RULES)  # going up is fine
    assert not check_heading_order([_heading(2)], RULES)  # no previous, no jump
    # non-heading text between headings is ignored
    assert not check_heading_order([_heading(1), _text(), _heading(2)], RULES)


def _spacing(left, right):
    return PropertyRecord(
        group=PropertyGroup.SPACING,
        xpath="/html[1]/body[1]/div[1]",
        outer_html="<div>",
        values={"padding": (0.0, right, 0.0, left), "margin": (0.0, 0.0, 0.0, 0.0)},
        confidence=Confidence.MEASURED,
    )


def test_spacing_symmetry_tolerance_boundary():
    assert not check_spacing_symmetry([_spacing(16.0, 15.0)], RULES)  # within 2px
    assert not check_spacing_symmetry([_spacing(16.0, 14.0)], RULES)  # exactly 2px
    assert check_spacing_symmetry([_spacing(16.0, 13.0)], RULES)  # 3px over


def test_thresholds_overridable():
    strict = Thresholds.from_overrides({"spacing_tolerance_px": 0.5})
    assert check_spacing_symmetry([_spacing(16.0, 15.0)], RULES, strict)
    with pytest.raises(Exception):
        Thresholds.from_overrides({"bogus": 1})


def test_run_checkers_deterministic_and_sorted():
    source = (
        "<html><body><h1>T</h1>"
        '<p style="color:#cccccc">dim</p>'
        '<button style="width:30px;height:48px">Settings</button>'
        "</body></html>"
    )
    snap = parse_static(source)
    components = map_components(extract_components(source), KB)
    bundle = ExtractionBundle(components=components, property_groups=extract_properties(snap))
    first = run_checkers(bundle, snap, RULES)
    second = run_checkers(bundle, snap, RULES)
    assert first == second
    keys = [(v.xpath, v.rule) for v in first]
    assert keys == sorted(keys)
    assert {v.rule for v in first} == {"contrast", "label-overflow", "target-size"}


def test_all_groups_present_even_when_empty():
    snap = parse_static("<html><body><p>x</p></body></html>")
    bundle = ExtractionBundle(components=[], property_groups=extract_properties(snap))
    assert set(bundle.property_groups) == set(ALL_GROUPS)
    run_checkers(bundle, snap, RULES)  # must not raise on empty groups
