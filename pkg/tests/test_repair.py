from __future__ import annotations

import json

import pytest

from designlint.checkers import Violation, load_rule_table
from designlint.extraction import (
    Confidence,
    ExtractionBundle,
    KnowledgeBundle,
    PropertyRecord,
    extract_components,
    extract_properties,
    map_components,
    retrieve_knowledge,
)
from designlint.kb import ALL_GROUPS, ConstraintKind, PropertyGroup, default_bundle_path, load_kb
from designlint.llm import (
    LlmClient,
    MockLlmClient,
    PromptTooLarge,
    ReplayLlmClient,
    add_attribute,
    prompt_key,
    retag,
    set_style_prop,
)
from designlint.repair import (
    ApplyError,
    Origin,
    RepairSuggestion,
    RepairUnit,
    build_individual_prompt,
    individual_repair,
    locate_excerpt,
    overall_repair,
)
from designlint.staticdom import parse_static

KB = load_kb(default_bundle_path())
RULES = load_rule_table(default_bundle_path(), KB)


class ScriptedClient(LlmClient):
    def __init__(self, completions, default="[]"):
        self.completions = list(completions)
        self.default = default
        self.prompts: list[str] = []

    def send(self, prompt: str) -> str:
        self.prompts.append(prompt)
        if not self.completions:
            return self.default
        return self.completions.pop(0)


def _splice_oracle(source: str, replacements: list[tuple[int, int, str]]) -> str:
    """Independent string surgery: rebuild from untouched segments."""
    out = []
    cursor = 0
    for start, end, fix in sorted(replacements):
        out.append(source[cursor:start])
        out.append(fix)
        cursor = end
    out.append(source[cursor:])
    return "".join(out)


def _suggestion(span, bad, fix, kind=ConstraintKind.HARD, origin=Origin.PROPERTY, sid=None):
    return RepairSuggestion(
        id=sid or f"s-{span[0]}-{span[1]}",
        bad_design_code=bad,
        detailed_reference_guidelines=("SYS-color-contrast-minimum: keep text readable",),
        suggestion_fix_code=fix,
        origin=origin,
        constraint_kind=kind,
        target_span=span,
        unit="Color",
        guideline_ids=("SYS-color-contrast-minimum",),
    )


# --- prompt building --------------------------------------------------------

def test_prompt_contains_verbatim_framings():
    entries = KB.entries
    knowledge = [entries["SYS-color-contrast-minimum"], entries["SYS-color-roles"]]
    prompt = build_individual_prompt(
        "<html><body><p>x</p></body></html>",
        RepairUnit(Origin.PROPERTY, "Color"),
        knowledge,
    )
    assert (
        "Once you find a bad design not following the guideline, you must fix it."
        in prompt
    )
    assert "Remember this is not mandatory, regarded as optional." in prompt
    assert "SYS-color-contrast-minimum" in prompt
    assert "SYS-color-roles" in prompt
    assert '"bad_design_code", "detailed_reference_guidelines", "suggestion_fix_code"' in prompt


def test_prompt_empty_knowledge_reads_none():
    prompt = build_individual_prompt(
        "<html><body><p>x</p></body></html>", RepairUnit(Origin.COMPONENT, "card"), []
    )
    hard_section = prompt.split("### HARD CONSTRAINTS")[1].split("### END")[0]
    soft_section = prompt.split("### SOFT CONSTRAINTS")[1].split("### END")[0]
    assert "none" in hard_section
    assert "none" in soft_section


def test_prompt_too_large():
    with pytest.raises(PromptTooLarge):
        build_individual_prompt(
            "x" * 5000, RepairUnit(Origin.COMPONENT, "button"), [], client_max=1000
        )


# --- locating excerpts -------------------------------------------------------

def test_locate_excerpt_exact_and_normalized():
    source = "<div>\n  <p>hello   world</p>\n</div>"
    assert locate_excerpt(source, "<p>hello   world</p>") == (8, 28)
    span = locate_excerpt(source, "<p>hello world</p>")
    assert span is not None
    assert source[span[0] : span[1]] == "<p>hello   world</p>"
    assert locate_excerpt(source, "<p>goodbye</p>") is None


# --- individual repair --------------------------------------------------------

def _color_fixture():
    source = '<html><body><p style="color:#cccccc">dim text</p></body></html>'
    snap = parse_static(source)
    components = map_components(extract_components(source), KB)
    bundle = ExtractionBundle(components=components, property_groups=extract_properties(snap))
    knowledge = retrieve_knowledge(bundle, KB)
    from designlint.checkers import run_checkers

    violations = run_checkers(bundle, snap, RULES)
    assert [v.rule for v in violations] == ["contrast"]
    return source, bundle, knowledge, violations


def test_individual_repair_with_mock_produces_c3_suggestion():
    source, bundle, knowledge, violations = _color_fixture()
    suggestions = individual_repair(
        source, bundle, knowledge, violations, MockLlmClient(), rules=RULES
    )
    assert len(suggestions) == 1
    suggestion = suggestions[0]
    assert suggestion.origin is Origin.PROPERTY
    assert suggestion.constraint_kind is ConstraintKind.HARD
    assert suggestion.bad_design_code == source[slice(*suggestion.target_span)]
    assert "SYS-color-contrast-minimum" in suggestion.guideline_ids
    assert "color: #000000" in suggestion.suggestion_fix_code


def test_individual_repair_non_json_twice_skips_unit():
    source, bundle, knowledge, violations = _color_fixture()
    warnings: list[str] = []
    client = ScriptedClient([], default="not json at all")  # always non-JSON
    suggestions = individual_repair(
        source, bundle, knowledge, violations, client, rules=RULES, warnings=warnings
    )
    assert suggestions == []
    assert any("skipped after 2 retries" in w for w in warnings)
    # every unit gets one initial try plus two retries
    color_prompts = [p for p in client.prompts if '"name": "Color"' in p]
    assert len(color_prompts) == 3


def test_individual_repair_drops_unlocatable_bad_code():
    source, bundle, knowledge, violations = _color_fixture()
    canned = json.dumps(
        [
            {
                "bad_design_code": "<p>never appears</p>",
                "detailed_reference_guidelines": ["SYS-color-contrast-minimum: x"],
                "suggestion_fix_code": "<p>still never</p>",
            }
        ]
    )
    warnings: list[str] = []
    suggestions = individual_repair(
        source, bundle, knowledge, violations,
        ScriptedClient([canned] * 8), rules=RULES, warnings=warnings,
    )
    assert suggestions == []
    assert any("does not occur in the source" in w for w in warnings)


def test_individual_repair_drops_unknown_guideline_refs():
    source, bundle, knowledge, violations = _color_fixture()
    bad_code = source[13:46]
    canned = json.dumps(
        [
            {
                "bad_design_code": bad_code,
                "detailed_reference_guidelines": ["SYS-made-up: x"],
                "suggestion_fix_code": bad_code,
            }
        ]
    )
    warnings: list[str] = []
    suggestions = individual_repair(
        source, bundle, knowledge, violations,
        ScriptedClient([canned] * 8), rules=RULES, warnings=warnings,
    )
    assert suggestions == []
    assert any("no known guideline" in w for w in warnings)


def test_individual_repair_deduplicates_by_span_and_guidelines():
    source, bundle, knowledge, violations = _color_fixture()
    suggestions = individual_repair(
        source, bundle, knowledge, violations, MockLlmClient(), rules=RULES,
        max_workers=4,
    )
    spans = [s.target_span for s in suggestions]
    assert spans == sorted(spans)
    assert len({(s.target_span, s.guideline_ids) for s in suggestions}) == len(suggestions)


# --- overall repair ------------------------------------------------------------

def test_overall_disjoint_suggestions_match_splice_oracle():
    source = "<html><body><p>AA</p><p>BB</p><p>CC</p></body></html>"
    s1 = _suggestion((12, 21), "<p>AA</p>", '<p style="color:#000">AA</p>')
    s2 = _suggestion((30, 39), "<p>CC</p>", '<p style="color:#000">CC</p>')
    page = overall_repair(source, [s1, s2], MockLlmClient(), revalidate=lambda s: [])
    expected = _splice_oracle(
        source,
        [(12, 21, s1.suggestion_fix_code), (30, 39, s2.suggestion_fix_code)],
    )
    assert page.source == expected
    assert set(page.applied) == {s1.id, s2.id}
    assert page.skipped == ()


def test_overall_no_bytes_change_outside_spans():
    source = "<html><body><p>AA</p><p>BB</p></body></html>"
    s1 = _suggestion((12, 21), "<p>AA</p>", "<p>AA!</p>")
    page = overall_repair(source, [s1], MockLlmClient(), revalidate=lambda s: [])
    assert page.source[:12] == source[:12]
    assert page.source[12 + len("<p>AA!</p>"):] == source[21:]


def test_overall_empty_suggestions_is_identity():
    source = "<html><body><p>x</p></body></html>"
    sentinel = [
        Violation(
            rule="contrast", guideline_id="SYS-color-contrast-minimum",
            constraint_kind=ConstraintKind.HARD, xpath="/x", source_span=None,
            evidence={}, message="m", confidence=Confidence.MEASURED,
        )
    ]
    page = overall_repair(source, [], MockLlmClient(), revalidate=lambda s: sentinel)
    assert page.source == source
    assert page.applied == ()
    assert page.residual_violations == tuple(sentinel)


def test_overall_hard_beats_soft_on_same_span():
    source = "<html><body><p>AA</p></body></html>"
    hard = _suggestion((12, 21), "<p>AA</p>", "<p>HARD</p>", ConstraintKind.HARD, sid="s-hard")
    soft = _suggestion((12, 21), "<p>AA</p>", "<p>SOFT</p>", ConstraintKind.SOFT, sid="s-soft")
    page = overall_repair(source, [soft, hard], MockLlmClient(), revalidate=lambda s: [])
    assert "HARD" in page.source and "SOFT" not in page.source
    assert page.applied == ("s-hard",)
    assert page.skipped[0].id == "s-soft"
    assert page.skipped[0].reason == "conflict"


def test_overall_property_beats_component_within_same_kind():
    source = "<html><body><p>AA</p></body></html>"
    comp = _suggestion((12, 21), "<p>AA</p>", "<p>AA</p>", origin=Origin.COMPONENT, sid="s-comp")
    prop = _suggestion((12, 21), "<p>AA</p>", "<p>AA</p>", origin=Origin.PROPERTY, sid="s-prop")
    # identical fixes, so no LLM merge; priority picks the property one
    page = overall_repair(source, [comp, prop], MockLlmClient(), revalidate=lambda s: [])
    assert page.applied == ("s-prop",)


def test_overall_two_hard_distinct_fixes_use_merge_prompt():
    source = "<html><body><p>AA</p></body></html>"
    a = _suggestion((12, 21), "<p>AA</p>", "<p>ONE</p>", sid="s-one")
    b = _suggestion((12, 18), "<p>AA<", "<p>TWO<", sid="s-two")

    class RecordingMock(MockLlmClient):
        def __init__(self):
            self.merge_prompts = 0

        def send(self, prompt):
            if "merge-region" in prompt:
                self.merge_prompts += 1
            return super().send(prompt)

    client = RecordingMock()
    page = overall_repair(source, [a, b], client, revalidate=lambda s: [])
    assert client.merge_prompts == 1
    # mock answers with the highest-priority candidate: larger span wins
    assert "ONE" in page.source
    assert page.applied == ("s-one",)
    assert [s.id for s in page.skipped] == ["s-two"]


def test_overall_apply_error_on_bogus_span():
    source = "<html><body><p>AA</p></body></html>"
    wrong = _suggestion((12, 21), "<p>ZZ</p>", "<p>!!</p>")
    with pytest.raises(ApplyError):
        overall_repair(source, [wrong], MockLlmClient(), revalidate=lambda s: [])
    out_of_range = _suggestion((10_000, 10_009), "<p>AA</p>", "x")
    with pytest.raises(ApplyError):
        overall_repair(source, [out_of_range], MockLlmClient(), revalidate=lambda s: [])


# --- shipped clients ------------------------------------------------------------

def test_mock_markup_helpers():
    assert set_style_prop("<p>x</p>", "color", "#000") == '<p style="color: #000">x</p>'
    assert (
        set_style_prop('<p style="color:#fff;margin:0">x</p>', "color", "#000")
        == '<p style="margin:0; color: #000">x</p>'
    )
    assert add_attribute('<img src="a.png">', "alt", "photo") == '<img src="a.png" alt="photo">'
    assert add_attribute("<img/>", "alt", "p") == '<img alt="p"/>'
    assert retag("<h3>Title</h3>", "h3", "h2") == "<h2>Title</h2>"


def test_mock_is_deterministic():
    source, bundle, knowledge, violations = _color_fixture()
    first = individual_repair(source, bundle, knowledge, violations, MockLlmClient(), rules=RULES)
    second = individual_repair(source, bundle, knowledge, violations, MockLlmClient(), rules=RULES)
    assert first == second


def test_replay_client_round_trip(tmp_path):
    cache = tmp_path / "cache.json"
    cache.write_text(json.dumps({prompt_key("hello"): "world"}))
    client = ReplayLlmClient(cache)
    assert client.send("hello") == "world"
    from designlint.llm import LlmProtocolError

    with pytest.raises(LlmProtocolError):
        client.send("unknown prompt")


def test_knowledge_bundle_partition_filters():
    bundle = ExtractionBundle(components=[], property_groups={g: [] for g in ALL_GROUPS})
    knowledge = retrieve_knowledge(bundle, KB)
    assert knowledge.all_entries() == {}
