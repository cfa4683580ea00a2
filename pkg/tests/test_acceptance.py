"""Acceptance suite: one test per release criterion.

Each test prints a PASS line once its criterion holds; run with

    pytest tests/test_acceptance.py -v -s

The whole suite is hermetic: static parser, mock LLM, no network, no
browser.
"""

from __future__ import annotations

import json
import random
import time
from pathlib import Path

import pytest

from designlint.checkers import check_contrast, load_rule_table
from designlint.cli import main
from designlint.color import contrast_ratio
from designlint.extraction import ComponentInstance, extract_components, map_components
from designlint.kb import default_bundle_path, load_kb
from designlint.pipeline import PipelineConfig

CORPUS = Path(__file__).parent / "fixtures" / "corpus"
PAGES = sorted((CORPUS / "pages").glob("*.html"))


def _pass(line: str) -> None:
    print(f"ACCEPTANCE PASS: {line}")


# --- independent WCAG oracle (brute force, straight from the formulas) ------

def _oracle_lin(c: float) -> float:
    return c / 12.92 if c <= 0.04045 else ((c + 0.055) / 1.055) ** 2.4


def _oracle_ratio(fg, bg) -> float:
    def lum(rgb):
        return 0.2126 * _oracle_lin(rgb[0]) + 0.7152 * _oracle_lin(rgb[1]) + 0.0722 * _oracle_lin(rgb[2])

    lf, lb = lum(fg), lum(bg)
    hi, lo = max(lf, lb), min(lf, lb)
    return (hi + 0.05) / (lo + 0.05)


def test_kb_integrity():
    started = time.perf_counter()

    assert main(["kb-validate"]) == 0

    bundle = default_bundle_path()
    raw_entries = [
        json.loads(line)
        for line in (bundle / "entries.jsonl").read_text(encoding="utf-8").splitlines()
        if line.strip()
    ]
    independent = {"component": {"hard": 0, "soft": 0}, "system": {"hard": 0, "soft": 0}}
    for record in raw_entries:
        independent[record["tier"]][record["constraint_kind"]] += 1
    kb = load_kb(bundle)
    assert kb.manifest["counts"] == independent

    entry_ids = {r["id"] for r in raw_entries}
    raw_triples = [
        json.loads(line)
        for line in (bundle / "triples.jsonl").read_text(encoding="utf-8").splitlines()
        if line.strip()
    ]
    assert raw_triples, "bundle must ship triples"
    unresolved = [
        gid for t in raw_triples for gid in t["guideline_ids"] if gid not in entry_ids
    ]
    assert unresolved == [], f"triples must resolve 100%: {unresolved}"

    elapsed = time.perf_counter() - started
    assert elapsed < 1.0, f"KB integrity took {elapsed:.2f}s, limit 1s"
    _pass(f"KB integrity (counts match independent scan, {len(raw_triples)} triples resolve, {elapsed:.2f}s)")


def test_contrast_oracle_equivalence():
    started = time.perf_counter()

    rng = random.Random(42)
    worst = 0.0
    for _ in range(1000):
        fg = (rng.random(), rng.random(), rng.random(), 1.0)
        bg = (rng.random(), rng.random(), rng.random(), 1.0)
        diff = abs(contrast_ratio(fg, bg) - _oracle_ratio(fg, bg))
        worst = max(worst, diff)
    assert worst < 1e-6, f"checker diverges from oracle by {worst}"

    # grays engineered to straddle 4.5 by ±0.01 against white
    white = (1.0, 1.0, 1.0, 1.0)
    kb = load_kb(default_bundle_path())
    rules = load_rule_table(default_bundle_path(), kb)
    just_under = 0.465933075900635      # oracle ratio 4.49
    just_over = 0.46470673164250914     # oracle ratio 4.51
    from designlint.extraction import Confidence, PropertyRecord
    from designlint.kb import PropertyGroup

    def record(gray):
        color = (gray, gray, gray, 1.0)
        return PropertyRecord(
            group=PropertyGroup.COLOR, xpath="/p[1]", outer_html="<p>",
            values={
                "fg": color, "bg": white,
                "contrast_ratio": contrast_ratio(color, white),
                "font_size_px": 16.0,
            },
            confidence=Confidence.MEASURED,
        )

    assert len(check_contrast([record(just_under)], rules)) == 1
    assert len(check_contrast([record(just_over)], rules)) == 0

    elapsed = time.perf_counter() - started
    assert elapsed < 1.0, f"contrast equivalence took {elapsed:.2f}s, limit 1s"
    _pass(f"contrast oracle equivalence (1000 pairs within 1e-6, 4.5 boundary classified, {elapsed:.2f}s)")


def test_extraction_soundness():
    started = time.perf_counter()

    assert len(PAGES) >= 20, "corpus must hold at least 20 pages"
    kb = load_kb(default_bundle_path())
    checked = 0
    for page in PAGES:
        source = page.read_text(encoding="utf-8")
        for instance in extract_components(source):
            begin, end = instance.source_span
            assert source[begin:end] == instance.raw_name, (
                f"{page.name}: {instance.raw_name!r} not at its span"
            )
            checked += 1
    assert checked > 0

    mapped = map_components(
        [
            ComponentInstance("Navbars", (0, 7), "Navbars"),
            ComponentInstance("Navigation Menu", (0, 15), "Navigation Menu"),
        ],
        kb,
    )
    assert [i.canonical_type for i in mapped] == ["navigation bar", "navigation bar"]

    custom_page = (CORPUS / "pages" / "fixture-13-custom-buttons.html").read_text()
    custom = map_components(extract_components(custom_page), kb)
    by_name = {i.raw_name: i.canonical_type for i in custom}
    assert by_name.get("likebutton") == "button"
    assert by_name.get("sharebutton") == "button"

    elapsed = time.perf_counter() - started
    assert elapsed < 5.0, f"extraction soundness took {elapsed:.2f}s, limit 5s"
    _pass(f"extraction soundness ({checked} raw names verified on {len(PAGES)} pages, aliases resolve, {elapsed:.2f}s)")


def test_detection_analogue(tmp_path):
    started = time.perf_counter()

    out = tmp_path / "eval"
    assert main(["eval", str(CORPUS), "--mode", "detect", "--out", str(out)]) == 0
    payload = json.loads((out / "eval.json").read_text())
    labels = (CORPUS / "labels.jsonl").read_text().splitlines()
    assert len([l for l in labels if l.strip()]) >= 40, "need 40+ seeded hard violations"
    assert payload["recall"] >= 0.90, f"recall {payload['recall']} below 0.90"
    assert payload["precision"] >= 0.85, f"precision {payload['precision']} below 0.85"

    elapsed = time.perf_counter() - started
    assert elapsed < 10.0, f"detection eval took {elapsed:.2f}s, limit 10s"
    _pass(
        f"detection analogue (recall {payload['recall']:.3f} >= 0.90, "
        f"precision {payload['precision']:.3f} >= 0.85, {elapsed:.2f}s)"
    )


def _splice_oracle(source: str, replacements) -> str:
    out, cursor = [], 0
    for start, end, fix in sorted(replacements):
        out.append(source[cursor:start])
        out.append(fix)
        cursor = end
    out.append(source[cursor:])
    return "".join(out)


def test_repair_convergence(tmp_path):
    started = time.perf_counter()

    out = tmp_path / "repair"
    main(["repair", str(CORPUS / "pages"), "--out", str(out)])

    converged = 0
    for page in PAGES:
        fixture_out = out / page.stem
        residuals = json.loads((fixture_out / "residuals.json").read_text())
        hard = [v for v in residuals if v["constraint_kind"] == "hard"]
        if not hard:
            converged += 1

        source = page.read_text(encoding="utf-8")
        repaired = (fixture_out / "repaired.html").read_text(encoding="utf-8")
        suggestions = json.loads((fixture_out / "suggestions.json").read_text())
        applied = [s for s in suggestions if s["applied"]]
        expected = _splice_oracle(
            source,
            [(s["target_span"][0], s["target_span"][1], s["suggestion_fix_code"]) for s in applied],
        )
        assert repaired == expected, (
            f"{page.name}: repaired bytes differ outside applied spans"
        )

    rate = converged / len(PAGES)
    assert rate >= 0.90, f"only {converged}/{len(PAGES)} fixtures converged"

    elapsed = time.perf_counter() - started
    assert elapsed < 10.0, f"repair convergence took {elapsed:.2f}s, limit 10s"
    _pass(
        f"repair convergence ({converged}/{len(PAGES)} fixtures with zero hard residuals, "
        f"splice-exact diffs, {elapsed:.2f}s)"
    )


def test_ablation_protocol(tmp_path):
    from designlint.evaluation import EvalMode, run_ablation

    config = PipelineConfig.load()
    comp = run_ablation(EvalMode.REPAIR_COMPONENT_ONLY, CORPUS, config)
    prop = run_ablation(EvalMode.REPAIR_PROPERTY_ONLY, CORPUS, config)
    full = run_ablation(EvalMode.REPAIR_ALL, CORPUS, config)

    labels = [json.loads(l) for l in (CORPUS / "labels.jsonl").read_text().splitlines() if l.strip()]
    component_labels = sum(1 for l in labels if l["origin"] == "component")
    property_labels = len(labels) - component_labels
    assert comp.tp + comp.fn == component_labels, "component run must score only its subset"
    assert prop.tp + prop.fn == property_labels, "property run must score only its subset"
    assert comp.tp + prop.tp >= full.tp

    _pass(
        f"ablation protocol (component tp {comp.tp} + property tp {prop.tp} "
        f">= repair-all tp {full.tp}; subsets scoped)"
    )


def test_mock_mode_determinism(tmp_path):
    first, second = tmp_path / "run1", tmp_path / "run2"
    page = CORPUS / "pages" / "fixture-24-kitchen-sink.html"
    main(["repair", str(page), "--out", str(first)])
    main(["repair", str(page), "--out", str(second)])
    for name in ("repaired.html", "suggestions.json", "residuals.json"):
        assert (first / name).read_bytes() == (second / name).read_bytes(), (
            f"{name} differs between identical runs"
        )
    _pass("determinism (two mock repair runs byte-identical: repaired.html, suggestions.json, residuals.json)")
