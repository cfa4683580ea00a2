from __future__ import annotations

import json
import subprocess
import sys
from pathlib import Path

import pytest

from designlint.cli import main

CORPUS = Path(__file__).parent / "fixtures" / "corpus"
CLEAN_PAGE = CORPUS / "pages" / "fixture-01-clean-landing.html"
DIRTY_PAGE = CORPUS / "pages" / "fixture-02-contrast-paragraph.html"


def test_cli_help_via_subprocess():
    proc = subprocess.run(
        [sys.executable, "-m", "designlint.cli", "--help"],
        capture_output=True, text=True,
    )
    assert proc.returncode == 0
    for sub in ("lint", "repair", "eval", "kb-validate"):
        assert sub in proc.stdout


def test_kb_validate_shipped_bundle(capsys):
    assert main(["kb-validate"]) == 0
    out = capsys.readouterr().out
    assert "OK" in out


def test_kb_validate_bad_bundle(tmp_path, capsys):
    (tmp_path / "entries.jsonl").write_text("")
    assert main(["kb-validate", "--kb", str(tmp_path)]) == 1


def test_lint_clean_page_exit_zero(tmp_path):
    out = tmp_path / "out"
    assert main(["lint", str(CLEAN_PAGE), "--out", str(out)]) == 0
    report = json.loads((out / "report.json").read_text())
    assert report["summary"]["hard_violations"] == 0
    assert report["pages"][0]["violations"] == []
    assert (out / "report.md").exists()


def test_lint_dirty_page_exit_one(tmp_path):
    out = tmp_path / "out"
    assert main(["lint", str(DIRTY_PAGE), "--out", str(out)]) == 1
    report = json.loads((out / "report.json").read_text())
    rules = [v["rule"] for v in report["pages"][0]["violations"]]
    assert "contrast" in rules


def test_lint_directory_aggregates(tmp_path):
    out = tmp_path / "out"
    assert main(["lint", str(CORPUS / "pages"), "--out", str(out)]) == 1
    report = json.loads((out / "report.json").read_text())
    assert report["summary"]["pages"] >= 20
    names = [p["source"] for p in report["pages"]]
    assert names == sorted(names)


def test_lint_missing_input_exit_two(tmp_path):
    assert main(["lint", str(tmp_path / "nope.html"), "--out", str(tmp_path)]) == 2


def test_lint_missing_snapshot_exit_two(tmp_path):
    code = main([
        "lint", str(CLEAN_PAGE),
        "--snapshot", str(tmp_path / "missing.snapshot.json"),
        "--out", str(tmp_path / "out"),
    ])
    assert code == 2


def test_repair_dirty_page_exit_zero_and_outputs(tmp_path):
    out = tmp_path / "out"
    assert main(["repair", str(DIRTY_PAGE), "--out", str(out)]) == 0
    repaired = (out / "repaired.html").read_text()
    assert repaired != DIRTY_PAGE.read_text()
    suggestions = json.loads((out / "suggestions.json").read_text())
    assert suggestions, "seeded page must yield suggestions"
    for entry in suggestions:
        assert set(entry) >= {
            "bad_design_code", "detailed_reference_guidelines", "suggestion_fix_code",
        }
    residuals = json.loads((out / "residuals.json").read_text())
    assert [v for v in residuals if v["constraint_kind"] == "hard"] == []


def test_repair_clean_page_is_identity(tmp_path):
    out = tmp_path / "out"
    assert main(["repair", str(CLEAN_PAGE), "--out", str(out)]) == 0
    assert (out / "repaired.html").read_text() == CLEAN_PAGE.read_text()
    assert json.loads((out / "suggestions.json").read_text()) == []


def test_repair_live_without_token_exit_two(tmp_path, monkeypatch):
    monkeypatch.delenv("DESIGNLINT_API_TOKEN", raising=False)
    code = main([
        "repair", str(DIRTY_PAGE), "--llm", "live",
        "--endpoint", "https://example.invalid/v1", "--model", "m",
        "--out", str(tmp_path / "out"),
    ])
    assert code == 2


def test_repair_replay_without_cache_exit_two(tmp_path):
    code = main([
        "repair", str(DIRTY_PAGE), "--llm", "replay", "--out", str(tmp_path / "out"),
    ])
    assert code == 2


def test_repair_runs_are_byte_identical(tmp_path):
    out1, out2 = tmp_path / "a", tmp_path / "b"
    assert main(["repair", str(DIRTY_PAGE), "--out", str(out1)]) == 0
    assert main(["repair", str(DIRTY_PAGE), "--out", str(out2)]) == 0
    for name in ("repaired.html", "suggestions.json", "residuals.json"):
        assert (out1 / name).read_bytes() == (out2 / name).read_bytes()


def test_eval_detect_writes_report(tmp_path):
    out = tmp_path / "out"
    assert main(["eval", str(CORPUS), "--mode", "detect", "--out", str(out)]) == 0
    payload = json.loads((out / "eval.json").read_text())
    assert payload["mode"] == "detect"
    assert payload["precision"] is not None
    assert payload["recall"] is not None


def test_eval_empty_corpus_exit_two(tmp_path):
    (tmp_path / "pages").mkdir()
    (tmp_path / "labels.jsonl").write_text("")
    assert main(["eval", str(tmp_path), "--out", str(tmp_path / "out")]) == 2


def test_eval_component_only_scopes(tmp_path):
    out = tmp_path / "out"
    assert main([
        "eval", str(CORPUS), "--mode", "repair-component-only", "--out", str(out),
    ]) == 0
    payload = json.loads((out / "eval.json").read_text())
    labels = [
        json.loads(line)
        for line in (CORPUS / "labels.jsonl").read_text().splitlines()
    ]
    component_labels = [l for l in labels if l["origin"] == "component"]
    assert payload["tp"] + payload["fn"] == len(component_labels)


def test_thresholds_override_via_file(tmp_path):
    config = tmp_path / "thresholds.json"
    config.write_text(json.dumps({"contrast_normal": 30.0}))  # impossible bar
    out = tmp_path / "out"
    assert main([
        "lint", str(CLEAN_PAGE), "--thresholds", str(config), "--out", str(out),
    ]) == 1  # even the clean page fails a 30:1 requirement
    report = json.loads((out / "report.json").read_text())
    assert all(
        v["rule"] == "contrast" for v in report["pages"][0]["violations"]
    )
