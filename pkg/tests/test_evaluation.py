from __future__ import annotations

import json
import random
from pathlib import Path

import pytest

from designlint.evaluation import (
    EmptySubsetWarning,
    EvalMode,
    EvalReport,
    GroundTruthError,
    GroundTruthLabel,
    Prediction,
    load_labels,
    match_predictions,
    run_ablation,
)
from designlint.kb import ConstraintKind
from designlint.pipeline import PipelineConfig
from designlint.repair import Origin

CORPUS = Path(__file__).parent / "fixtures" / "corpus"


def _label(gid="SYS-color-contrast-minimum", xpath=None, span=None,
           origin=Origin.PROPERTY, kind=ConstraintKind.HARD, fixture="f"):
    return GroundTruthLabel(
        fixture=fixture, guideline_id=gid, constraint_kind=kind,
        origin=origin, xpath=xpath, span=span,
    )


def _prediction(gid="SYS-color-contrast-minimum", xpath=None, span=None):
    return Prediction(guideline_ids=(gid,), xpath=xpath, span=span)


def test_counts_forced_by_definition():
    truth = [_label(xpath=f"/p[{i}]") for i in range(10)]
    predictions = [_prediction(xpath=f"/p[{i}]") for i in range(8)]
    counts = match_predictions(predictions, truth)
    assert (counts.tp, counts.fp, counts.fn) == (8, 0, 2)


def test_zero_predictions():
    truth = [_label(xpath="/p[1]"), _label(xpath="/p[2]")]
    counts = match_predictions([], truth)
    assert (counts.tp, counts.fp, counts.fn) == (0, 0, 2)


def test_right_guideline_disjoint_span_is_fp_and_fn():
    truth = [_label(span=(0, 10))]
    predictions = [_prediction(span=(50, 60))]
    counts = match_predictions(predictions, truth)
    assert (counts.tp, counts.fp, counts.fn) == (0, 1, 1)


def test_wrong_guideline_never_matches():
    truth = [_label(gid="SYS-label-alt-text", xpath="/img[1]")]
    predictions = [_prediction(gid="SYS-color-contrast-minimum", xpath="/img[1]")]
    counts = match_predictions(predictions, truth)
    assert counts.tp == 0


def test_span_overlap_threshold():
    truth = [_label(span=(0, 100))]
    # overlap 50 over shorter span 60: 0.833 >= 0.5 -> match
    assert match_predictions([_prediction(span=(50, 110))], truth).tp == 1
    # overlap 20 over shorter span 80: 0.25 < 0.5 -> no match
    assert match_predictions([_prediction(span=(80, 160))], truth).tp == 0


def test_greedy_matching_is_one_to_one():
    truth = [_label(span=(0, 100))]
    predictions = [_prediction(span=(0, 100)), _prediction(span=(10, 90))]
    counts = match_predictions(predictions, truth)
    assert (counts.tp, counts.fp, counts.fn) == (1, 1, 0)


def test_count_identities_on_random_instances():
    rng = random.Random(7)
    for _ in range(50):
        truth = [_label(span=(i * 10, i * 10 + 8)) for i in range(rng.randint(0, 6))]
        predictions = [
            _prediction(span=(rng.randrange(0, 70), rng.randrange(71, 120)))
            for _ in range(rng.randint(0, 6))
        ]
        counts = match_predictions(predictions, truth)
        assert counts.tp + counts.fn == len(truth)
        assert counts.tp + counts.fp == len(predictions)


def test_report_metrics_undefined_marking():
    report = EvalReport(mode=EvalMode.DETECT, tp=0, fp=0, fn=0, per_fixture=())
    assert report.precision is None
    assert report.recall is None
    assert json.loads(json.dumps(report.to_dict()))["precision"] is None
    report2 = EvalReport(mode=EvalMode.DETECT, tp=8, fp=0, fn=2, per_fixture=())
    assert report2.precision == pytest.approx(1.0)
    assert report2.recall == pytest.approx(0.8)


def test_load_labels_rejects_missing_locus(tmp_path):
    bad = tmp_path / "labels.jsonl"
    bad.write_text(json.dumps({
        "fixture": "f", "guideline_id": "SYS-x",
        "constraint_kind": "hard", "origin": "property",
    }) + "\n")
    with pytest.raises(GroundTruthError):
        load_labels(bad)


@pytest.fixture(scope="module")
def config():
    return PipelineConfig.load()


def test_detect_mode_on_corpus(config):
    report = run_ablation(EvalMode.DETECT, CORPUS, config)
    assert report.recall is not None and report.recall >= 0.90
    assert report.precision is not None and report.precision >= 0.85


def test_component_only_scopes_labels(config):
    report = run_ablation(EvalMode.REPAIR_COMPONENT_ONLY, CORPUS, config)
    labels = load_labels(CORPUS / "labels.jsonl")
    component_labels = [l for l in labels if l.origin is Origin.COMPONENT]
    assert report.tp + report.fn == len(component_labels)


def test_soft_only_warns_on_empty_subset(config):
    with pytest.warns(EmptySubsetWarning):
        report = run_ablation(EvalMode.REPAIR_SOFT_ONLY, CORPUS, config)
    assert report.tp == 0 and report.fn == 0
    assert report.recall is None


def test_ablation_parts_cover_the_whole(config):
    comp = run_ablation(EvalMode.REPAIR_COMPONENT_ONLY, CORPUS, config)
    prop = run_ablation(EvalMode.REPAIR_PROPERTY_ONLY, CORPUS, config)
    full = run_ablation(EvalMode.REPAIR_ALL, CORPUS, config)
    assert comp.tp + prop.tp >= full.tp


def test_missing_ground_truth_raises(tmp_path, config):
    (tmp_path / "pages").mkdir()
    with pytest.raises(GroundTruthError):
        run_ablation(EvalMode.DETECT, tmp_path, config)
