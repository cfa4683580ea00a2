"""End-to-end page analysis and repair used by the CLI and the evaluator."""

from __future__ import annotations

from dataclasses import dataclass, field
from pathlib import Path

from .checkers import (
    DEFAULT_THRESHOLDS,
    RuleBinding,
    Thresholds,
    Violation,
    load_rule_table,
    run_checkers,
)
from .extraction import (
    ExtractionBundle,
    extract_components,
    extract_properties,
    map_components,
    retrieve_knowledge,
)
from .kb import KnowledgeBase, load_kb, default_bundle_path
from .llm import LlmClient, MockLlmClient
from .repair import (
    Origin,
    RepairedPage,
    RepairSuggestion,
    individual_repair,
    overall_repair,
)
from .snapshot import DomSnapshot
from .staticdom import parse_static

DEFAULT_VIEWPORT = (1280, 800)


@dataclass
class PipelineConfig:
    kb: KnowledgeBase
    rules: dict[str, RuleBinding]
    thresholds: Thresholds = DEFAULT_THRESHOLDS
    llm: LlmClient | None = None
    viewports: tuple[tuple[int, int], ...] = (DEFAULT_VIEWPORT,)

    @classmethod
    def load(
        cls,
        kb_path: str | Path | None = None,
        thresholds: Thresholds | None = None,
        llm: LlmClient | None = None,
        viewports: tuple[tuple[int, int], ...] = (DEFAULT_VIEWPORT,),
    ) -> "PipelineConfig":
        bundle = Path(kb_path) if kb_path else default_bundle_path()
        kb = load_kb(bundle)
        rules = load_rule_table(bundle, kb)
        return cls(
            kb=kb,
            rules=rules,
            thresholds=thresholds or DEFAULT_THRESHOLDS,
            llm=llm or MockLlmClient(),
            viewports=viewports,
        )


@dataclass
class PageAnalysis:
    snapshots: list[DomSnapshot]
    bundle: ExtractionBundle
    violations: list[Violation]
    warnings: list[str] = field(default_factory=list)


@dataclass
class PageRepairResult:
    page: RepairedPage
    suggestions: list[RepairSuggestion]
    analysis: PageAnalysis


def analyze_page(
    source: str,
    config: PipelineConfig,
    snapshots: list[DomSnapshot] | None = None,
    source_ref: str = "page",
) -> PageAnalysis:
    """Extract both streams and run the deterministic checkers.

    Without harness snapshots the page is parsed statically once per
    configured viewport (results are Estimated).
    """
    warnings: list[str] = []
    if not snapshots:
        snapshots = [
            parse_static(source, viewport, source_ref=source_ref)
            for viewport in config.viewports
        ]
    components = extract_components(source, config.llm, warnings)
    components = map_components(components, config.kb, config.llm, warnings)
    bundle = ExtractionBundle(
        components=components,
        property_groups=extract_properties(snapshots, warnings),
    )
    violations = run_checkers(bundle, snapshots[0], config.rules, config.thresholds)
    return PageAnalysis(
        snapshots=snapshots, bundle=bundle, violations=violations, warnings=warnings
    )


def repair_page(
    source: str,
    config: PipelineConfig,
    snapshots: list[DomSnapshot] | None = None,
    source_ref: str = "page",
    only_origin: Origin | None = None,
    only_kind=None,
    max_workers: int = 1,
) -> PageRepairResult:
    """Full pipeline: analyze, repair per unit, merge, re-validate."""
    if config.llm is None:
        raise ValueError("repair needs an LLM client (use MockLlmClient for offline runs)")
    analysis = analyze_page(source, config, snapshots, source_ref)
    knowledge = retrieve_knowledge(analysis.bundle, config.kb, analysis.warnings)
    suggestions = individual_repair(
        source,
        analysis.bundle,
        knowledge,
        analysis.violations,
        config.llm,
        rules=config.rules,
        only_origin=only_origin,
        only_kind=only_kind,
        max_workers=max_workers,
        warnings=analysis.warnings,
    )

    def revalidate(new_source: str) -> list[Violation]:
        return analyze_page(new_source, config, source_ref=source_ref).violations

    page = overall_repair(
        source, suggestions, config.llm, revalidate=revalidate, warnings=analysis.warnings
    )
    return PageRepairResult(page=page, suggestions=suggestions, analysis=analysis)
