"""Command-line interface: lint, repair, eval, kb-validate.

Exit codes follow the documented contract: 0 clean (no hard violations /
no hard residuals / success), 1 findings (hard violations or residuals,
or an invalid KB), 2 execution or configuration error. Reports are
stable-ordered and Mock/Replay runs are byte-deterministic.
"""

from __future__ import annotations

import argparse
import json
import logging
import sys
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass
from pathlib import Path

from . import __version__
from .checkers import Thresholds, Violation
from .errors import DesignLintError
from .evaluation import EvalMode, run_ablation
from .kb import ConstraintKind, default_bundle_path, load_kb
from .llm import HttpLlmClient, LlmClient, MockLlmClient, ReplayLlmClient
from .pipeline import DEFAULT_VIEWPORT, PipelineConfig, analyze_page, repair_page
from .repair import RepairSuggestion
from .snapshot import parse_snapshot

TOKEN_ENV = "DESIGNLINT_API_TOKEN"


class ConfigError(DesignLintError):
    pass


@dataclass
class RunConfig:
    inputs: list[Path]
    kb_path: Path
    llm_mode: str
    out_dir: Path
    trace: bool
    snapshots: list[Path]
    viewports: tuple[tuple[int, int], ...]
    thresholds: Thresholds
    replay_cache: Path | None = None
    endpoint: str | None = None
    model: str | None = None

    def make_client(self) -> LlmClient:
        if self.llm_mode == "mock":
            return MockLlmClient()
        if self.llm_mode == "replay":
            if self.replay_cache is None:
                raise ConfigError("replay mode requires --replay-cache")
            return ReplayLlmClient(self.replay_cache)
        if self.llm_mode == "live":
            if not self.endpoint or not self.model:
                raise ConfigError("live mode requires --endpoint and --model")
            return HttpLlmClient(
                self.endpoint,
                self.model,
                token_env=TOKEN_ENV,
                record_path=self.replay_cache,
                trace=self.trace,
            )
        raise ConfigError(f"unknown llm mode {self.llm_mode!r}")


def _parse_viewport(value: str) -> tuple[int, int]:
    try:
        width, height = value.lower().split("x")
        return (int(width), int(height))
    except ValueError:
        raise ConfigError(f"bad viewport {value!r}, expected WIDTHxHEIGHT like 1280x800")


def _round_floats(value, places: int = 4):
    if isinstance(value, float):
        return round(value, places)
    if isinstance(value, (list, tuple)):
        return [_round_floats(v, places) for v in value]
    if isinstance(value, dict):
        return {k: _round_floats(v, places) for k, v in value.items()}
    return value


def violation_dict(violation: Violation) -> dict:
    return {
        "rule": violation.rule,
        "guideline_id": violation.guideline_id,
        "constraint_kind": violation.constraint_kind.value,
        "xpath": violation.xpath,
        "source_span": list(violation.source_span) if violation.source_span else None,
        "evidence": _round_floats(violation.evidence),
        "message": violation.message,
        "confidence": violation.confidence.value,
    }


def suggestion_dict(suggestion: RepairSuggestion, applied_ids: set[str], skip_reasons: dict[str, str]) -> dict:
    return {
        "bad_design_code": suggestion.bad_design_code,
        "detailed_reference_guidelines": list(suggestion.detailed_reference_guidelines),
        "suggestion_fix_code": suggestion.suggestion_fix_code,
        "id": suggestion.id,
        "origin": suggestion.origin.value,
        "constraint_kind": suggestion.constraint_kind.value,
        "target_span": list(suggestion.target_span),
        "unit": suggestion.unit,
        "applied": suggestion.id in applied_ids,
        "skip_reason": skip_reasons.get(suggestion.id),
    }


def _write_json(path: Path, payload) -> None:
    path.parent.mkdir(parents=True, exist_ok=True)
    path.write_text(
        json.dumps(payload, ensure_ascii=False, indent=2, sort_keys=True) + "\n",
        encoding="utf-8",
    )


def _collect_pages(inputs: list[Path]) -> list[Path]:
    pages: list[Path] = []
    for item in inputs:
        if item.is_dir():
            pages.extend(sorted(item.glob("*.html")))
        elif item.is_file():
            pages.append(item)
        else:
            raise ConfigError(f"input not found: {item}")
    if not pages:
        raise ConfigError("no input pages found")
    return pages


def _load_snapshots(paths: list[Path]):
    snapshots = []
    for path in paths:
        if not path.is_file():
            raise ConfigError(f"snapshot not found: {path}")
        snapshots.append(parse_snapshot(path.read_bytes()))
    return snapshots


def _pipeline_config(run: RunConfig) -> PipelineConfig:
    return PipelineConfig.load(
        kb_path=run.kb_path,
        thresholds=run.thresholds,
        llm=run.make_client(),
        viewports=run.viewports,
    )


def _hard_count(violations) -> int:
    return sum(1 for v in violations if v.constraint_kind is ConstraintKind.HARD)


def _report_markdown(pages: list[dict]) -> str:
    lines = ["# designlint report", ""]
    for page in pages:
        lines.append(f"## {page['source']}")
        if not page["violations"]:
            lines.append("")
            lines.append("No violations.")
        else:
            lines.append("")
            lines.append("| rule | guideline | kind | locus | message |")
            lines.append("| --- | --- | --- | --- | --- |")
            for v in page["violations"]:
                locus = v["xpath"] or str(v["source_span"])
                lines.append(
                    f"| {v['rule']} | {v['guideline_id']} | {v['constraint_kind']} "
                    f"| `{locus}` | {v['message']} |"
                )
        if page["warnings"]:
            lines.append("")
            lines.append("Warnings:")
            for w in page["warnings"]:
                lines.append(f"- {w}")
        lines.append("")
    return "\n".join(lines)


def cmd_lint(run: RunConfig) -> int:
    """Analyze page(s) and write report.json / report.md."""
    config = _pipeline_config(run)
    pages = _collect_pages(run.inputs)
    snapshots = _load_snapshots(run.snapshots) if run.snapshots else None

    def analyze(path: Path) -> dict:
        source = path.read_text(encoding="utf-8")
        analysis = analyze_page(source, config, snapshots=snapshots, source_ref=path.name)
        return {
            "source": path.name,
            "violations": [violation_dict(v) for v in analysis.violations],
            "warnings": sorted(analysis.warnings),
        }

    if len(pages) > 1:
        with ThreadPoolExecutor(max_workers=4) as pool:
            results = list(pool.map(analyze, pages))
    else:
        results = [analyze(pages[0])]

    results.sort(key=lambda r: r["source"])
    hard = sum(
        1 for r in results for v in r["violations"] if v["constraint_kind"] == "hard"
    )
    soft = sum(
        1 for r in results for v in r["violations"] if v["constraint_kind"] == "soft"
    )
    report = {
        "tool": {"name": "designlint", "version": __version__},
        "pages": results,
        "summary": {
            "pages": len(results),
            "hard_violations": hard,
            "soft_violations": soft,
        },
    }
    _write_json(run.out_dir / "report.json", report)
    (run.out_dir / "report.md").write_text(_report_markdown(results), encoding="utf-8")
    print(f"linted {len(results)} page(s): {hard} hard, {soft} soft violations")
    return 1 if hard else 0


def cmd_repair(run: RunConfig) -> int:
    """Run the full repair pipeline and write repaired page plus reports."""
    config = _pipeline_config(run)
    pages = _collect_pages(run.inputs)
    snapshots = _load_snapshots(run.snapshots) if run.snapshots else None

    total_hard_residuals = 0
    for path in pages:
        source = path.read_text(encoding="utf-8")
        result = repair_page(source, config, snapshots=snapshots, source_ref=path.name)
        page = result.page
        applied = set(page.applied)
        skip_reasons = {s.id: s.reason for s in page.skipped}

        target = run.out_dir if len(pages) == 1 else run.out_dir / path.stem
        target.mkdir(parents=True, exist_ok=True)
        ext = path.suffix.lstrip(".") or "html"
        (target / f"repaired.{ext}").write_text(page.source, encoding="utf-8")
        _write_json(
            target / "suggestions.json",
            [suggestion_dict(s, applied, skip_reasons) for s in result.suggestions],
        )
        _write_json(
            target / "residuals.json",
            [violation_dict(v) for v in page.residual_violations],
        )
        hard_residuals = _hard_count(page.residual_violations)
        total_hard_residuals += hard_residuals
        print(
            f"{path.name}: {len(result.suggestions)} suggestion(s), "
            f"{len(page.applied)} applied, {hard_residuals} hard residual(s)"
        )
    return 1 if total_hard_residuals else 0


def cmd_eval(run: RunConfig, mode: EvalMode) -> int:
    """Score a labeled corpus in the requested mode; writes eval.json."""
    config = _pipeline_config(run)
    if len(run.inputs) != 1:
        raise ConfigError("eval expects exactly one corpus directory")
    report = run_ablation(mode, run.inputs[0], config)
    _write_json(run.out_dir / "eval.json", report.to_dict())
    print(report.format_table())
    return 0


def cmd_kb_validate(kb_path: Path) -> int:
    """Validate a KB bundle and print its shape."""
    try:
        kb = load_kb(kb_path)
    except DesignLintError as exc:
        print(f"INVALID: {exc}", file=sys.stderr)
        return 1
    counts = kb.manifest["counts"]
    print(f"KB bundle at {kb_path}: OK")
    print(f"  entries: {len(kb.entries)} "
          f"(component {counts['component']['hard']}h/{counts['component']['soft']}s, "
          f"system {counts['system']['hard']}h/{counts['system']['soft']}s)")
    print(f"  component types: {', '.join(kb.component_types)}")
    print(f"  triples: {len(kb.triples)}  aliases: {len(kb.aliases)}")
    return 0


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="designlint",
        description="Design-guideline lint and repair for frontend pages.",
    )
    parser.add_argument("--version", action="version", version=f"designlint {__version__}")
    sub = parser.add_subparsers(dest="command", required=True)

    def common(p: argparse.ArgumentParser, needs_input: bool = True):
        if needs_input:
            p.add_argument("input", nargs="+", help="page file(s), directory, or corpus dir")
        p.add_argument("--kb", default=None, help="KB bundle directory (default: shipped bundle)")
        p.add_argument("--snapshot", action="append", default=[],
                       help="snapshot JSON from the capture harness (repeatable)")
        p.add_argument("--viewport", action="append", default=[],
                       help="viewport WxH for the static parser (repeatable)")
        p.add_argument("--llm", choices=["mock", "replay", "live"], default="mock")
        p.add_argument("--replay-cache", default=None, help="completion cache for replay/live")
        p.add_argument("--endpoint", default=None, help="chat-completions base URL (live mode)")
        p.add_argument("--model", default=None, help="model name (live mode)")
        p.add_argument("--thresholds", default=None, help="JSON file overriding checker thresholds")
        p.add_argument("--out", default="designlint-out", help="output directory")
        p.add_argument("--trace", action="store_true", help="log LLM traffic (redacted)")

    common(sub.add_parser("lint", help="detect guideline violations"))
    common(sub.add_parser("repair", help="repair a page and re-validate"))
    eval_parser = sub.add_parser("eval", help="score against a labeled corpus")
    common(eval_parser)
    eval_parser.add_argument(
        "--mode",
        choices=[m.value for m in EvalMode],
        default=EvalMode.DETECT.value,
    )
    kb_parser = sub.add_parser("kb-validate", help="validate a KB bundle")
    kb_parser.add_argument("--kb", default=None, help="KB bundle directory (default: shipped bundle)")
    return parser


def _run_config(args: argparse.Namespace) -> RunConfig:
    viewports = tuple(_parse_viewport(v) for v in args.viewport) or (DEFAULT_VIEWPORT,)
    thresholds = (
        Thresholds.from_file(args.thresholds) if args.thresholds else Thresholds()
    )
    return RunConfig(
        inputs=[Path(p) for p in args.input],
        kb_path=Path(args.kb) if args.kb else default_bundle_path(),
        llm_mode=args.llm,
        out_dir=Path(args.out),
        trace=args.trace,
        snapshots=[Path(p) for p in args.snapshot],
        viewports=viewports,
        thresholds=thresholds,
        replay_cache=Path(args.replay_cache) if args.replay_cache else None,
        endpoint=args.endpoint,
        model=args.model,
    )


def main(argv: list[str] | None = None) -> int:
    args = build_parser().parse_args(argv)
    if getattr(args, "trace", False):
        logging.basicConfig(level=logging.DEBUG)
    try:
        if args.command == "kb-validate":
            return cmd_kb_validate(Path(args.kb) if args.kb else default_bundle_path())
        run = _run_config(args)
        run.out_dir.mkdir(parents=True, exist_ok=True)
        if args.command == "lint":
            return cmd_lint(run)
        if args.command == "repair":
            return cmd_repair(run)
        if args.command == "eval":
            return cmd_eval(run, EvalMode(args.mode))
        raise ConfigError(f"unknown command {args.command!r}")
    except DesignLintError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2
    except OSError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2


if __name__ == "__main__":
    sys.exit(main())
