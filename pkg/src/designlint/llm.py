"""LLM client abstraction: hermetic mock, replay cache, and HTTP client.

The repair pipeline talks to an LlmClient and never to a vendor SDK. Three
implementations ship:

* MockLlmClient: fully deterministic and offline. It understands the
  prompt layout produced by repair.py (a TASK marker plus a DETECTED
  ISSUES JSON block) and answers with rule-derived fixes, so the whole
  pipeline can run and converge hermetically in tests and CI.
* ReplayLlmClient: replays completions recorded from a live run, keyed
  by the SHA-256 of the prompt.
* HttpLlmClient: OpenAI-style chat-completions endpoint over HTTPS with
  deterministic decoding requested; optionally records a replay cache.
"""

from __future__ import annotations

import hashlib
import json
import logging
import math
import os
import re
from abc import ABC, abstractmethod
from pathlib import Path

from .color import contrast_ratio, parse_css_color, to_hex
from .errors import DesignLintError

log = logging.getLogger(__name__)


class LlmProtocolError(DesignLintError):
    """The client produced no usable completion (transport or format)."""


class PromptTooLarge(DesignLintError):
    def __init__(self, size: int, limit: int):
        super().__init__(f"prompt of {size} chars exceeds client limit {limit}")
        self.size = size
        self.limit = limit


class LlmClient(ABC):
    """Minimal capability contract for a completion backend."""

    #: largest prompt, in characters, the client accepts
    max_prompt_chars: int = 480_000
    #: whether send() may be called from multiple threads concurrently
    concurrency_safe: bool = True

    @abstractmethod
    def send(self, prompt: str) -> str:
        """Return the completion text for a prompt, deterministically when
        the backend supports it."""


def prompt_key(prompt: str) -> str:
    return hashlib.sha256(prompt.encode("utf-8")).hexdigest()


def extract_json(completion: str):
    """Parse JSON out of a completion, tolerating markdown code fences."""
    text = completion.strip()
    fence = re.match(r"^```(?:json)?\s*(.*?)\s*```$", text, re.DOTALL)
    if fence:
        text = fence.group(1)
    try:
        return json.loads(text)
    except json.JSONDecodeError as exc:
        raise LlmProtocolError(f"completion is not valid JSON: {exc}")


# Markers the repair prompts embed; the mock keys off these.
TASK_MARKER = "### TASK:"
ISSUES_MARKER = "### DETECTED ISSUES (JSON)"
MERGE_MARKER = "### MERGE CANDIDATES (JSON)"
END_MARKER = "### END"


def _marked_block(prompt: str, marker: str) -> str | None:
    start = prompt.find(marker)
    if start < 0:
        return None
    start = prompt.index("\n", start) + 1
    end = prompt.find(END_MARKER, start)
    return prompt[start : end if end >= 0 else len(prompt)].strip()


def _first_tag_end(markup: str) -> int:
    gt = markup.find(">")
    return gt if gt >= 0 else len(markup) - 1


def set_style_prop(markup: str, prop: str, value: str) -> str:
    """Set a CSS declaration on the first start tag of a markup excerpt."""
    tag_end = _first_tag_end(markup)
    head, tail = markup[: tag_end + 1], markup[tag_end + 1 :]
    style_re = re.compile(r'style\s*=\s*"([^"]*)"')
    match = style_re.search(head)
    if match:
        css = match.group(1)
        decls = [d for d in css.split(";") if d.strip()]
        kept = [d for d in decls if d.split(":", 1)[0].strip().lower() != prop]
        kept.append(f"{prop}: {value}")
        new_css = "; ".join(d.strip() for d in kept)
        head = head[: match.start(1)] + new_css + head[match.end(1) :]
    else:
        insert = tag_end - 1 if head.endswith("/>") else tag_end
        head = f'{head[:insert].rstrip()} style="{prop}: {value}"{head[insert:]}'
    return head + tail


def add_attribute(markup: str, attr: str, value: str) -> str:
    tag_end = _first_tag_end(markup)
    head, tail = markup[: tag_end + 1], markup[tag_end + 1 :]
    insert = tag_end - 1 if head.endswith("/>") else tag_end
    head = f'{head[:insert].rstrip()} {attr}="{value}"{head[insert:]}'
    return head + tail


def retag(markup: str, old: str, new: str) -> str:
    out = re.sub(rf"^<{old}\b", f"<{new}", markup, count=1)
    return re.sub(rf"</{old}\s*>\s*$", f"</{new}>", out, count=1)


def _pick_text_color(bg) -> str:
    if isinstance(bg, str):
        bg = parse_css_color(bg)
    bg_rgba = (bg[0], bg[1], bg[2], 1.0)
    black, white = (0.0, 0.0, 0.0, 1.0), (1.0, 1.0, 1.0, 1.0)
    if contrast_ratio(black, bg_rgba) >= contrast_ratio(white, bg_rgba):
        return to_hex(black)
    return to_hex(white)


class MockLlmClient(LlmClient):
    """Deterministic offline stand-in for a repair-capable model.

    For individual-repair prompts it fixes every detected issue with a
    rule-specific transformation of the quoted markup; for merge prompts it
    returns the first (highest-priority) candidate; extraction and mapping
    prompts get empty answers so the deterministic heuristics stand alone.
    Identical prompts always produce identical completions.
    """

    max_prompt_chars = 400_000
    concurrency_safe = True

    def send(self, prompt: str) -> str:
        if len(prompt) > self.max_prompt_chars:
            raise PromptTooLarge(len(prompt), self.max_prompt_chars)
        task_line = next(
            (line for line in prompt.splitlines() if line.startswith(TASK_MARKER)), ""
        )
        task = task_line[len(TASK_MARKER) :].strip()
        if task == "extract-components":
            return "[]"
        if task == "map-component":
            return "null"
        if task == "merge-region":
            return self._merge(prompt)
        return self._repair(prompt)

    def _merge(self, prompt: str) -> str:
        block = _marked_block(prompt, MERGE_MARKER)
        if block is None:
            raise LlmProtocolError("merge prompt lacks candidates block")
        payload = json.loads(block)
        candidates = payload.get("candidates", [])
        if not candidates:
            raise LlmProtocolError("merge prompt has no candidates")
        return json.dumps({"merged_region": candidates[0]})

    def _repair(self, prompt: str) -> str:
        block = _marked_block(prompt, ISSUES_MARKER)
        if block is None or block == "none":
            return "[]"
        issues = json.loads(block)
        out = []
        for issue in issues:
            fix = self._fix(issue)
            if fix is None:
                continue
            reference = issue.get("guideline_id", "")
            text = issue.get("guideline_text", "")
            if text:
                reference = f"{reference}: {text}"
            out.append(
                {
                    "bad_design_code": issue["bad_design_code"],
                    "detailed_reference_guidelines": [reference],
                    "suggestion_fix_code": fix,
                }
            )
        return json.dumps(out)

    def _fix(self, issue: dict) -> str | None:
        rule = issue.get("rule", "")
        bad = issue.get("bad_design_code", "")
        evidence = issue.get("evidence", {})
        if not bad:
            return None
        if rule == "contrast":
            return set_style_prop(bad, "color", _pick_text_color(evidence.get("bg", (1, 1, 1, 1))))
        if rule == "label-overflow":
            needed = math.ceil(
                float(evidence.get("label_width", 0.0)) + float(evidence.get("padding_h", 0.0))
            ) + 1
            return set_style_prop(bad, "width", f"{needed}px")
        if rule == "target-size":
            width = max(48.0, float(evidence.get("width", 0.0)))
            height = max(48.0, float(evidence.get("height", 0.0)))
            fixed = set_style_prop(bad, "width", f"{width:g}px")
            return set_style_prop(fixed, "height", f"{height:g}px")
        if rule == "missing-label":
            tag = evidence.get("tag", "")
            if tag == "img":
                return add_attribute(bad, "alt", "illustration")
            if tag == "input":
                return add_attribute(bad, "aria-label", "text input")
            return add_attribute(bad, "aria-label", "action")
        if rule == "heading-order":
            level = int(evidence.get("level", 2))
            target = int(evidence.get("previous_level", 0)) + 1
            return retag(bad, f"h{level}", f"h{target}")
        if rule == "spacing-symmetry":
            left = float(evidence.get("padding_left", 0.0))
            return set_style_prop(bad, "padding-right", f"{left:g}px")
        return None


class ReplayLlmClient(LlmClient):
    """Serves completions from a prompt-hash keyed cache file."""

    concurrency_safe = True

    def __init__(self, cache_path: str | Path):
        self.cache_path = Path(cache_path)
        try:
            self._cache: dict[str, str] = json.loads(self.cache_path.read_text(encoding="utf-8"))
        except FileNotFoundError:
            raise LlmProtocolError(f"replay cache not found: {self.cache_path}")
        except json.JSONDecodeError as exc:
            raise LlmProtocolError(f"replay cache is not valid JSON: {exc}")

    def send(self, prompt: str) -> str:
        if len(prompt) > self.max_prompt_chars:
            raise PromptTooLarge(len(prompt), self.max_prompt_chars)
        key = prompt_key(prompt)
        if key not in self._cache:
            raise LlmProtocolError(f"replay cache has no completion for prompt {key[:12]}")
        return self._cache[key]


class HttpLlmClient(LlmClient):
    """Chat-completions client with deterministic decoding requested.

    Completions are optionally recorded into a replay cache so later runs
    can be hermetic. Request and response bodies are logged at DEBUG when
    tracing is on, with the auth header redacted.
    """

    concurrency_safe = True

    def __init__(
        self,
        base_url: str,
        model: str,
        token_env: str = "DESIGNLINT_API_TOKEN",
        timeout: float = 60.0,
        record_path: str | Path | None = None,
        trace: bool = False,
    ):
        token = os.environ.get(token_env, "")
        if not token:
            raise LlmProtocolError(f"live mode needs the {token_env} environment variable")
        self.base_url = base_url.rstrip("/")
        self.model = model
        self._token = token
        self.timeout = timeout
        self.record_path = Path(record_path) if record_path else None
        self.trace = trace

    def send(self, prompt: str) -> str:
        if len(prompt) > self.max_prompt_chars:
            raise PromptTooLarge(len(prompt), self.max_prompt_chars)
        import requests

        body = {
            "model": self.model,
            "messages": [{"role": "user", "content": prompt}],
            "temperature": 0,
            "seed": 0,
        }
        if self.trace:
            log.debug("llm request url=%s body=%s", f"{self.base_url}/chat/completions", json.dumps(body)[:2000])
        try:
            response = requests.post(
                f"{self.base_url}/chat/completions",
                json=body,
                headers={"Authorization": f"Bearer {self._token}"},
                timeout=self.timeout,
            )
            response.raise_for_status()
            payload = response.json()
            completion = payload["choices"][0]["message"]["content"]
        except Exception as exc:  # transport, HTTP, or shape problems
            raise LlmProtocolError(f"chat completion failed: {exc}")
        if self.trace:
            log.debug("llm response %s", json.dumps(payload)[:2000])
        if not isinstance(completion, str):
            raise LlmProtocolError("completion content is not text")
        if self.record_path is not None:
            self._record(prompt, completion)
        return completion

    def _record(self, prompt: str, completion: str) -> None:
        cache: dict[str, str] = {}
        if self.record_path.exists():
            try:
                cache = json.loads(self.record_path.read_text(encoding="utf-8"))
            except json.JSONDecodeError:
                cache = {}
        cache[prompt_key(prompt)] = completion
        self.record_path.parent.mkdir(parents=True, exist_ok=True)
        self.record_path.write_text(
            json.dumps(cache, ensure_ascii=False, indent=2, sort_keys=True) + "\n",
            encoding="utf-8",
        )
