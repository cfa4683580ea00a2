"""Rendered-page data model and snapshot JSON (schema v1) parsing.

A DomSnapshot is the flattened node tree of a rendered page: tags, xpaths,
attributes, direct text, bounding boxes, and a fixed set of computed styles.
Snapshots come from the browser capture harness (Measured) or from the
static HTML fallback parser in staticdom.py (Estimated).

The JSON wire format is published in docs/snapshot_schema_v1.md and is the
contract with the capture harness; parse_snapshot enforces it bit-exactly.
"""

from __future__ import annotations

import json
import logging
from dataclasses import dataclass, field, replace

from .color import RGBA, WHITE, alpha_over
from .errors import DesignLintError

log = logging.getLogger(__name__)

SCHEMA_VERSION = 1

# Styles every node must carry. The two *_COLOR keys hold RGBA float arrays;
# everything else holds the computed CSS value as a string.
COLOR_STYLE_KEYS = ("color", "background-color")
REQUIRED_STYLE_KEYS = COLOR_STYLE_KEYS + (
    "font-size",
    "font-weight",
    "line-height",
    "padding-top",
    "padding-right",
    "padding-bottom",
    "padding-left",
    "margin-top",
    "margin-right",
    "margin-bottom",
    "margin-left",
    "display",
    "position",
)


class SnapshotError(DesignLintError):
    pass


class SchemaError(SnapshotError):
    def __init__(self, path: str, detail: str):
        super().__init__(f"{path}: {detail}")
        self.json_path = path


class VersionError(SnapshotError):
    pass


class IntegrityError(SnapshotError):
    pass


class UnknownNode(SnapshotError):
    pass


class EmptyDocument(SnapshotError):
    pass


@dataclass(frozen=True)
class BBox:
    x: float
    y: float
    width: float
    height: float

    def as_list(self) -> list[float]:
        return [self.x, self.y, self.width, self.height]


@dataclass(frozen=True)
class DomNode:
    id: int
    parent_id: int | None
    tag: str
    xpath: str
    attributes: dict[str, str]
    text: str
    bbox: BBox
    styles: dict[str, object]

    def style_color(self, key: str) -> RGBA:
        value = self.styles[key]
        return (value[0], value[1], value[2], value[3])  # type: ignore[index]

    def style_px(self, key: str, default: float = 0.0) -> float:
        """Numeric pixel value of a string style like '16px'."""
        raw = self.styles.get(key)
        if not isinstance(raw, str):
            return default
        raw = raw.strip().lower()
        if raw.endswith("px"):
            raw = raw[:-2]
        try:
            return float(raw)
        except ValueError:
            return default


@dataclass(frozen=True)
class DomSnapshot:
    schema_version: int
    source_ref: str
    viewport: tuple[int, int]
    nodes: tuple[DomNode, ...]
    # True when produced by the static fallback parser; not part of the wire
    # format, so excluded from equality.
    estimated: bool = field(default=False, compare=False)

    def node(self, node_id: int) -> DomNode:
        if 0 <= node_id < len(self._index) and self._index[node_id] is not None:
            return self._index[node_id]  # type: ignore[return-value]
        raise UnknownNode(f"node id {node_id} not in snapshot")

    @property
    def _index(self) -> list[DomNode | None]:
        cache = getattr(self, "_index_cache", None)
        if cache is None:
            size = max((n.id for n in self.nodes), default=-1) + 1
            cache = [None] * size
            for n in self.nodes:
                cache[n.id] = n
            object.__setattr__(self, "_index_cache", cache)
        return cache

    @property
    def root(self) -> DomNode:
        return next(n for n in self.nodes if n.parent_id is None)

    def children(self, node_id: int) -> list[DomNode]:
        return [n for n in self.nodes if n.parent_id == node_id]

    def mark_estimated(self) -> "DomSnapshot":
        return replace(self, estimated=True)


def _require(obj: dict, key: str, types, path: str):
    if key not in obj:
        raise SchemaError(f"{path}.{key}", "missing")
    value = obj[key]
    if not isinstance(value, types):
        raise SchemaError(f"{path}.{key}", f"expected {types}, got {type(value).__name__}")
    return value


def _parse_color_value(value, path: str) -> tuple[float, float, float, float]:
    if (
        not isinstance(value, (list, tuple))
        or len(value) != 4
        or not all(isinstance(c, (int, float)) and not isinstance(c, bool) for c in value)
    ):
        raise SchemaError(path, "color must be a 4-element number array")
    channels = tuple(float(c) for c in value)
    if any(c < 0.0 or c > 1.0 for c in channels):
        raise SchemaError(path, f"color channels must be within [0,1], got {list(channels)}")
    return channels  # type: ignore[return-value]


def _parse_node(raw: dict, index: int) -> DomNode:
    path = f"nodes[{index}]"
    node_id = _require(raw, "id", int, path)
    parent_id = raw.get("parent_id")
    if parent_id is not None and not isinstance(parent_id, int):
        raise SchemaError(f"{path}.parent_id", "must be an integer or null")
    tag = _require(raw, "tag", str, path)
    if tag != tag.lower():
        raise SchemaError(f"{path}.tag", "must be lowercase")
    xpath = _require(raw, "xpath", str, path)
    attributes = _require(raw, "attributes", dict, path)
    for k, v in attributes.items():
        if not isinstance(k, str) or not isinstance(v, str):
            raise SchemaError(f"{path}.attributes", "keys and values must be strings")
    text = _require(raw, "text", str, path)

    raw_bbox = _require(raw, "bbox", dict, path)
    box = {}
    for key in ("x", "y", "width", "height"):
        value = _require(raw_bbox, key, (int, float), f"{path}.bbox")
        if isinstance(value, bool):
            raise SchemaError(f"{path}.bbox.{key}", "must be a number")
        box[key] = float(value)
    if box["width"] < 0 or box["height"] < 0:
        raise SchemaError(f"{path}.bbox", "width and height must be non-negative")

    raw_styles = _require(raw, "styles", dict, path)
    styles: dict[str, object] = {}
    for key in REQUIRED_STYLE_KEYS:
        if key not in raw_styles:
            raise SchemaError(f"{path}.styles.{key}", "missing")
    for key, value in raw_styles.items():
        if key in COLOR_STYLE_KEYS:
            styles[key] = _parse_color_value(value, f"{path}.styles.{key}")
        elif isinstance(value, str):
            styles[key] = value
        else:
            raise SchemaError(f"{path}.styles.{key}", "must be a string")

    known = {"id", "parent_id", "tag", "xpath", "attributes", "text", "bbox", "styles"}
    extra = set(raw) - known
    if extra:
        log.warning("snapshot node %d: ignoring unknown fields %s", node_id, sorted(extra))

    return DomNode(
        id=node_id,
        parent_id=parent_id,
        tag=tag,
        xpath=xpath,
        attributes=dict(attributes),
        text=text,
        bbox=BBox(**box),
        styles=styles,
    )


def parse_snapshot(data: bytes | str) -> DomSnapshot:
    """Parse and validate snapshot JSON (schema v1).

    Raises SchemaError for shape/type problems (with a JSON path),
    VersionError for unsupported schema versions, and IntegrityError for
    structural violations (duplicate xpaths, dangling or out-of-order ids,
    multiple roots).
    """
    if isinstance(data, bytes):
        data = data.decode("utf-8")
    try:
        raw = json.loads(data)
    except json.JSONDecodeError as exc:
        raise SchemaError("$", f"invalid JSON: {exc}")
    if not isinstance(raw, dict):
        raise SchemaError("$", "snapshot must be a JSON object")

    version = _require(raw, "schema_version", int, "$")
    if version != SCHEMA_VERSION:
        raise VersionError(f"unsupported schema_version {version}, expected {SCHEMA_VERSION}")
    source_ref = _require(raw, "source_ref", str, "$")
    viewport_raw = _require(raw, "viewport", dict, "$")
    vw = _require(viewport_raw, "width", int, "$.viewport")
    vh = _require(viewport_raw, "height", int, "$.viewport")
    nodes_raw = _require(raw, "nodes", list, "$")

    extra = set(raw) - {"schema_version", "source_ref", "viewport", "nodes"}
    if extra:
        log.warning("snapshot: ignoring unknown top-level fields %s", sorted(extra))

    nodes = []
    seen_ids: set[int] = set()
    seen_xpaths: set[str] = set()
    roots = 0
    last_id = -1
    for index, raw_node in enumerate(nodes_raw):
        if not isinstance(raw_node, dict):
            raise SchemaError(f"nodes[{index}]", "must be an object")
        node = _parse_node(raw_node, index)
        if node.id <= last_id:
            raise IntegrityError(f"node ids out of order at nodes[{index}] (id {node.id})")
        last_id = node.id
        if node.parent_id is None:
            roots += 1
        elif node.parent_id not in seen_ids:
            raise IntegrityError(
                f"node {node.id} references parent {node.parent_id} "
                "which does not precede it"
            )
        if node.xpath in seen_xpaths:
            raise IntegrityError(f"duplicate xpath {node.xpath!r}")
        seen_ids.add(node.id)
        seen_xpaths.add(node.xpath)
        nodes.append(node)

    if roots != 1:
        raise IntegrityError(f"snapshot must have exactly one root node, found {roots}")

    return DomSnapshot(
        schema_version=version,
        source_ref=source_ref,
        viewport=(vw, vh),
        nodes=tuple(nodes),
    )


def _node_to_record(node: DomNode) -> dict:
    styles = {}
    for key in sorted(node.styles):
        value = node.styles[key]
        styles[key] = list(value) if key in COLOR_STYLE_KEYS else value
    return {
        "id": node.id,
        "parent_id": node.parent_id,
        "tag": node.tag,
        "xpath": node.xpath,
        "attributes": {k: node.attributes[k] for k in sorted(node.attributes)},
        "text": node.text,
        "bbox": {
            "x": node.bbox.x,
            "y": node.bbox.y,
            "width": node.bbox.width,
            "height": node.bbox.height,
        },
        "styles": styles,
    }


def serialize_snapshot(snapshot: DomSnapshot) -> bytes:
    """Canonical schema-v1 bytes; parse_snapshot(serialize_snapshot(s)) == s."""
    document = {
        "schema_version": snapshot.schema_version,
        "source_ref": snapshot.source_ref,
        "viewport": {"width": snapshot.viewport[0], "height": snapshot.viewport[1]},
        "nodes": [_node_to_record(n) for n in snapshot.nodes],
    }
    return (json.dumps(document, ensure_ascii=False, indent=2, sort_keys=True) + "\n").encode("utf-8")


def effective_background(snapshot: DomSnapshot, node_id: int) -> RGBA:
    """Opaque color behind a node: its background composited over ancestors.

    Walks from the node toward the root compositing background-color with
    alpha-over, stopping early once alpha saturates; anything still
    translucent at the root is composited over opaque white. The result
    always has alpha 1.
    """
    node = snapshot.node(node_id)
    layers: list[RGBA] = []
    current: DomNode | None = node
    while current is not None:
        bg = current.style_color("background-color")
        layers.append(bg)
        if bg[3] >= 1.0:
            break
        current = snapshot.node(current.parent_id) if current.parent_id is not None else None

    result: RGBA = WHITE
    for layer in reversed(layers):
        result = alpha_over(layer, result)
    return (result[0], result[1], result[2], 1.0)
