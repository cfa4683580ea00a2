"""Static-HTML fallback parser producing Estimated DomSnapshots.

When no browser harness capture is available, pages are parsed directly
from markup. Styles come from inline ``style`` attributes layered over the
default-style table below (published in docs/static_defaults.md), and
geometry comes from a deliberately crude, fully deterministic box model:

* blocks stack vertically and take the parent's content width;
* inline-block elements shrink to fit their content;
* text width is estimated as 0.6 x font-size per character;
* a line of text is line-height tall (1.2 x font-size when "normal").

Checkers treat anything derived from these snapshots as Estimated.
"""

from __future__ import annotations

import re
from dataclasses import dataclass, field
from html.parser import HTMLParser

from .color import RGBA, TRANSPARENT, parse_css_color
from .snapshot import BBox, DomNode, DomSnapshot, EmptyDocument

TEXT_WIDTH_FACTOR = 0.6
LINE_HEIGHT_FACTOR = 1.2
BASE_FONT_SIZE = 16.0

VOID_TAGS = frozenset(
    "area base br col embed hr img input link meta param source track wbr".split()
)

INLINE_TAGS = frozenset(
    "a abbr b bdi bdo cite code em i kbd label mark q s samp small span strong sub sup time u var".split()
)
INLINE_BLOCK_TAGS = frozenset("button img input select textarea meter progress".split())
HIDDEN_TAGS = frozenset("head title meta link style script noscript template".split())

HEADING_SIZES = {"h1": 32.0, "h2": 24.0, "h3": 19.0, "h4": 16.0, "h5": 13.0, "h6": 11.0}
BOLD_TAGS = frozenset(set(HEADING_SIZES) | {"b", "strong", "th"})

# Replaced-element fallback sizes when neither styles nor attributes give one.
REPLACED_DEFAULT_SIZE = {
    "input": (160.0, 22.0),
    "select": (160.0, 22.0),
    "textarea": (160.0, 44.0),
    "img": (0.0, 0.0),
}

LINK_COLOR: RGBA = (0.0, 0.0, 14.0 / 15.0, 1.0)
BUTTON_FACE: RGBA = (239.0 / 255.0, 239.0 / 255.0, 239.0 / 255.0, 1.0)

# tag -> extra default declarations, applied before inline styles.
TAG_DEFAULTS: dict[str, dict[str, str]] = {
    "body": {"margin": "8px"},
    "p": {"margin": "16px 0"},
    "ul": {"margin": "16px 0", "padding-left": "40px"},
    "ol": {"margin": "16px 0", "padding-left": "40px"},
    "button": {"padding": "6px 12px"},
    "input": {"padding": "2px 4px"},
    "textarea": {"padding": "2px 4px"},
    "select": {"padding": "2px 4px"},
}
for _h in HEADING_SIZES:
    TAG_DEFAULTS[_h] = {"margin": "16px 0"}

_WS_RE = re.compile(r"\s+")


def _collapse(text: str) -> str:
    return _WS_RE.sub(" ", text).strip()


@dataclass
class _Element:
    tag: str
    attributes: dict[str, str]
    children: list["_Element"] = field(default_factory=list)
    text_parts: list[str] = field(default_factory=list)
    span: tuple[int, int] = (0, 0)
    synthetic: bool = False
    # filled during style/layout passes
    style: dict[str, object] = field(default_factory=dict)
    bbox: BBox = BBox(0.0, 0.0, 0.0, 0.0)

    @property
    def text(self) -> str:
        return _collapse("".join(self.text_parts))


class _TreeBuilder(HTMLParser):
    def __init__(self, source: str):
        super().__init__(convert_charrefs=True)
        self.source = source
        self.line_starts = [0]
        for i, ch in enumerate(source):
            if ch == "\n":
                self.line_starts.append(i + 1)
        self.top_level: list[_Element] = []
        self.stack: list[_Element] = []

    def _offset(self) -> int:
        line, col = self.getpos()
        return self.line_starts[line - 1] + col

    def _attach(self, element: _Element) -> None:
        if self.stack:
            self.stack[-1].children.append(element)
        else:
            self.top_level.append(element)

    def _element(self, tag: str, attrs) -> _Element:
        start = self._offset()
        raw = self.get_starttag_text() or ""
        attributes: dict[str, str] = {}
        for name, value in attrs:
            attributes.setdefault(name, value if value is not None else "")
        return _Element(tag=tag, attributes=attributes, span=(start, start + len(raw)))

    def handle_starttag(self, tag, attrs):
        element = self._element(tag, attrs)
        self._attach(element)
        if tag not in VOID_TAGS:
            self.stack.append(element)

    def handle_startendtag(self, tag, attrs):
        element = self._element(tag, attrs)
        self._attach(element)

    def handle_endtag(self, tag):
        if not any(e.tag == tag for e in self.stack):
            return  # stray end tag, tolerated
        close = self.source.find(">", self._offset())
        end = close + 1 if close >= 0 else len(self.source)
        while self.stack:
            element = self.stack.pop()
            element.span = (element.span[0], end)
            if element.tag == tag:
                break

    def handle_data(self, data):
        if self.stack:
            self.stack[-1].text_parts.append(data)

    def finish(self) -> list[_Element]:
        while self.stack:  # unclosed tags extend to end of input
            element = self.stack.pop()
            element.span = (element.span[0], len(self.source))
        return self.top_level


def _parse_declarations(css: str) -> list[tuple[str, str]]:
    declarations = []
    for chunk in css.split(";"):
        if ":" not in chunk:
            continue
        prop, _, value = chunk.partition(":")
        declarations.append((prop.strip().lower(), value.strip()))
    return declarations


_BOX_SIDES = ("top", "right", "bottom", "left")


def _expand_box(prop: str, value: str) -> list[tuple[str, str]]:
    parts = value.split()
    if not 1 <= len(parts) <= 4:
        return []
    if len(parts) == 1:
        t = r = b = l = parts[0]
    elif len(parts) == 2:
        t, r = parts
        b, l = t, r
    elif len(parts) == 3:
        t, r, b = parts
        l = r
    else:
        t, r, b, l = parts
    return [(f"{prop}-{side}", v) for side, v in zip(_BOX_SIDES, (t, r, b, l))]


def _px(value: str) -> float | None:
    value = value.strip().lower()
    if value.endswith("px"):
        value = value[:-2]
    try:
        return float(value)
    except ValueError:
        return None


class _Resolved:
    """Computed styles for one element during the static cascade."""

    __slots__ = (
        "color", "background", "font_size", "font_weight", "line_height_raw",
        "display", "box", "width", "height",
    )

    def __init__(self):
        self.color: RGBA = (0.0, 0.0, 0.0, 1.0)
        self.background: RGBA = TRANSPARENT
        self.font_size = BASE_FONT_SIZE
        self.font_weight = 400
        self.line_height_raw: float | None = None  # px, None means "normal"
        self.display = "block"
        self.box = {f"{kind}-{side}": 0.0 for kind in ("padding", "margin") for side in _BOX_SIDES}
        self.width: float | None = None
        self.height: float | None = None

    @property
    def line_height(self) -> float:
        return self.line_height_raw if self.line_height_raw is not None else LINE_HEIGHT_FACTOR * self.font_size


def _default_display(tag: str) -> str:
    if tag in HIDDEN_TAGS:
        return "none"
    if tag in INLINE_TAGS:
        return "inline"
    if tag in INLINE_BLOCK_TAGS:
        return "inline-block"
    return "block"


def _resolve_styles(element: _Element, parent: _Resolved | None) -> _Resolved:
    resolved = _Resolved()
    if parent is not None:
        resolved.color = parent.color
        resolved.font_size = parent.font_size
        resolved.font_weight = parent.font_weight

    tag = element.tag
    resolved.display = _default_display(tag)
    if tag in HEADING_SIZES:
        resolved.font_size = HEADING_SIZES[tag]
    if tag in BOLD_TAGS:
        resolved.font_weight = 700
    if tag == "a" and "href" in element.attributes:
        resolved.color = LINK_COLOR
    if tag == "button":
        resolved.background = BUTTON_FACE

    declarations = []
    for prop, value in TAG_DEFAULTS.get(tag, {}).items():
        declarations.append((prop, value))
    declarations.extend(_parse_declarations(element.attributes.get("style", "")))

    expanded: list[tuple[str, str]] = []
    for prop, value in declarations:
        if prop in ("padding", "margin"):
            expanded.extend(_expand_box(prop, value))
        else:
            expanded.append((prop, value))

    for prop, value in expanded:
        if prop == "color":
            try:
                resolved.color = parse_css_color(value)
            except ValueError:
                pass
        elif prop in ("background-color", "background"):
            try:
                resolved.background = parse_css_color(value)
            except ValueError:
                pass
        elif prop == "font-size":
            px = _px(value)
            if px is not None:
                resolved.font_size = px
        elif prop == "font-weight":
            if value.strip() == "bold":
                resolved.font_weight = 700
            else:
                try:
                    resolved.font_weight = int(float(value))
                except ValueError:
                    pass
        elif prop == "line-height":
            px = _px(value)
            if px is not None:
                resolved.line_height_raw = px
        elif prop == "display":
            resolved.display = value.strip().lower()
        elif prop in resolved.box:
            px = _px(value)
            if px is not None:
                resolved.box[prop] = px
        elif prop == "width":
            resolved.width = _px(value)
        elif prop == "height":
            resolved.height = _px(value)

    if resolved.width is None:
        attr_w = _px(element.attributes.get("width", ""))
        if attr_w is not None:
            resolved.width = attr_w
    if resolved.height is None:
        attr_h = _px(element.attributes.get("height", ""))
        if attr_h is not None:
            resolved.height = attr_h
    return resolved


def _text_width(element: _Element, resolved: _Resolved) -> float:
    return TEXT_WIDTH_FACTOR * resolved.font_size * len(element.text)


class _Layout:
    """Deterministic single-pass layout: everything stacks vertically."""

    def __init__(self, viewport: tuple[int, int]):
        self.viewport = viewport
        self.resolved: dict[int, _Resolved] = {}

    def resolve_tree(self, element: _Element, parent: _Resolved | None) -> None:
        resolved = _resolve_styles(element, parent)
        self.resolved[id(element)] = resolved
        for child in element.children:
            self.resolve_tree(child, resolved)

    def intrinsic_width(self, element: _Element) -> float:
        r = self.resolved[id(element)]
        if r.display == "none":
            return 0.0
        if r.width is not None:
            return r.width
        if element.tag in REPLACED_DEFAULT_SIZE and not element.children and not element.text:
            return REPLACED_DEFAULT_SIZE[element.tag][0]
        content = _text_width(element, r)
        for child in element.children:
            cr = self.resolved[id(child)]
            child_w = self.intrinsic_width(child) + cr.box["margin-left"] + cr.box["margin-right"]
            content = max(content, child_w)
        return content + r.box["padding-left"] + r.box["padding-right"]

    def layout(self, element: _Element, x: float, y: float, avail: float, is_root: bool = False) -> None:
        r = self.resolved[id(element)]
        if r.display == "none":
            self._zero(element)
            return

        if is_root:
            width = float(self.viewport[0])
        elif r.width is not None:
            width = r.width
        elif r.display in ("inline", "inline-block"):
            width = self.intrinsic_width(element)
        else:
            width = max(avail - r.box["margin-left"] - r.box["margin-right"], 0.0)

        content_x = x + r.box["padding-left"]
        cursor = y + r.box["padding-top"]
        if element.text:
            cursor += r.line_height
        content_avail = max(width - r.box["padding-left"] - r.box["padding-right"], 0.0)

        for child in element.children:
            cr = self.resolved[id(child)]
            if cr.display == "none":
                self._zero(child)
                continue
            cursor += cr.box["margin-top"]
            self.layout(child, content_x + cr.box["margin-left"], cursor, content_avail)
            cursor += child.bbox.height + cr.box["margin-bottom"]

        if r.height is not None:
            height = r.height
        elif element.tag in REPLACED_DEFAULT_SIZE and not element.children and not element.text:
            height = REPLACED_DEFAULT_SIZE[element.tag][1]
        else:
            height = (cursor - y) + r.box["padding-bottom"]

        element.bbox = BBox(x=x, y=y, width=max(width, 0.0), height=max(height, 0.0))

    def _zero(self, element: _Element) -> None:
        element.bbox = BBox(0.0, 0.0, 0.0, 0.0)
        for child in element.children:
            self._zero(child)


def _style_map(resolved: _Resolved) -> dict[str, object]:
    styles: dict[str, object] = {
        "color": resolved.color,
        "background-color": resolved.background,
        "font-size": f"{resolved.font_size:g}px",
        "font-weight": str(resolved.font_weight),
        "line-height": f"{resolved.line_height:g}px",
        "display": resolved.display,
        "position": "static",
    }
    for prop, value in resolved.box.items():
        styles[prop] = f"{value:g}px"
    return styles


def _build_snapshot(
    root: _Element,
    layout: _Layout,
    viewport: tuple[int, int],
    source_ref: str,
) -> tuple[DomSnapshot, dict[str, tuple[int, int]]]:
    nodes: list[DomNode] = []
    spans: dict[str, tuple[int, int]] = {}

    def walk(element: _Element, parent_id: int | None, xpath: str) -> None:
        node_id = len(nodes)
        nodes.append(
            DomNode(
                id=node_id,
                parent_id=parent_id,
                tag=element.tag,
                xpath=xpath,
                attributes=dict(element.attributes),
                text=element.text,
                bbox=element.bbox,
                styles=_style_map(layout.resolved[id(element)]),
            )
        )
        if not element.synthetic:
            spans[xpath] = element.span
        counters: dict[str, int] = {}
        for child in element.children:
            counters[child.tag] = counters.get(child.tag, 0) + 1
            walk(child, node_id, f"{xpath}/{child.tag}[{counters[child.tag]}]")

    walk(root, None, "/html[1]")
    snapshot = DomSnapshot(
        schema_version=1,
        source_ref=source_ref,
        viewport=viewport,
        nodes=tuple(nodes),
        estimated=True,
    )
    return snapshot, spans


def parse_static_indexed(
    html: str,
    viewport: tuple[int, int] = (1280, 800),
    source_ref: str = "static",
) -> tuple[DomSnapshot, dict[str, tuple[int, int]]]:
    """parse_static plus an xpath -> source byte-span map for repair."""
    builder = _TreeBuilder(html)
    builder.feed(html)
    builder.close()
    top = builder.finish()
    if not top:
        raise EmptyDocument("no element content")

    if len(top) == 1 and top[0].tag == "html":
        root = top[0]
    else:
        root = _Element(tag="html", attributes={}, children=top, span=(0, len(html)), synthetic=True)

    layout = _Layout(viewport)
    layout.resolve_tree(root, None)
    layout.layout(root, 0.0, 0.0, float(viewport[0]), is_root=True)
    return _build_snapshot(root, layout, viewport, source_ref)


def parse_static(
    html: str,
    viewport: tuple[int, int] = (1280, 800),
    source_ref: str = "static",
) -> DomSnapshot:
    """Parse markup without a browser; see module docstring for the model."""
    snapshot, _ = parse_static_indexed(html, viewport, source_ref)
    return snapshot
