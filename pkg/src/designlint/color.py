"""Color parsing and WCAG contrast math.

Colors are handled everywhere as sRGB RGBA float 4-tuples with every channel
in [0, 1]. Contrast follows the WCAG relative-luminance definition: channels
are linearized (c/12.92 below the 0.04045 cutoff, else ((c+0.055)/1.055)^2.4),
weighted 0.2126/0.7152/0.0722, and the ratio is (L_light+0.05)/(L_dark+0.05).
"""

from __future__ import annotations

import re

RGBA = tuple[float, float, float, float]

# Small keyword table; fixtures and inline styles use hex/rgb() for anything else.
NAMED_COLORS: dict[str, RGBA] = {
    "transparent": (0.0, 0.0, 0.0, 0.0),
    "black": (0.0, 0.0, 0.0, 1.0),
    "silver": (0.7529411764705882, 0.7529411764705882, 0.7529411764705882, 1.0),
    "gray": (0.5019607843137255, 0.5019607843137255, 0.5019607843137255, 1.0),
    "grey": (0.5019607843137255, 0.5019607843137255, 0.5019607843137255, 1.0),
    "white": (1.0, 1.0, 1.0, 1.0),
    "maroon": (0.5019607843137255, 0.0, 0.0, 1.0),
    "red": (1.0, 0.0, 0.0, 1.0),
    "purple": (0.5019607843137255, 0.0, 0.5019607843137255, 1.0),
    "fuchsia": (1.0, 0.0, 1.0, 1.0),
    "green": (0.0, 0.5019607843137255, 0.0, 1.0),
    "lime": (0.0, 1.0, 0.0, 1.0),
    "olive": (0.5019607843137255, 0.5019607843137255, 0.0, 1.0),
    "yellow": (1.0, 1.0, 0.0, 1.0),
    "navy": (0.0, 0.0, 0.5019607843137255, 1.0),
    "blue": (0.0, 0.0, 1.0, 1.0),
    "teal": (0.0, 0.5019607843137255, 0.5019607843137255, 1.0),
    "aqua": (0.0, 1.0, 1.0, 1.0),
    "orange": (1.0, 0.6470588235294118, 0.0, 1.0),
}

_RGB_RE = re.compile(
    r"rgba?\(\s*([0-9.]+%?)\s*[, ]\s*([0-9.]+%?)\s*[, ]\s*([0-9.]+%?)"
    r"(?:\s*[,/]\s*([0-9.]+%?))?\s*\)"
)

WHITE: RGBA = (1.0, 1.0, 1.0, 1.0)
BLACK: RGBA = (0.0, 0.0, 0.0, 1.0)
TRANSPARENT: RGBA = (0.0, 0.0, 0.0, 0.0)


class ColorParseError(ValueError):
    """Raised when a CSS color value cannot be interpreted."""


def _channel(token: str, scale: float) -> float:
    if token.endswith("%"):
        return min(max(float(token[:-1]) / 100.0, 0.0), 1.0)
    return min(max(float(token) / scale, 0.0), 1.0)


def parse_css_color(value: str) -> RGBA:
    """Parse a CSS color (hex, rgb()/rgba(), or keyword) to an RGBA tuple."""
    text = value.strip().lower()
    if not text:
        raise ColorParseError("empty color value")
    if text in NAMED_COLORS:
        return NAMED_COLORS[text]
    if text.startswith("#"):
        digits = text[1:]
        if len(digits) in (3, 4):
            digits = "".join(ch * 2 for ch in digits)
        if len(digits) == 6:
            digits += "ff"
        if len(digits) != 8 or not re.fullmatch(r"[0-9a-f]{8}", digits):
            raise ColorParseError(f"bad hex color: {value!r}")
        r, g, b, a = (int(digits[i : i + 2], 16) / 255.0 for i in (0, 2, 4, 6))
        return (r, g, b, a)
    match = _RGB_RE.fullmatch(text)
    if match:
        r = _channel(match.group(1), 255.0)
        g = _channel(match.group(2), 255.0)
        b = _channel(match.group(3), 255.0)
        a = _channel(match.group(4), 1.0) if match.group(4) is not None else 1.0
        return (r, g, b, a)
    raise ColorParseError(f"unsupported color syntax: {value!r}")


def to_hex(color: RGBA) -> str:
    r, g, b, a = (round(c * 255) for c in color)
    if a == 255:
        return f"#{r:02x}{g:02x}{b:02x}"
    return f"#{r:02x}{g:02x}{b:02x}{a:02x}"


def linearize(channel: float) -> float:
    if channel <= 0.04045:
        return channel / 12.92
    return ((channel + 0.055) / 1.055) ** 2.4


def relative_luminance(color: RGBA) -> float:
    r, g, b = color[0], color[1], color[2]
    return 0.2126 * linearize(r) + 0.7152 * linearize(g) + 0.0722 * linearize(b)


def contrast_ratio(fg: RGBA, bg: RGBA) -> float:
    """WCAG contrast ratio of two opaque colors, always in [1, 21]."""
    lf = relative_luminance(fg)
    lb = relative_luminance(bg)
    lighter, darker = max(lf, lb), min(lf, lb)
    return (lighter + 0.05) / (darker + 0.05)


def alpha_over(top: RGBA, bottom: RGBA) -> RGBA:
    """Source-over compositing of `top` onto `bottom`."""
    at, ab = top[3], bottom[3]
    ao = at + ab * (1.0 - at)
    if ao == 0.0:
        return TRANSPARENT
    channels = tuple(
        (top[i] * at + bottom[i] * ab * (1.0 - at)) / ao for i in range(3)
    )
    return (channels[0], channels[1], channels[2], ao)
