from __future__ import annotations

import random

import pytest

from designlint.color import (
    ColorParseError,
    alpha_over,
    contrast_ratio,
    parse_css_color,
    relative_luminance,
    to_hex,
)


# Independent WCAG oracle, written from the standard's formulas.
def _oracle_lin(c: float) -> float:
    return c / 12.92 if c <= 0.04045 else ((c + 0.055) / 1.055) ** 2.4


def _oracle_luminance(rgb) -> float:
    return 0.2126 * _oracle_lin(rgb[0]) + 0.7152 * _oracle_lin(rgb[1]) + 0.0722 * _oracle_lin(rgb[2])


def _oracle_ratio(fg, bg) -> float:
    lf, lb = _oracle_luminance(fg), _oracle_luminance(bg)
    hi, lo = max(lf, lb), min(lf, lb)
    return (hi + 0.05) / (lo + 0.05)


def test_parse_hex_forms():
    assert parse_css_color("#fff") == (1.0, 1.0, 1.0, 1.0)
    assert parse_css_color("#000000") == (0.0, 0.0, 0.0, 1.0)
    assert parse_css_color("#FF0000") == (1.0, 0.0, 0.0, 1.0)
    r, g, b, a = parse_css_color("#12345680")
    assert (round(r * 255), round(g * 255), round(b * 255)) == (0x12, 0x34, 0x56)
    assert a == pytest.approx(0x80 / 255)


def test_parse_rgb_and_keywords():
    assert parse_css_color("rgb(255, 0, 0)") == (1.0, 0.0, 0.0, 1.0)
    assert parse_css_color("rgba(0, 0, 0, 0.5)") == (0.0, 0.0, 0.0, 0.5)
    assert parse_css_color("rgb(100%, 0%, 50%)")[2] == pytest.approx(0.5)
    assert parse_css_color("white") == (1.0, 1.0, 1.0, 1.0)
    assert parse_css_color("transparent")[3] == 0.0


def test_parse_rejects_garbage():
    for bad in ("", "#12", "#ggg", "hsl(1,2,3)", "notacolor"):
        with pytest.raises(ColorParseError):
            parse_css_color(bad)


def test_to_hex_round_trip():
    assert to_hex((1.0, 1.0, 1.0, 1.0)) == "#ffffff"
    assert to_hex((0.0, 0.0, 0.0, 0.5)) == "#00000080"


def test_contrast_known_values():
    white = (1.0, 1.0, 1.0, 1.0)
    black = (0.0, 0.0, 0.0, 1.0)
    assert contrast_ratio(black, white) == pytest.approx(21.0)
    assert contrast_ratio(white, white) == pytest.approx(1.0)
    gray = parse_css_color("#767676")
    # frozen from the independent oracle
    assert contrast_ratio(gray, white) == pytest.approx(4.542224959605253, abs=1e-9)


def test_contrast_matches_oracle_on_random_pairs():
    rng = random.Random(20240817)
    for _ in range(500):
        fg = (rng.random(), rng.random(), rng.random(), 1.0)
        bg = (rng.random(), rng.random(), rng.random(), 1.0)
        assert contrast_ratio(fg, bg) == pytest.approx(_oracle_ratio(fg, bg), abs=1e-9)


def test_contrast_symmetric_and_bounded():
    rng = random.Random(99)
    for _ in range(500):
        fg = (rng.random(), rng.random(), rng.random(), 1.0)
        bg = (rng.random(), rng.random(), rng.random(), 1.0)
        forward = contrast_ratio(fg, bg)
        assert forward == contrast_ratio(bg, fg)
        assert 1.0 <= forward <= 21.0


def test_alpha_over_hand_computed():
    # c = a*alpha + b*(1-alpha): half-red over white -> (1, 0.5, 0.5)
    out = alpha_over((1.0, 0.0, 0.0, 0.5), (1.0, 1.0, 1.0, 1.0))
    assert out == pytest.approx((1.0, 0.5, 0.5, 1.0))


def test_alpha_over_opaque_top_wins():
    out = alpha_over((0.2, 0.3, 0.4, 1.0), (0.9, 0.9, 0.9, 1.0))
    assert out == pytest.approx((0.2, 0.3, 0.4, 1.0))


def test_luminance_monotone_in_gray():
    grays = [relative_luminance((g / 20, g / 20, g / 20, 1.0)) for g in range(21)]
    assert grays == sorted(grays)
