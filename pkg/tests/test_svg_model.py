"""Document model and SVG dialect round-trip tests."""

import random

import pytest

from slidekit.errors import InvariantViolation, MalformedSvg, MissingCanvas, UnsupportedElement
from slidekit.model import (
    UNKNOWN,
    BBox,
    ImageAsset,
    SlideDoc,
    TextAsset,
    TextStyle,
    has_unknown,
    validate,
)
from slidekit.svgio import parse_slide_svg, serialize_slide_svg

from gen import rand_doc

LISTING_INITIAL = """\
<svg xmlns="http://www.w3.org/2000/svg" xmlns:xlink="http://www.w3.org/1999/xlink" width="720" height="405" fill="white">
  <image x="0.0%" y="0.0%" width="100.0%" height="100.0%" href="background.png" />
  <g id="images">
    <image x="35.3%" y="12.0%" width="40.0%" height="55.0%" href="image_1.png" />
  </g>
  <g id="text">
    <foreignObject x="1.8%" y="2.0%" width="45.0%" height="10.0%" overflow="visible">
      <div xmlns="http://www.w3.org/1999/xhtml" style="font-family: Inter; font-size: 24px; letter-spacing: 0.0em; color: #000000; text-align: left;">
        <div>Quarterly Review</div>
      </div>
    </foreignObject>
  </g>
</svg>
"""


class TestParse:
    def test_initial_listing_shape(self):
        doc = parse_slide_svg(LISTING_INITIAL)
        assert doc.width == 720 and doc.height == 405
        assert doc.n_images == 1 and doc.n_texts == 1
        img = doc.images[0]
        assert img.bbox == BBox(35.3, 12.0, 40.0, 55.0)
        assert img.href == "image_1.png"
        txt = doc.texts[0]
        assert txt.style.font_family == "Inter"
        assert txt.style.font_size == 24
        assert txt.style.letter_spacing == 0.0
        assert txt.style.font_weight is None
        assert txt.style.color == "#000000"
        assert txt.style.text_align == "left"
        assert txt.lines == ("Quarterly Review",)

    def test_empty_groups(self):
        svg = (
            '<svg xmlns="http://www.w3.org/2000/svg" width="720" height="405">'
            '<g id="images"></g><g id="text"></g></svg>'
        )
        doc = parse_slide_svg(svg)
        assert doc.n_images == 0 and doc.n_texts == 0

    def test_unknown_markers_parse_to_sentinel(self):
        svg = (
            '<svg xmlns="http://www.w3.org/2000/svg" width="720" height="405">'
            '<g id="images"><image x="UNKNOWN" y="UNKNOWN" width="UNKNOWN" '
            'height="UNKNOWN" href="image.png" /></g><g id="text"></g></svg>'
        )
        doc = parse_slide_svg(svg)
        assert doc.images[0].bbox is UNKNOWN
        assert has_unknown(doc)

    def test_multiline_divs_and_empty_dropped(self):
        svg = (
            '<svg xmlns="http://www.w3.org/2000/svg" width="720" height="405">'
            '<g id="text"><foreignObject x="1.0%" y="1.0%" width="50.0%" height="20.0%">'
            '<div xmlns="http://www.w3.org/1999/xhtml" style="color: #112233;">'
            "<div>first</div><div>  </div><div>second</div></div>"
            "</foreignObject></g></svg>"
        )
        doc = parse_slide_svg(svg)
        assert doc.texts[0].lines == ("first", "second")

    def test_named_and_short_colors_canonicalized(self):
        svg = (
            '<svg xmlns="http://www.w3.org/2000/svg" width="720" height="405">'
            '<g id="text"><foreignObject x="1.0%" y="1.0%" width="50.0%" height="20.0%">'
            '<div xmlns="http://www.w3.org/1999/xhtml" style="color: blue;"><div>t</div></div>'
            "</foreignObject></g></svg>"
        )
        assert parse_slide_svg(svg).texts[0].style.color == "#0000ff"
        assert TextStyle(color="#AbC").color == "#aabbcc"

    def test_unknown_style_keys_preserved(self):
        svg = (
            '<svg xmlns="http://www.w3.org/2000/svg" width="720" height="405">'
            '<g id="text"><foreignObject x="1.0%" y="1.0%" width="50.0%" height="20.0%">'
            '<div xmlns="http://www.w3.org/1999/xhtml" '
            'style="font-family: Inter; line-height: 1.4; color: #000000;"><div>t</div></div>'
            "</foreignObject></g></svg>"
        )
        doc = parse_slide_svg(svg)
        assert doc.texts[0].style.extras == (("line-height", "1.4"),)
        out = serialize_slide_svg(doc)
        assert "line-height: 1.4" in out

    def test_malformed_markup(self):
        with pytest.raises(MalformedSvg):
            parse_slide_svg("<svg width='10' height='10'><g id='images'></svg>")

    def test_unsupported_element(self):
        svg = '<svg xmlns="http://www.w3.org/2000/svg" width="10" height="10"><rect /></svg>'
        with pytest.raises(UnsupportedElement) as exc:
            parse_slide_svg(svg)
        assert exc.value.element == "rect"

    def test_missing_canvas(self):
        with pytest.raises(MissingCanvas):
            parse_slide_svg('<svg xmlns="http://www.w3.org/2000/svg"></svg>')

    def test_pixel_units_detected(self):
        svg = (
            '<svg xmlns="http://www.w3.org/2000/svg" width="720" height="405">'
            '<g id="images"><image x="360" y="10" width="100" height="50" href="a.png" /></g>'
            '<g id="text"></g></svg>'
        )
        doc = parse_slide_svg(svg)
        assert doc.units == "px"
        assert doc.images[0].bbox == BBox(360, 10, 100, 50)

    def test_mixed_units_rejected(self):
        svg = (
            '<svg xmlns="http://www.w3.org/2000/svg" width="720" height="405">'
            '<g id="images"><image x="50.0%" y="10" width="100" height="50" href="a.png" /></g>'
            "</svg>"
        )
        with pytest.raises(MalformedSvg):
            parse_slide_svg(svg)


class TestSerialize:
    def test_percent_formatting_one_decimal(self):
        doc = SlideDoc(
            width=720,
            height=405,
            images=(ImageAsset(bbox=BBox(35.3, 10.0, 20.0, 20.0), href="image_1.png"),),
        )
        out = serialize_slide_svg(doc)
        assert 'x="35.3%"' in out

    def test_zero_assets_keeps_both_groups(self):
        out = serialize_slide_svg(SlideDoc(width=720, height=405))
        assert '<g id="images">' in out and '<g id="text">' in out

    def test_rejects_degenerate_box(self):
        doc = SlideDoc(
            width=720,
            height=405,
            images=(ImageAsset(bbox=BBox(0, 0, 0, 10), href="image_1.png"),),
        )
        with pytest.raises(InvariantViolation):
            serialize_slide_svg(doc)

    def test_out_of_canvas_tolerated(self):
        doc = SlideDoc(
            width=720,
            height=405,
            images=(ImageAsset(bbox=BBox(90.0, 90.0, 20.0, 20.0), href="image_1.png"),),
        )
        out = serialize_slide_svg(doc)
        assert 'width="20.0%"' in out
        assert any(not v.fatal for v in validate(doc))

    def test_escaping_round_trips(self):
        doc = SlideDoc(
            width=720,
            height=405,
            texts=(
                TextAsset(
                    bbox=BBox(0, 0, 50, 10),
                    style=TextStyle(color="#000000"),
                    lines=('R&D "alpha" <- not markup'.replace("<", "").replace(">", ""),),
                ),
            ),
        )
        assert parse_slide_svg(serialize_slide_svg(doc)) == doc


class TestValidate:
    def test_canonical_doc_clean(self):
        doc = rand_doc(random.Random(7))
        assert validate(doc) == []

    def test_zero_width_box_flagged(self):
        doc = SlideDoc(
            width=720,
            height=405,
            images=(ImageAsset(bbox=BBox(0, 0, 0, 10), href="image_1.png"),),
        )
        violations = validate(doc)
        assert any(v.path == "images[0].bbox.w" and v.rule == "w > 0" for v in violations)

    def test_duplicate_hrefs_flagged(self):
        doc = SlideDoc(
            width=720,
            height=405,
            images=(
                ImageAsset(bbox=BBox(0, 0, 10, 10), href="image_1.png"),
                ImageAsset(bbox=BBox(20, 20, 10, 10), href="image_1.png"),
            ),
        )
        assert any("unique hrefs" in v.rule for v in validate(doc))


class TestRoundTrip:
    def test_parse_serialize_identity_100_docs(self):
        rng = random.Random(2024)
        for _ in range(100):
            doc = rand_doc(rng)
            assert parse_slide_svg(serialize_slide_svg(doc)) == doc

    def test_serializer_fixpoint(self):
        rng = random.Random(99)
        for _ in range(50):
            s = serialize_slide_svg(rand_doc(rng))
            once = serialize_slide_svg(parse_slide_svg(s))
            twice = serialize_slide_svg(parse_slide_svg(once))
            assert once == twice == s

    def test_order_preserved(self):
        rng = random.Random(5)
        doc = rand_doc(rng, max_images=6, max_texts=6)
        round_tripped = parse_slide_svg(serialize_slide_svg(doc))
        assert [i.href for i in round_tripped.images] == [i.href for i in doc.images]
        assert [t.lines for t in round_tripped.texts] == [t.lines for t in doc.texts]

    def test_unknown_placeholders_survive(self):
        doc = SlideDoc(
            width=720,
            height=405,
            images=(ImageAsset(bbox=UNKNOWN, href="image.png"),),
            texts=(
                TextAsset(
                    bbox=UNKNOWN,
                    style=TextStyle(
                        font_family=UNKNOWN,
                        letter_spacing=UNKNOWN,
                        font_weight=UNKNOWN,
                        color=UNKNOWN,
                        text_align=UNKNOWN,
                    ),
                    lines=("UNKNOWN",),
                ),
            ),
        )
        out = serialize_slide_svg(doc)
        assert out.count("UNKNOWN") == 14
        assert parse_slide_svg(out) == doc
