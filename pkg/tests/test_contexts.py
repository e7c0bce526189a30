"""Context builder and prompt tests."""

import random

import pytest

from slidekit.contexts import (
    PROMPT_PREFIX,
    AuxContext,
    ContextKind,
    Detection,
    DetectionSet,
    build_partial,
    build_prompt,
    build_refinement_context,
    build_skeleton,
)
from slidekit.errors import InvalidDetection, InvariantViolation
from slidekit.model import UNKNOWN, BBox, has_unknown
from slidekit.svgio import parse_slide_svg

from gen import rand_doc

# one skeleton image carries 4 placeholders (x/y/w/h); one skeleton text
# carries 10 (4 spatial + 5 style keys + content)
UNKNOWNS_PER_IMAGE = 4
UNKNOWNS_PER_TEXT = 10


class TestSkeleton:
    def test_single_asset_shape(self):
        ctx = build_skeleton(1, 1, (792, 612))
        assert ctx.kind is ContextKind.SKELETON
        assert 'width="792" height="612"' in ctx.svg_text
        assert 'x="UNKNOWN" y="UNKNOWN" width="UNKNOWN" height="UNKNOWN"' in ctx.svg_text
        assert "font-family: UNKNOWN" in ctx.svg_text
        assert "font-size" not in ctx.svg_text
        doc = parse_slide_svg(ctx.svg_text)
        assert doc.images[0].bbox is UNKNOWN
        assert doc.texts[0].lines == ("UNKNOWN",)

    def test_empty_skeleton(self):
        ctx = build_skeleton(0, 0, (720, 405))
        doc = parse_slide_svg(ctx.svg_text)
        assert doc.n_images == 0 and doc.n_texts == 0

    def test_no_numeric_coordinates(self):
        ctx = build_skeleton(2, 3, (720, 405))
        body = ctx.svg_text.split("\n", 2)[2]  # skip root + background lines
        assert "%" not in body

    def test_placeholder_counts_random(self):
        rng = random.Random(11)
        for _ in range(20):
            k, m = rng.randint(0, 8), rng.randint(0, 31)
            ctx = build_skeleton(k, m, (720, 405))
            doc = parse_slide_svg(ctx.svg_text)
            assert doc.n_images == k and doc.n_texts == m
            expected = UNKNOWNS_PER_IMAGE * k + UNKNOWNS_PER_TEXT * m
            assert ctx.svg_text.count("UNKNOWN") == expected


def det(cls, x, y, w, h, conf=0.9):
    return Detection(cls=cls, bbox=BBox(x, y, w, h), confidence=conf)


class TestPartial:
    def test_shapes_and_unknown_styles(self):
        ds = DetectionSet(boxes=(det("image", 35.3, 20.0, 30.0, 40.0), det("text", 1.8, 2.0, 45.0, 8.0)))
        ctx = build_partial(ds, (720, 405))
        assert ctx.kind is ContextKind.PARTIAL
        assert 'x="35.3%"' in ctx.svg_text
        assert "font-family: UNKNOWN; font-size: UNKNOWN" in ctx.svg_text
        doc = parse_slide_svg(ctx.svg_text)
        assert doc.images[0].bbox == BBox(35.3, 20.0, 30.0, 40.0)
        assert doc.texts[0].style.font_size is UNKNOWN
        assert doc.texts[0].lines == ("UNKNOWN",)

    def test_empty_detections(self):
        ctx = build_partial(DetectionSet(), (720, 405))
        doc = parse_slide_svg(ctx.svg_text)
        assert doc.n_images == 0 and doc.n_texts == 0

    def test_confidence_threshold(self):
        rng = random.Random(3)
        boxes = tuple(
            det(rng.choice(["image", "text"]), 10, 10, 20, 20, conf=rng.random()) for _ in range(40)
        )
        ds = DetectionSet(boxes=boxes)
        ctx = build_partial(ds, (720, 405), conf_threshold=0.25)
        doc = parse_slide_svg(ctx.svg_text)
        kept = [b for b in boxes if b.confidence >= 0.25]
        assert doc.n_images + doc.n_texts == len(kept)

    def test_reading_order(self):
        ds = DetectionSet(
            boxes=(
                det("text", 50.0, 50.0, 10.0, 10.0),
                det("text", 5.0, 5.0, 10.0, 10.0),
                det("text", 40.0, 5.0, 10.0, 10.0),
            )
        )
        doc = parse_slide_svg(build_partial(ds, (720, 405)).svg_text)
        origins = [(t.bbox.y, t.bbox.x) for t in doc.texts]
        assert origins == sorted(origins)

    def test_clamping_default_and_error_when_disabled(self):
        ds = DetectionSet(boxes=(det("image", 95.0, 10.0, 10.0, 10.0),))
        doc = parse_slide_svg(build_partial(ds, (720, 405)).svg_text)
        assert doc.images[0].bbox == BBox(95.0, 10.0, 5.0, 10.0)
        with pytest.raises(InvalidDetection):
            build_partial(ds, (720, 405), clamp=False)

    def test_fully_outside_box_rejected(self):
        ds = DetectionSet(boxes=(det("image", 120.0, 10.0, 10.0, 10.0),))
        with pytest.raises(InvalidDetection):
            build_partial(ds, (720, 405))

    def test_bbox_matches_detection_to_tenth(self):
        rng = random.Random(8)
        for _ in range(20):
            x, y = rng.uniform(0, 80), rng.uniform(0, 80)
            w, h = rng.uniform(1, 100 - x), rng.uniform(1, 100 - y)
            ds = DetectionSet(boxes=(det("image", x, y, w, h),))
            doc = parse_slide_svg(build_partial(ds, (720, 405)).svg_text)
            bbox = doc.images[0].bbox
            assert abs(bbox.x - x) <= 0.05 + 1e-9
            assert abs(bbox.y - y) <= 0.05 + 1e-9


class TestRefinement:
    def test_valid_prior_round_trips(self):
        doc = rand_doc(random.Random(21))
        ctx = build_refinement_context(doc)
        assert ctx.kind is ContextKind.INITIAL
        assert parse_slide_svg(ctx.svg_text) == doc

    def test_unknown_marker_rejected(self):
        doc = parse_slide_svg(build_skeleton(1, 1, (720, 405)).svg_text)
        assert has_unknown(doc)
        with pytest.raises(InvariantViolation):
            build_refinement_context(doc)


class TestPrompt:
    def test_prefix_and_image_token(self):
        ctx = build_skeleton(1, 1, (720, 405))
        prompt = build_prompt(ctx)
        assert prompt.startswith("De-render this raster image: <image>.")
        assert prompt == PROMPT_PREFIX + ctx.svg_text

    def test_empty_context_text(self):
        prompt = build_prompt(AuxContext(kind=ContextKind.SKELETON, svg_text=""))
        assert prompt == PROMPT_PREFIX

    def test_containment_property(self):
        rng = random.Random(17)
        for _ in range(20):
            ctx = build_refinement_context(rand_doc(rng))
            assert ctx.svg_text in build_prompt(ctx)
