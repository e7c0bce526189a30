"""Seeded random generators shared across the test suite."""

from __future__ import annotations

import random
import string

import numpy as np

from slidekit.model import BBox, BackgroundAsset, ImageAsset, SlideDoc, TextAsset, TextStyle
from slidekit.raster import composite_render

FONTS = ["Inter", "Arial", "Roboto", "Open Sans", "Courier New", "Georgia"]
WEIGHTS = ["normal", "bold", 400, 700, None]
ALIGNS = ["left", "center", "right", None]
LINE_CHARS = string.ascii_letters + string.digits + " .,:;!?&'\"()-_éü€"


def rand_1dec(rng: random.Random, lo: float, hi: float) -> float:
    return rng.randint(int(lo * 10), int(hi * 10)) / 10.0


def rand_bbox_within_canvas(rng: random.Random, min_side: float = 0.5) -> BBox:
    x = rand_1dec(rng, 0, 100 - min_side)
    y = rand_1dec(rng, 0, 100 - min_side)
    w = rand_1dec(rng, min_side, 100 - x)
    h = rand_1dec(rng, min_side, 100 - y)
    return BBox(x, y, w, h)


def rand_line(rng: random.Random) -> str:
    n = rng.randint(1, 30)
    line = "".join(rng.choice(LINE_CHARS) for _ in range(n)).strip()
    return line or "x"


def rand_style(rng: random.Random) -> TextStyle:
    extras = ()
    if rng.random() < 0.2:
        extras = (("line-height", f"{rng.randint(10, 20) / 10}"),)
    return TextStyle(
        font_family=rng.choice(FONTS),
        font_size=rng.randint(8, 72) if rng.random() < 0.9 else None,
        letter_spacing=rng.randint(-5, 20) / 100.0,
        font_weight=rng.choice(WEIGHTS),
        color="#%06x" % rng.randint(0, 0xFFFFFF),
        text_align=rng.choice(ALIGNS),
        extras=extras,
    )


def rand_renderable_style(rng: random.Random) -> TextStyle:
    """Like rand_style but always concrete enough for the compositor."""
    return TextStyle(
        font_family=rng.choice(FONTS),
        font_size=rng.randint(8, 24),
        letter_spacing=0.0,
        font_weight=rng.choice(["normal", "bold"]),
        color="#%06x" % rng.randint(0, 0xFFFFFF),
        text_align=rng.choice(["left", "center", "right"]),
    )


def rand_doc(rng: random.Random, max_images: int = 6, max_texts: int = 8) -> SlideDoc:
    """A random canonical document: in-canvas boxes, unique hrefs, clean styles."""
    n_images = rng.randint(0, max_images)
    n_texts = rng.randint(0, max_texts)
    images = tuple(
        ImageAsset(bbox=rand_bbox_within_canvas(rng), href=f"image_{k + 1}.png")
        for k in range(n_images)
    )
    texts = tuple(
        TextAsset(
            bbox=rand_bbox_within_canvas(rng),
            style=rand_style(rng),
            lines=tuple(rand_line(rng) for _ in range(rng.randint(1, 4))),
        )
        for _ in range(n_texts)
    )
    return SlideDoc(
        width=rng.randint(320, 1024),
        height=rng.randint(240, 1024),
        background=BackgroundAsset(href="background.png"),
        images=images,
        texts=texts,
    )


def disjoint_bboxes(rng: random.Random, count: int, max_tries: int = 400) -> list[BBox]:
    """Up to ``count`` pairwise-disjoint boxes; may return fewer if crowded."""
    boxes: list[BBox] = []
    tries = 0
    while len(boxes) < count and tries < max_tries:
        tries += 1
        w = rand_1dec(rng, 8, 30)
        h = rand_1dec(rng, 8, 30)
        x = rand_1dec(rng, 0, 100 - w)
        y = rand_1dec(rng, 0, 100 - h)
        candidate = BBox(x, y, w, h)
        if not any(candidate.intersects(b) for b in boxes):
            boxes.append(candidate)
    return boxes


def rand_scene(
    rng: random.Random,
    width: int = 200,
    height: int = 150,
    n_images: tuple[int, int] = (1, 2),
    n_texts: tuple[int, int] = (1, 3),
):
    """A renderable slide: solid background, disjoint assets, concrete styles.

    Returns (doc, assets, raster) where raster = composite_render(doc, assets).
    """
    while True:
        k_img = rng.randint(*n_images)
        k_txt = rng.randint(*n_texts)
        boxes = disjoint_bboxes(rng, k_img + k_txt)
        if len(boxes) == k_img + k_txt:
            break
    images = tuple(
        ImageAsset(bbox=b, href=f"image_{i + 1}.png") for i, b in enumerate(boxes[:k_img])
    )
    texts = tuple(
        TextAsset(
            bbox=b,
            style=rand_renderable_style(rng),
            lines=tuple(rand_line(rng) for _ in range(rng.randint(1, 2))),
        )
        for b in boxes[k_img:]
    )
    doc = SlideDoc(
        width=width,
        height=height,
        background=BackgroundAsset("background.png"),
        images=images,
        texts=texts,
    )
    bg_color = [rng.randint(0, 255) for _ in range(3)]
    assets = {"background.png": np.full((height, width, 3), bg_color, dtype=np.uint8)}
    np_rng = np.random.default_rng(rng.randint(0, 2**31))
    for asset in images:
        assets[asset.href] = np_rng.integers(0, 256, (24, 24, 3), dtype=np.uint8)
    raster = composite_render(doc, assets)
    return doc, assets, raster
