"""Raster utilities: PNG I/O, resizing, cropping, compositing, MSE.

Rasters are ``numpy`` arrays of shape ``(height, width, 3)``, dtype
``uint8``, RGB. Masks are boolean arrays of shape ``(height, width)``
where True marks pixels to inpaint.
"""

from __future__ import annotations

import io
import shlex
import subprocess
from decimal import ROUND_HALF_UP, Decimal
from pathlib import Path

import numpy as np
from PIL import Image

from .errors import EmptyCrop, InvariantViolation, MissingAsset, RenderError, ShapeMismatch
from .model import UNKNOWN, BBox, SlideDoc, Violation

Raster = np.ndarray
Mask = np.ndarray


def as_raster(array: np.ndarray) -> Raster:
    """Validate/convert an array into the (H, W, 3) uint8 contract."""
    arr = np.asarray(array)
    if arr.ndim == 2:
        arr = np.stack([arr] * 3, axis=-1)
    if arr.ndim != 3 or arr.shape[2] != 3:
        raise ShapeMismatch(f"expected (H, W, 3) raster, got shape {arr.shape}")
    if arr.dtype != np.uint8:
        arr = np.clip(np.rint(arr), 0, 255).astype(np.uint8)
    return arr


def load_png(path: str | Path) -> Raster:
    """Read an image file as 8-bit RGB; alpha is flattened over white."""
    with Image.open(path) as im:
        return load_png_image(im)


def save_png(img: Raster, path: str | Path) -> None:
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    Image.fromarray(as_raster(img), mode="RGB").save(path, format="PNG")


def encode_png(img: Raster) -> bytes:
    buf = io.BytesIO()
    Image.fromarray(as_raster(img), mode="RGB").save(buf, format="PNG")
    return buf.getvalue()


def decode_image(data: bytes) -> Raster:
    with Image.open(io.BytesIO(data)) as im:
        return load_png_image(im)


def load_png_image(im: Image.Image) -> Raster:
    if im.mode in ("RGBA", "LA") or (im.mode == "P" and "transparency" in im.info):
        rgba = im.convert("RGBA")
        background = Image.new("RGBA", rgba.size, (255, 255, 255, 255))
        im = Image.alpha_composite(background, rgba).convert("RGB")
    else:
        im = im.convert("RGB")
    return np.asarray(im, dtype=np.uint8)


def resize_max_side(img: Raster, max_side: int = 1024) -> Raster:
    """Downscale so the longer side is at most ``max_side`` (bilinear).

    Images already within the limit are returned unchanged, which makes
    the operation idempotent.
    """
    if max_side < 1:
        raise ValueError("max_side must be >= 1")
    img = as_raster(img)
    h, w = img.shape[:2]
    longer = max(h, w)
    if longer <= max_side:
        return img
    scale = max_side / longer
    new_w = max(1, round(w * scale))
    new_h = max(1, round(h * scale))
    resized = Image.fromarray(img).resize((new_w, new_h), Image.BILINEAR)
    return np.asarray(resized, dtype=np.uint8)


def _half_up(value: float) -> int:
    return int(Decimal(repr(float(value))).quantize(Decimal("1"), rounding=ROUND_HALF_UP))


def bbox_to_rect(box: BBox, width: int, height: int) -> tuple[int, int, int, int]:
    """Percent box to half-open pixel rect (x0, y0, x1, y1), unclamped.

    Edges are computed from the box's left/top and right/bottom percent
    positions with half-up rounding, so adjacent percent boxes map to
    adjacent pixel rects without gaps or overlap.
    """
    x0 = _half_up(box.x / 100.0 * width)
    y0 = _half_up(box.y / 100.0 * height)
    x1 = _half_up(box.x2 / 100.0 * width)
    y1 = _half_up(box.y2 / 100.0 * height)
    return x0, y0, x1, y1


def clamp_rect(rect: tuple[int, int, int, int], width: int, height: int) -> tuple[int, int, int, int]:
    x0, y0, x1, y1 = rect
    return max(x0, 0), max(y0, 0), min(x1, width), min(y1, height)


def crop_region(img: Raster, box: BBox) -> Raster:
    """Cut the sub-image covered by a percent box, clamped to bounds."""
    img = as_raster(img)
    h, w = img.shape[:2]
    x0, y0, x1, y1 = clamp_rect(bbox_to_rect(box, w, h), w, h)
    if x1 <= x0 or y1 <= y0:
        raise EmptyCrop(f"box {box} clamps to zero area on {w}x{h}")
    return img[y0:y1, x0:x1].copy()


def _scale_nearest(img: Raster, new_w: int, new_h: int) -> Raster:
    h, w = img.shape[:2]
    if (w, h) == (new_w, new_h):
        return img
    rows = np.minimum((np.arange(new_h) * h) // new_h, h - 1)
    cols = np.minimum((np.arange(new_w) * w) // new_w, w - 1)
    return img[rows][:, cols]


def composite_render(doc: SlideDoc, assets: dict[str, Raster]) -> Raster:
    """Deterministic internal renderer: paint background, images, then text.

    Text is drawn as solid line boxes (one ``font_size``-tall bar per line,
    stacked from the bbox top) rather than glyphs; glyph-accurate output
    belongs to the external renderer adapter.
    """
    if doc.width <= 0 or doc.height <= 0:
        raise InvariantViolation([Violation("canvas", "width and height > 0")])
    canvas = np.zeros((doc.height, doc.width, 3), dtype=np.uint8)

    def fetch(href: str) -> Raster:
        if href not in assets:
            raise MissingAsset(f"no raster supplied for href {href!r}")
        return as_raster(assets[href])

    background = fetch(doc.background.href)
    canvas[:, :] = _scale_nearest(background, doc.width, doc.height)

    for img in doc.images:
        if img.bbox is UNKNOWN:
            raise InvariantViolation([Violation("images", "cannot render UNKNOWN bbox")])
        rect = clamp_rect(bbox_to_rect(img.bbox, doc.width, doc.height), doc.width, doc.height)
        x0, y0, x1, y1 = rect
        if x1 <= x0 or y1 <= y0:
            continue
        full = bbox_to_rect(img.bbox, doc.width, doc.height)
        scaled = _scale_nearest(fetch(img.href), full[2] - full[0], full[3] - full[1])
        canvas[y0:y1, x0:x1] = scaled[y0 - full[1] : y1 - full[1], x0 - full[0] : x1 - full[0]]

    for txt in doc.texts:
        if txt.bbox is UNKNOWN or not isinstance(txt.style.font_size, int) or not isinstance(
            txt.style.color, str
        ):
            raise InvariantViolation(
                [Violation("texts", "rendering needs concrete bbox, font_size and color")]
            )
        color = np.array(
            [int(txt.style.color[i : i + 2], 16) for i in (1, 3, 5)], dtype=np.uint8
        )
        x0, y0, x1, y1 = bbox_to_rect(txt.bbox, doc.width, doc.height)
        line_h = txt.style.font_size
        for i in range(len(txt.lines)):
            ly0 = y0 + i * line_h
            ly1 = ly0 + line_h
            cx0, cy0, cx1, cy1 = clamp_rect((x0, ly0, x1, ly1), doc.width, doc.height)
            if cx1 > cx0 and cy1 > cy0:
                canvas[cy0:cy1, cx0:cx1] = color
    return canvas


def mse(a: Raster, b: Raster) -> float:
    """Mean squared pixel error on the 0..255 scale."""
    a, b = as_raster(a), as_raster(b)
    if a.shape != b.shape:
        raise ShapeMismatch(f"shape mismatch {a.shape} vs {b.shape}")
    diff = a.astype(np.float64) - b.astype(np.float64)
    return float(np.mean(diff * diff))


def render_with_external(
    command: str, svg_path: str | Path, out_path: str | Path, width: int, height: int
) -> None:
    """Invoke the configured renderer: ``<cmd> <in.svg> <out.png> <w> <h>``."""
    argv = shlex.split(command) + [str(svg_path), str(out_path), str(width), str(height)]
    try:
        proc = subprocess.run(argv, capture_output=True, text=True, timeout=120)
    except OSError as exc:
        raise RenderError(f"renderer failed to start: {exc}") from exc
    except subprocess.TimeoutExpired as exc:
        raise RenderError(f"renderer timed out: {command}") from exc
    if proc.returncode != 0:
        raise RenderError(f"renderer exited {proc.returncode}: {proc.stderr.strip()[:500]}")
