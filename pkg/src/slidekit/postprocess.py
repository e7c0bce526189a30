"""Post-processing: occlusion resolution, background isolation, asset export.

Z-order follows document paint order: later image assets and all text
assets occlude earlier image assets. Occluded regions of a lower asset are
inpainted inside its crop; the occluder keeps its authentic pixels.
"""

from __future__ import annotations

import json
from dataclasses import dataclass
from pathlib import Path

import numpy as np

from .errors import InvariantViolation
from .inpaint import DEFAULT_RADIUS, telea_inpaint
from .model import UNKNOWN, BackgroundAsset, ImageAsset, SlideDoc, Violation
from .raster import Raster, bbox_to_rect, clamp_rect, crop_region, save_png
from .svgio import serialize_slide_svg


@dataclass(frozen=True)
class ExtractionBundle:
    final_svg: str
    background_file: str
    asset_files: tuple[str, ...]
    out_dir: Path


def _pixel_rects(doc: SlideDoc, width: int, height: int):
    """Clamped pixel rects for image assets and text assets, in paint order."""
    image_rects = []
    for i, img in enumerate(doc.images):
        if img.bbox is UNKNOWN:
            raise InvariantViolation([Violation(f"images[{i}]", "bbox must be concrete")])
        image_rects.append(clamp_rect(bbox_to_rect(img.bbox, width, height), width, height))
    text_rects = []
    for i, txt in enumerate(doc.texts):
        if txt.bbox is UNKNOWN:
            raise InvariantViolation([Violation(f"texts[{i}]", "bbox must be concrete")])
        text_rects.append(clamp_rect(bbox_to_rect(txt.bbox, width, height), width, height))
    return image_rects, text_rects


def resolve_overlaps(raster: Raster, doc: SlideDoc, radius: int = DEFAULT_RADIUS) -> dict[str, Raster]:
    """Crop each image asset; inpaint parts hidden by higher-z assets.

    Returns ``href -> crop`` in document order. Assets nobody overlaps are
    plain crops.
    """
    h, w = raster.shape[:2]
    image_rects, text_rects = _pixel_rects(doc, w, h)
    out: dict[str, Raster] = {}
    for i, img in enumerate(doc.images):
        crop = crop_region(raster, img.bbox)
        x0, y0, x1, y1 = image_rects[i]
        occluders = image_rects[i + 1 :] + text_rects
        mask = np.zeros(crop.shape[:2], dtype=bool)
        for ox0, oy0, ox1, oy1 in occluders:
            ix0, iy0 = max(x0, ox0), max(y0, oy0)
            ix1, iy1 = min(x1, ox1), min(y1, oy1)
            if ix1 > ix0 and iy1 > iy0:
                mask[iy0 - y0 : iy1 - y0, ix0 - x0 : ix1 - x0] = True
        out[img.href] = telea_inpaint(crop, mask, radius) if mask.any() else crop
    return out


def foreground_mask(raster: Raster, doc: SlideDoc) -> np.ndarray:
    """Union of all image and text bbox rects as a pixel mask."""
    h, w = raster.shape[:2]
    image_rects, text_rects = _pixel_rects(doc, w, h)
    mask = np.zeros((h, w), dtype=bool)
    for x0, y0, x1, y1 in image_rects + text_rects:
        mask[y0:y1, x0:x1] = True
    return mask


def extract_background(raster: Raster, doc: SlideDoc, radius: int = DEFAULT_RADIUS) -> Raster:
    """Mask out every foreground asset and inpaint the holes."""
    mask = foreground_mask(raster, doc)
    return telea_inpaint(raster, mask, radius)


def extract_assets(
    raster: Raster, doc: SlideDoc, out_dir: str | Path, radius: int = DEFAULT_RADIUS
) -> ExtractionBundle:
    """Write background.png and image_1..image_k.png; rewrite hrefs to match.

    File writes are sequential in document order and byte-deterministic,
    so re-running extraction reproduces identical outputs.
    """
    out_dir = Path(out_dir)
    out_dir.mkdir(parents=True, exist_ok=True)

    background = extract_background(raster, doc, radius)
    crops = resolve_overlaps(raster, doc, radius)

    background_file = "background.png"
    save_png(background, out_dir / background_file)

    asset_files: list[str] = []
    new_images: list[ImageAsset] = []
    for k, img in enumerate(doc.images, start=1):
        filename = f"image_{k}.png"
        save_png(crops[img.href], out_dir / filename)
        asset_files.append(filename)
        new_images.append(ImageAsset(bbox=img.bbox, href=filename))

    rewritten = doc.with_assets(images=new_images, background=BackgroundAsset(background_file))
    final_svg = serialize_slide_svg(rewritten)
    return ExtractionBundle(
        final_svg=final_svg,
        background_file=background_file,
        asset_files=tuple(asset_files),
        out_dir=out_dir,
    )


def write_slide_outputs(
    raster: Raster,
    doc: SlideDoc,
    out_dir: str | Path,
    radius: int = DEFAULT_RADIUS,
    metadata: dict | None = None,
) -> ExtractionBundle:
    """Full per-slide output directory: slide.svg, PNGs and manifest.json."""
    out_dir = Path(out_dir)
    bundle = extract_assets(raster, doc, out_dir, radius)
    (out_dir / "slide.svg").write_text(bundle.final_svg, encoding="utf-8")
    manifest = {
        "background": bundle.background_file,
        "assets": list(bundle.asset_files),
        "boxes": {
            f"image_{k + 1}.png": [img.bbox.x, img.bbox.y, img.bbox.w, img.bbox.h]
            for k, img in enumerate(doc.images)
        },
        "n_texts": doc.n_texts,
    }
    if metadata:
        manifest.update(metadata)
    (out_dir / "manifest.json").write_text(
        json.dumps(manifest, indent=2, sort_keys=True) + "\n", encoding="utf-8"
    )
    return bundle
