"""Auxiliary SVG contexts that steer a derendering backend.

Three context kinds exist, mirroring the three ways a model can be
prompted: a *skeleton* (structure only, every attribute a placeholder),
a *partial* (concrete bounding boxes from a detector, placeholder styles
and content) and an *initial* (a complete prior prediction to refine).
"""

from __future__ import annotations

import json
from dataclasses import dataclass
from enum import Enum
from pathlib import Path
from .errors import InvalidDetection, InvariantViolation
from .model import (
    UNKNOWN,
    BBox,
    BackgroundAsset,
    ImageAsset,
    SlideDoc,
    TextAsset,
    TextStyle,
    Violation,
    has_unknown,
    reading_order,
    validate,
)
from .svgio import serialize_slide_svg

PROMPT_PREFIX = "De-render this raster image: <image>. You may find the provided SVG template useful: "

#: marker the backend replaces with the raster attachment
IMAGE_TOKEN = "<image>"

DEFAULT_CONFIDENCE_THRESHOLD = 0.25


class ContextKind(str, Enum):
    SKELETON = "skeleton"
    PARTIAL = "partial"
    INITIAL = "initial"


@dataclass(frozen=True)
class AuxContext:
    """An SVG context string plus where it came from."""

    kind: ContextKind
    svg_text: str
    source: str = ""


@dataclass(frozen=True)
class Detection:
    cls: str  # "image" | "text"
    bbox: BBox
    confidence: float


@dataclass(frozen=True)
class DetectionSet:
    boxes: tuple[Detection, ...] = ()

    def __post_init__(self):
        object.__setattr__(self, "boxes", tuple(self.boxes))
        for box in self.boxes:
            if not 0.0 <= box.confidence <= 1.0:
                raise InvalidDetection(f"confidence {box.confidence} outside [0, 1]")
            if box.cls not in ("image", "text"):
                raise InvalidDetection(f"unknown detection class {box.cls!r}")

    def kept(self, threshold: float = DEFAULT_CONFIDENCE_THRESHOLD) -> list[Detection]:
        return [b for b in self.boxes if b.confidence >= threshold]


def load_detections(path: str | Path) -> dict[str, DetectionSet]:
    """Read detector output: one JSON object per line, percent coordinates.

    Format: ``{"image_path": ..., "boxes": [{"cls", "x", "y", "w", "h", "conf"}]}``.
    """
    out: dict[str, DetectionSet] = {}
    for line in Path(path).read_text(encoding="utf-8").splitlines():
        line = line.strip()
        if not line:
            continue
        record = json.loads(line)
        boxes = tuple(
            Detection(
                cls=b["cls"],
                bbox=BBox(b["x"], b["y"], b["w"], b["h"]),
                confidence=float(b.get("conf", 1.0)),
            )
            for b in record.get("boxes", [])
        )
        out[record["image_path"]] = DetectionSet(boxes=boxes)
    return out


def _skeleton_text_style() -> TextStyle:
    # font-size is deliberately absent in skeletons; all other keys are placeholders.
    return TextStyle(
        font_family=UNKNOWN,
        letter_spacing=UNKNOWN,
        font_weight=UNKNOWN,
        color=UNKNOWN,
        text_align=UNKNOWN,
    )


def _partial_text_style() -> TextStyle:
    return TextStyle(
        font_family=UNKNOWN,
        font_size=UNKNOWN,
        letter_spacing=UNKNOWN,
        font_weight=UNKNOWN,
        color=UNKNOWN,
        text_align=UNKNOWN,
    )


def build_skeleton(n_images: int, n_texts: int, canvas: tuple[int, int], source: str = "") -> AuxContext:
    """Bare-bones structure: the right number of elements, every field UNKNOWN."""
    if n_images < 0 or n_texts < 0:
        raise ValueError("asset counts must be non-negative")
    width, height = canvas
    doc = SlideDoc(
        width=width,
        height=height,
        background=BackgroundAsset(),
        images=tuple(ImageAsset(bbox=UNKNOWN, href="image.png") for _ in range(n_images)),
        texts=tuple(
            TextAsset(bbox=UNKNOWN, style=_skeleton_text_style(), lines=("UNKNOWN",))
            for _ in range(n_texts)
        ),
    )
    return AuxContext(kind=ContextKind.SKELETON, svg_text=serialize_slide_svg(doc), source=source)


def _clamp_to_canvas(bbox: BBox) -> BBox | None:
    x = min(max(bbox.x, 0.0), 100.0)
    y = min(max(bbox.y, 0.0), 100.0)
    x2 = min(max(bbox.x2, 0.0), 100.0)
    y2 = min(max(bbox.y2, 0.0), 100.0)
    if x2 - x <= 0 or y2 - y <= 0:
        return None
    return BBox(x, y, x2 - x, y2 - y)


def build_partial(
    det: DetectionSet,
    canvas: tuple[int, int],
    conf_threshold: float = DEFAULT_CONFIDENCE_THRESHOLD,
    clamp: bool = True,
    source: str = "",
) -> AuxContext:
    """Layout-only template: detector boxes in reading order, styles UNKNOWN.

    Boxes reaching past the canvas are clamped back inside by default;
    with ``clamp=False`` they raise :class:`InvalidDetection` instead.
    """
    width, height = canvas
    kept = reading_order(det.kept(conf_threshold))
    images: list[ImageAsset] = []
    texts: list[TextAsset] = []
    for detection in kept:
        bbox = detection.bbox
        out_of_canvas = bbox.x < 0 or bbox.y < 0 or bbox.x2 > 100 or bbox.y2 > 100
        if out_of_canvas:
            clamped = _clamp_to_canvas(bbox) if clamp else None
            if clamped is None:
                raise InvalidDetection(f"{detection.cls} box {bbox} outside [0, 100]")
            bbox = clamped
        if detection.cls == "image":
            images.append(ImageAsset(bbox=bbox, href=f"image_{len(images) + 1}.png"))
        else:
            texts.append(TextAsset(bbox=bbox, style=_partial_text_style(), lines=("UNKNOWN",)))
    doc = SlideDoc(
        width=width,
        height=height,
        background=BackgroundAsset(),
        images=tuple(images),
        texts=tuple(texts),
    )
    return AuxContext(kind=ContextKind.PARTIAL, svg_text=serialize_slide_svg(doc), source=source)


def build_refinement_context(prior: SlideDoc, source: str = "") -> AuxContext:
    """Wrap a complete prior prediction so the model can polish it."""
    violations = validate(prior)
    if violations:
        raise InvariantViolation(violations)
    if has_unknown(prior):
        raise InvariantViolation([Violation("doc", "initial context must carry no UNKNOWN markers")])
    return AuxContext(kind=ContextKind.INITIAL, svg_text=serialize_slide_svg(prior), source=source)


def build_prompt(ctx: AuxContext) -> str:
    """Instruction text sent to the backend; ``<image>`` marks the raster slot."""
    return PROMPT_PREFIX + ctx.svg_text
