"""Slide document model.

A slide is a fixed-size canvas with a full-bleed background image, an
ordered list of image assets and an ordered list of styled text assets.
Spatial attributes are percentages of the canvas, canonicalized to one
decimal digit. Attributes whose value is not known yet (template
placeholders) carry the :data:`UNKNOWN` sentinel instead of a concrete
value; absent optional attributes are ``None``.

All types are immutable values; building a modified document means
constructing a new one (see :func:`replace_assets` helpers on call sites).
"""

from __future__ import annotations

from dataclasses import dataclass, field, replace
from decimal import ROUND_HALF_UP, Decimal
from typing import Iterator, Sequence, Union


class _Unknown:
    """Singleton marker for the dialect's literal ``UNKNOWN`` placeholder."""

    _instance = None

    def __new__(cls):
        if cls._instance is None:
            cls._instance = super().__new__(cls)
        return cls._instance

    def __repr__(self) -> str:
        return "UNKNOWN"

    def __deepcopy__(self, memo):
        return self

    def __copy__(self):
        return self


UNKNOWN = _Unknown()
UnknownType = _Unknown

#: token used for placeholders in SVG text
UNKNOWN_TOKEN = "UNKNOWN"

RASTER_EXTENSIONS = (".png", ".jpg", ".jpeg", ".gif", ".bmp", ".webp")

TEXT_ALIGNMENTS = ("left", "center", "right")

# Basic CSS color keywords, enough to canonicalize hand-edited documents.
NAMED_COLORS = {
    "black": "#000000",
    "silver": "#c0c0c0",
    "gray": "#808080",
    "grey": "#808080",
    "white": "#ffffff",
    "maroon": "#800000",
    "red": "#ff0000",
    "purple": "#800080",
    "fuchsia": "#ff00ff",
    "magenta": "#ff00ff",
    "green": "#008000",
    "lime": "#00ff00",
    "olive": "#808000",
    "yellow": "#ffff00",
    "navy": "#000080",
    "blue": "#0000ff",
    "teal": "#008080",
    "aqua": "#00ffff",
    "cyan": "#00ffff",
    "orange": "#ffa500",
}


def round1(value: float) -> float:
    """Round to one decimal digit, halves away from zero; -0.0 becomes 0.0."""
    d = Decimal(repr(float(value))).quantize(Decimal("0.1"), rounding=ROUND_HALF_UP)
    f = float(d)
    return 0.0 if f == 0 else f


def round2(value: float) -> float:
    """Round to two decimal digits, halves away from zero."""
    d = Decimal(repr(float(value))).quantize(Decimal("0.01"), rounding=ROUND_HALF_UP)
    f = float(d)
    return 0.0 if f == 0 else f


def canonical_color(value: str) -> str | None:
    """Normalize a color to lowercase ``#rrggbb``; None if unrecognized."""
    v = value.strip().lower()
    if v in NAMED_COLORS:
        return NAMED_COLORS[v]
    if v.startswith("#"):
        digits = v[1:]
        if len(digits) == 3 and all(c in "0123456789abcdef" for c in digits):
            return "#" + "".join(c * 2 for c in digits)
        if len(digits) == 6 and all(c in "0123456789abcdef" for c in digits):
            return "#" + digits
    return None


@dataclass(frozen=True)
class BBox:
    """Rectangle in percent of the canvas; canonical to one decimal digit.

    ``x``/``y`` locate the top-left corner, ``w``/``h`` the extent. Values
    outside the canvas are representable (the parser keeps whatever a model
    produced); :func:`validate` reports them.
    """

    x: float
    y: float
    w: float
    h: float

    def __post_init__(self):
        object.__setattr__(self, "x", round1(self.x))
        object.__setattr__(self, "y", round1(self.y))
        object.__setattr__(self, "w", round1(self.w))
        object.__setattr__(self, "h", round1(self.h))

    @property
    def x2(self) -> float:
        return self.x + self.w

    @property
    def y2(self) -> float:
        return self.y + self.h

    @property
    def area(self) -> float:
        return max(self.w, 0.0) * max(self.h, 0.0)

    def intersects(self, other: "BBox") -> bool:
        """True when the rectangles share positive area (touching is not enough)."""
        return (
            min(self.x2, other.x2) > max(self.x, other.x)
            and min(self.y2, other.y2) > max(self.y, other.y)
        )

    def union_rect(self, other: "BBox") -> "BBox":
        x = min(self.x, other.x)
        y = min(self.y, other.y)
        return BBox(x, y, max(self.x2, other.x2) - x, max(self.y2, other.y2) - y)


FULL_CANVAS = BBox(0.0, 0.0, 100.0, 100.0)

StyleValue = Union[str, int, float, UnknownType, None]


@dataclass(frozen=True)
class TextStyle:
    """Style attributes of a text block.

    ``None`` means the key is absent from the ``style=`` string, the
    :data:`UNKNOWN` sentinel means it is present as a placeholder.
    Unrecognized keys are preserved verbatim in ``extras``.
    """

    font_family: str | UnknownType | None = None
    font_size: int | UnknownType | None = None
    letter_spacing: float | UnknownType | None = None
    font_weight: str | int | UnknownType | None = None
    color: str | UnknownType | None = None
    text_align: str | UnknownType | None = None
    extras: tuple[tuple[str, str], ...] = ()

    def __post_init__(self):
        if isinstance(self.letter_spacing, (int, float)) and not isinstance(self.letter_spacing, bool):
            object.__setattr__(self, "letter_spacing", round2(float(self.letter_spacing)))
        if isinstance(self.color, str):
            canon = canonical_color(self.color)
            if canon is not None:
                object.__setattr__(self, "color", canon)
        object.__setattr__(self, "extras", tuple((str(k), str(v)) for k, v in self.extras))


@dataclass(frozen=True)
class TextAsset:
    """A positioned block of text: one bbox, one style, one or more lines."""

    bbox: BBox | UnknownType
    style: TextStyle = field(default_factory=TextStyle)
    lines: tuple[str, ...] = ()

    def __post_init__(self):
        object.__setattr__(self, "lines", tuple(str(line) for line in self.lines))

    @property
    def text(self) -> str:
        return "\n".join(self.lines)


@dataclass(frozen=True)
class ImageAsset:
    """An image referenced by relative filename, placed by bbox."""

    bbox: BBox | UnknownType
    href: str


@dataclass(frozen=True)
class BackgroundAsset:
    """Background image; always stretches the full canvas."""

    href: str = "background.png"

    @property
    def bbox(self) -> BBox:
        return FULL_CANVAS


@dataclass(frozen=True)
class SlideDoc:
    """A complete slide document in parse/DOM order.

    ``units`` is ``"percent"`` for dialect documents; raw design exports
    parsed before normalization carry ``"px"`` and must go through
    ``dataset.normalize_coords`` before serialization.
    """

    width: int
    height: int
    background: BackgroundAsset = field(default_factory=BackgroundAsset)
    images: tuple[ImageAsset, ...] = ()
    texts: tuple[TextAsset, ...] = ()
    units: str = "percent"

    def __post_init__(self):
        object.__setattr__(self, "images", tuple(self.images))
        object.__setattr__(self, "texts", tuple(self.texts))

    @property
    def n_images(self) -> int:
        return len(self.images)

    @property
    def n_texts(self) -> int:
        return len(self.texts)

    def with_assets(
        self,
        images: Sequence[ImageAsset] | None = None,
        texts: Sequence[TextAsset] | None = None,
        background: BackgroundAsset | None = None,
    ) -> "SlideDoc":
        return replace(
            self,
            images=tuple(images) if images is not None else self.images,
            texts=tuple(texts) if texts is not None else self.texts,
            background=background if background is not None else self.background,
        )


@dataclass(frozen=True)
class Violation:
    """One failed invariant: where it happened and which rule broke.

    ``fatal`` rules make a document unserializable; non-fatal ones (boxes
    reaching past the canvas) are tolerated so model overshoot survives a
    parse/serialize round trip.
    """

    path: str
    rule: str
    fatal: bool = True

    def __str__(self) -> str:
        return f"{self.path}: {self.rule}"


def _check_bbox(path: str, bbox: BBox | UnknownType, out: list[Violation]) -> None:
    if bbox is UNKNOWN:
        return
    if bbox.w <= 0:
        out.append(Violation(f"{path}.w", "w > 0"))
    if bbox.h <= 0:
        out.append(Violation(f"{path}.h", "h > 0"))
    if bbox.x < 0 or bbox.x > 100 or bbox.y < 0 or bbox.y > 100:
        out.append(Violation(path, "origin within [0, 100]", fatal=False))
    if bbox.w > 0 and bbox.h > 0 and (bbox.x2 > 100 or bbox.y2 > 100):
        out.append(Violation(path, "box extends past canvas", fatal=False))


def validate(doc: SlideDoc) -> list[Violation]:
    """Check every type invariant; empty list iff the document is clean."""
    out: list[Violation] = []
    if doc.width <= 0 or doc.height <= 0:
        out.append(Violation("canvas", "width and height > 0"))
    if doc.units not in ("percent", "px"):
        out.append(Violation("units", "units is 'percent' or 'px'"))
    if not doc.background.href:
        out.append(Violation("background.href", "href non-empty"))

    seen_hrefs: dict[str, int] = {}
    for i, img in enumerate(doc.images):
        path = f"images[{i}]"
        if doc.units == "percent":
            _check_bbox(f"{path}.bbox", img.bbox, out)
        if not img.href:
            out.append(Violation(f"{path}.href", "href non-empty"))
        elif not img.href.lower().endswith(RASTER_EXTENSIONS):
            out.append(Violation(f"{path}.href", "href has a raster-image extension"))
        # placeholder elements (UNKNOWN bbox) all share a template href by design
        if img.bbox is not UNKNOWN:
            if img.href in seen_hrefs:
                out.append(
                    Violation(
                        f"{path}.href", f"unique hrefs (duplicate of images[{seen_hrefs[img.href]}])"
                    )
                )
            else:
                seen_hrefs[img.href] = i

    for i, txt in enumerate(doc.texts):
        path = f"texts[{i}]"
        if doc.units == "percent":
            _check_bbox(f"{path}.bbox", txt.bbox, out)
        if not txt.lines:
            out.append(Violation(f"{path}.lines", "lines non-empty"))
        for j, line in enumerate(txt.lines):
            if "<" in line or ">" in line:
                out.append(Violation(f"{path}.lines[{j}]", "no raw markup in lines"))
        style = txt.style
        if isinstance(style.font_size, int) and style.font_size < 1:
            out.append(Violation(f"{path}.style.font_size", "font_size >= 1"))
        if isinstance(style.color, str) and canonical_color(style.color) != style.color:
            out.append(Violation(f"{path}.style.color", "color matches #rrggbb"))
        if isinstance(style.text_align, str) and style.text_align not in TEXT_ALIGNMENTS:
            out.append(Violation(f"{path}.style.text_align", "text_align in {left, center, right}"))
        fw = style.font_weight
        if isinstance(fw, str) and fw not in ("normal", "bold"):
            out.append(Violation(f"{path}.style.font_weight", "font_weight normal|bold|numeric"))
        if isinstance(fw, int) and not 1 <= fw <= 1000:
            out.append(Violation(f"{path}.style.font_weight", "numeric font_weight in [1, 1000]"))
    return out


def fatal_violations(doc: SlideDoc) -> list[Violation]:
    return [v for v in validate(doc) if v.fatal]


def _iter_style_values(style: TextStyle) -> Iterator[StyleValue]:
    yield style.font_family
    yield style.font_size
    yield style.letter_spacing
    yield style.font_weight
    yield style.color
    yield style.text_align


def has_unknown(doc: SlideDoc) -> bool:
    """True if any placeholder marker survives anywhere in the document."""
    for img in doc.images:
        if img.bbox is UNKNOWN:
            return True
    for txt in doc.texts:
        if txt.bbox is UNKNOWN:
            return True
        if any(v is UNKNOWN for v in _iter_style_values(txt.style)):
            return True
        if any(value == UNKNOWN_TOKEN for _, value in txt.style.extras):
            return True
        if txt.lines == (UNKNOWN_TOKEN,):
            return True
    return False


def reading_order(items: Sequence, key=lambda item: item.bbox) -> list:
    """Sort assets top-to-bottom then left-to-right by bbox origin."""
    return sorted(items, key=lambda item: (key(item).y, key(item).x))
