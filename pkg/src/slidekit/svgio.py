"""Parser and serializer for the slide SVG dialect.

The dialect is a deliberately small subset of SVG::

    <svg xmlns="..." xmlns:xlink="..." width="792" height="612" fill="white">
      <image x="0.0%" y="0.0%" width="100.0%" height="100.0%" href="background.png" />
      <g id="images">
        <image x="35.3%" y="20.0%" width="30.0%" height="40.0%" href="image_1.png" />
      </g>
      <g id="text">
        <foreignObject x="1.8%" y="5.0%" width="50.0%" height="8.0%" overflow="visible">
          <div xmlns="http://www.w3.org/1999/xhtml"
               style="font-family: Inter; font-size: 24px; letter-spacing: 0.0em; color: #000000; text-align: left;">
            <div>Quarterly Review</div>
          </div>
        </foreignObject>
      </g>
    </svg>

Every spatial or stylistic attribute may carry the literal placeholder
``UNKNOWN`` instead of a value; placeholders survive a parse/serialize
round trip byte-for-byte so templates can be echoed back to a model.

Serialization is canonical: fixed element order, fixed style-key order
(font-family, font-size, letter-spacing, font-weight, color, text-align,
then preserved extras), percentages with exactly one decimal digit. The
serializer is a fixpoint: ``serialize(parse(serialize(parse(s))))`` equals
``serialize(parse(s))`` for any accepted input.
"""

from __future__ import annotations

from xml.etree import ElementTree as ET
from xml.sax.saxutils import escape

from .errors import InvariantViolation, MalformedSvg, MissingCanvas, UnsupportedElement
from .model import (
    UNKNOWN,
    UNKNOWN_TOKEN,
    BBox,
    BackgroundAsset,
    ImageAsset,
    SlideDoc,
    TextAsset,
    TextStyle,
    UnknownType,
    Violation,
    fatal_violations,
    round1,
)

SVG_NS = "http://www.w3.org/2000/svg"
XLINK_NS = "http://www.w3.org/1999/xlink"
XHTML_NS = "http://www.w3.org/1999/xhtml"

_STYLE_KEYS = ("font-family", "font-size", "letter-spacing", "font-weight", "color", "text-align")


def _localname(tag: str) -> str:
    return tag.rsplit("}", 1)[-1] if tag.startswith("{") else tag


def _get_attr(elem: ET.Element, name: str) -> str | None:
    """Fetch an attribute regardless of namespace prefixing."""
    if name in elem.attrib:
        return elem.attrib[name]
    for key, value in elem.attrib.items():
        if _localname(key) == name:
            return value
    return None


class _SpatialReader:
    """Parses x/y/width/height attributes, tracking percent vs pixel units."""

    def __init__(self):
        self.saw_percent = False
        self.saw_pixel = False

    def read(self, elem: ET.Element, path: str) -> BBox | UnknownType:
        raw = [_get_attr(elem, name) for name in ("x", "y", "width", "height")]
        values: list[float] = []
        for name, value in zip(("x", "y", "width", "height"), raw):
            if value is None:
                raise MalformedSvg(f"{path}: missing attribute {name!r}")
            value = value.strip()
            if value == UNKNOWN_TOKEN:
                return UNKNOWN
            try:
                if value.endswith("%"):
                    self.saw_percent = True
                    values.append(float(value[:-1]))
                else:
                    self.saw_pixel = True
                    values.append(float(value.removesuffix("px")))
            except ValueError:
                raise MalformedSvg(f"{path}: bad {name} value {value!r}") from None
        return BBox(*values)


def _parse_style(style_text: str) -> TextStyle:
    fields: dict[str, object] = {}
    extras: list[tuple[str, str]] = []
    for part in style_text.split(";"):
        part = part.strip()
        if not part:
            continue
        if ":" not in part:
            raise MalformedSvg(f"bad style declaration {part!r}")
        key, value = part.split(":", 1)
        key = key.strip().lower()
        value = value.strip()
        if key not in _STYLE_KEYS:
            extras.append((key, value))
            continue
        attr = key.replace("-", "_")
        if value == UNKNOWN_TOKEN:
            fields[attr] = UNKNOWN
        elif key == "font-size":
            fields[attr] = int(round1(float(value.removesuffix("px"))))
        elif key == "letter-spacing":
            fields[attr] = float(value.removesuffix("em"))
        elif key == "font-weight":
            fields[attr] = int(value) if value.lstrip("-").isdigit() else value
        else:
            fields[attr] = value
    return TextStyle(extras=tuple(extras), **fields)


def _parse_text_lines(outer_div: ET.Element | None, fo: ET.Element) -> tuple[str, ...]:
    if outer_div is None:
        return ()
    lines: list[str] = []
    inner_divs = [child for child in outer_div if _localname(child.tag) == "div"]
    if inner_divs:
        for div in inner_divs:
            line = "".join(div.itertext()).strip()
            if line:
                lines.append(line)
    else:
        line = "".join(outer_div.itertext()).strip()
        if line:
            lines.append(line)
    return tuple(lines)


def parse_slide_svg(svg_text: str) -> SlideDoc:
    """Parse dialect SVG text into a :class:`SlideDoc`.

    DOM order of assets is preserved. The placeholder token ``UNKNOWN`` in
    any attribute becomes the :data:`UNKNOWN` marker. Raw design exports
    with bare pixel coordinates are accepted and marked ``units="px"``.

    Raises :class:`MalformedSvg` on unparseable markup, :class:`MissingCanvas`
    if the root lacks usable width/height, and :class:`UnsupportedElement`
    for anything outside the dialect.
    """
    try:
        root = ET.fromstring(svg_text)
    except ET.ParseError as exc:
        raise MalformedSvg(f"unparseable markup: {exc}") from exc
    if _localname(root.tag) != "svg":
        raise UnsupportedElement(_localname(root.tag), "document root must be <svg>")

    def canvas_dim(name: str) -> int:
        raw = _get_attr(root, name)
        if raw is None:
            raise MissingCanvas(f"root svg lacks {name!r}")
        try:
            value = int(round(float(raw.strip().removesuffix("px"))))
        except ValueError:
            raise MissingCanvas(f"root {name}={raw!r} is not a pixel count") from None
        return value

    width, height = canvas_dim("width"), canvas_dim("height")

    spatial = _SpatialReader()
    background: BackgroundAsset | None = None
    images: list[ImageAsset] = []
    texts: list[TextAsset] = []
    seen_groups: set[str] = set()

    for child in root:
        tag = _localname(child.tag)
        if tag == "image":
            if background is not None:
                raise UnsupportedElement("image", "only one background image allowed at root")
            href = _get_attr(child, "href") or "background.png"
            background = BackgroundAsset(href=href)
        elif tag == "g":
            group_id = child.get("id")
            if group_id not in ("images", "text"):
                raise UnsupportedElement("g", f"unknown group id {group_id!r}")
            if group_id in seen_groups:
                raise UnsupportedElement("g", f"duplicate group id {group_id!r}")
            seen_groups.add(group_id)
            if group_id == "images":
                for i, elem in enumerate(child):
                    if _localname(elem.tag) != "image":
                        raise UnsupportedElement(_localname(elem.tag), "only <image> inside g#images")
                    bbox = spatial.read(elem, f"images[{i}]")
                    href = _get_attr(elem, "href") or ""
                    images.append(ImageAsset(bbox=bbox, href=href))
            else:
                for i, elem in enumerate(child):
                    if _localname(elem.tag) != "foreignObject":
                        raise UnsupportedElement(
                            _localname(elem.tag), "only <foreignObject> inside g#text"
                        )
                    bbox = spatial.read(elem, f"texts[{i}]")
                    outer = next((c for c in elem if _localname(c.tag) == "div"), None)
                    style = _parse_style(outer.get("style", "")) if outer is not None else TextStyle()
                    lines = _parse_text_lines(outer, elem)
                    texts.append(TextAsset(bbox=bbox, style=style, lines=lines))
        else:
            raise UnsupportedElement(tag, "not part of the slide dialect")

    if spatial.saw_percent and spatial.saw_pixel:
        raise MalformedSvg("mixed percent and pixel coordinates")
    units = "px" if spatial.saw_pixel else "percent"
    return SlideDoc(
        width=width,
        height=height,
        background=background or BackgroundAsset(),
        images=tuple(images),
        texts=tuple(texts),
        units=units,
    )


def _pct(value: float | UnknownType) -> str:
    return UNKNOWN_TOKEN if value is UNKNOWN else f"{value:.1f}%"


def _spacing(value: float) -> str:
    s = f"{value:.2f}"
    if s.endswith("0") and s[-2] != ".":
        s = s[:-1]
    return s


def _attr(value: str) -> str:
    return escape(str(value), {'"': "&quot;"})


def _style_string(style: TextStyle) -> str:
    parts: list[str] = []

    def emit(key: str, value):
        if value is None:
            return
        if value is UNKNOWN:
            parts.append(f"{key}: {UNKNOWN_TOKEN}")
        elif key == "font-size":
            parts.append(f"{key}: {value}px")
        elif key == "letter-spacing":
            parts.append(f"{key}: {_spacing(value)}em")
        else:
            parts.append(f"{key}: {value}")

    emit("font-family", style.font_family)
    emit("font-size", style.font_size)
    emit("letter-spacing", style.letter_spacing)
    emit("font-weight", style.font_weight)
    emit("color", style.color)
    emit("text-align", style.text_align)
    for key, value in style.extras:
        parts.append(f"{key}: {value}")
    return "; ".join(parts) + (";" if parts else "")


def _bbox_attrs(bbox: BBox | UnknownType) -> str:
    if bbox is UNKNOWN:
        u = UNKNOWN_TOKEN
        return f'x="{u}" y="{u}" width="{u}" height="{u}"'
    return (
        f'x="{_pct(bbox.x)}" y="{_pct(bbox.y)}" '
        f'width="{_pct(bbox.w)}" height="{_pct(bbox.h)}"'
    )


def serialize_slide_svg(doc: SlideDoc) -> str:
    """Serialize a document to canonical dialect SVG text.

    The output is a standalone SVG renderable by a browser. Raises
    :class:`InvariantViolation` when the document breaks a fatal type
    invariant (degenerate boxes, empty text, malformed styles, pixel
    units); boxes that merely reach past the canvas are emitted as-is.
    """
    fatal = fatal_violations(doc)
    if doc.units != "percent" and not any(v.path == "units" for v in fatal):
        fatal.append(Violation("units", "serialize requires percent coordinates"))
    if fatal:
        raise InvariantViolation(fatal)

    lines = [
        f'<svg xmlns="{SVG_NS}" xmlns:xlink="{XLINK_NS}" '
        f'width="{doc.width}" height="{doc.height}" fill="white">',
        f'  <image x="0.0%" y="0.0%" width="100.0%" height="100.0%" '
        f'href="{_attr(doc.background.href)}" />',
        '  <g id="images">',
    ]
    for img in doc.images:
        lines.append(f'    <image {_bbox_attrs(img.bbox)} href="{_attr(img.href)}" />')
    lines.append("  </g>")
    lines.append('  <g id="text">')
    for txt in doc.texts:
        lines.append(f'    <foreignObject {_bbox_attrs(txt.bbox)} overflow="visible">')
        lines.append(
            f'      <div xmlns="{XHTML_NS}" style="{_attr(_style_string(txt.style))}">'
        )
        for line in txt.lines:
            lines.append(f"        <div>{escape(line)}</div>")
        lines.append("      </div>")
        lines.append("    </foreignObject>")
    lines.append("  </g>")
    lines.append("</svg>")
    return "\n".join(lines) + "\n"
