"""Corpus construction: text grouping, outlier filtering, normalization, stats.

Input is a directory of per-slide SVG+PNG pairs (raw design exports with
pixel coordinates are accepted and normalized). Output is the corpus
layout ``<root>/{train,test}/<id>/{slide.png, slide.svg, assets/...}``
with a seeded, reproducible train/test split.
"""

from __future__ import annotations

import csv
import json
import random
from collections import Counter
from dataclasses import dataclass
from pathlib import Path
from typing import Iterable, Sequence
from xml.etree import ElementTree as ET

from .contexts import DetectionSet
from .errors import MalformedSvg, ZeroCanvas
from .model import (
    UNKNOWN,
    BBox,
    BackgroundAsset,
    ImageAsset,
    SlideDoc,
    TextAsset,
    reading_order,
)
from .raster import crop_region, load_png, render_with_external, save_png
from .svgio import parse_slide_svg, serialize_slide_svg

DEFAULT_MAX_IMAGES = 8
DEFAULT_MAX_TEXTS = 31


@dataclass(frozen=True)
class CorpusSample:
    id: str
    raster_path: Path
    svg_path: Path
    asset_paths: tuple[Path, ...]
    n_images: int
    n_texts: int


@dataclass(frozen=True)
class CorpusStats:
    image_count_hist: dict[int, int]
    text_count_hist: dict[int, int]
    svg_char_hist: dict[int, int]  # bucketed by svg_char_bucket
    split_sizes: dict[str, int]
    svg_char_bucket: int = 1000

    @property
    def total(self) -> int:
        return sum(self.split_sizes.values())

    def as_dict(self) -> dict:
        return {
            "image_count_hist": dict(sorted(self.image_count_hist.items())),
            "text_count_hist": dict(sorted(self.text_count_hist.items())),
            "svg_char_hist": dict(sorted(self.svg_char_hist.items())),
            "svg_char_bucket": self.svg_char_bucket,
            "split_sizes": self.split_sizes,
        }


# --- text grouping ---


class _UnionFind:
    def __init__(self, n: int):
        self.parent = list(range(n))

    def find(self, i: int) -> int:
        while self.parent[i] != i:
            self.parent[i] = self.parent[self.parent[i]]
            i = self.parent[i]
        return i

    def union(self, a: int, b: int) -> None:
        ra, rb = self.find(a), self.find(b)
        if ra != rb:
            self.parent[rb] = ra


def group_text_boxes(texts: Sequence[TextAsset], det: DetectionSet | None = None) -> list[TextAsset]:
    """Merge text assets into coherent blocks.

    Two texts belong together when their boxes overlap each other with
    positive area, or when both overlap a common text-class detection box.
    Merging is transitive (connected components). A merged asset takes the
    union rectangle, the member lines in reading order, and the style of
    the largest-area member. Asset count never grows; line count is
    preserved.
    """
    texts = list(texts)
    n = len(texts)
    if n <= 1:
        return texts
    for t in texts:
        if t.bbox is UNKNOWN:
            raise ValueError("cannot group placeholder text assets")

    uf = _UnionFind(n)
    for i in range(n):
        for j in range(i + 1, n):
            if texts[i].bbox.intersects(texts[j].bbox):
                uf.union(i, j)
    if det is not None:
        for detection in det.boxes:
            if detection.cls != "text":
                continue
            members = [i for i in range(n) if texts[i].bbox.intersects(detection.bbox)]
            for other in members[1:]:
                uf.union(members[0], other)

    components: dict[int, list[int]] = {}
    for i in range(n):
        components.setdefault(uf.find(i), []).append(i)

    merged: list[tuple[int, TextAsset]] = []
    for indices in components.values():
        first = min(indices)
        if len(indices) == 1:
            merged.append((first, texts[first]))
            continue
        members = [texts[i] for i in indices]
        bbox = members[0].bbox
        for m in members[1:]:
            bbox = bbox.union_rect(m.bbox)
        ordered = reading_order(members)
        lines = tuple(line for m in ordered for line in m.lines)
        style = max(members, key=lambda m: m.bbox.area).style
        merged.append((first, TextAsset(bbox=bbox, style=style, lines=lines)))
    merged.sort(key=lambda pair: pair[0])
    return [asset for _, asset in merged]


# --- filtering / normalization ---


def filter_outliers(
    samples: Iterable[CorpusSample],
    max_images: int = DEFAULT_MAX_IMAGES,
    max_texts: int = DEFAULT_MAX_TEXTS,
) -> list[CorpusSample]:
    """Drop slides with more than ``max_images`` images or ``max_texts`` texts."""
    return [s for s in samples if s.n_images <= max_images and s.n_texts <= max_texts]


def normalize_coords(doc: SlideDoc) -> SlideDoc:
    """Convert absolute pixel coordinates to percent of canvas (1 decimal).

    Documents already in percent pass through unchanged, so the operation
    is idempotent.
    """
    if doc.units == "percent":
        return doc
    if doc.width <= 0 or doc.height <= 0:
        raise ZeroCanvas(f"cannot normalize on a {doc.width}x{doc.height} canvas")

    def to_percent(bbox: BBox) -> BBox:
        return BBox(
            bbox.x / doc.width * 100.0,
            bbox.y / doc.height * 100.0,
            bbox.w / doc.width * 100.0,
            bbox.h / doc.height * 100.0,
        )

    images = tuple(
        ImageAsset(bbox=to_percent(i.bbox) if i.bbox is not UNKNOWN else UNKNOWN, href=i.href)
        for i in doc.images
    )
    texts = tuple(
        TextAsset(
            bbox=to_percent(t.bbox) if t.bbox is not UNKNOWN else UNKNOWN,
            style=t.style,
            lines=t.lines,
        )
        for t in doc.texts
    )
    return SlideDoc(
        width=doc.width,
        height=doc.height,
        background=doc.background,
        images=images,
        texts=texts,
        units="percent",
    )


def pre_flatten(svg_text: str) -> str:
    """Hoist children out of decorative group wrappers in raw design exports.

    Groups other than ``id="images"``/``id="text"`` are replaced by their
    children, recursively. Elements the dialect cannot express are dropped.
    """
    try:
        root = ET.fromstring(svg_text)
    except ET.ParseError as exc:
        raise MalformedSvg(f"unparseable markup: {exc}") from exc

    def local(tag: str) -> str:
        return tag.rsplit("}", 1)[-1] if tag.startswith("{") else tag

    def hoist(elem: ET.Element) -> None:
        changed = True
        while changed:
            changed = False
            for child in list(elem):
                if local(child.tag) == "g" and child.get("id") not in ("images", "text"):
                    idx = list(elem).index(child)
                    elem.remove(child)
                    for grandchild in reversed(list(child)):
                        elem.insert(idx, grandchild)
                    changed = True
        for child in list(elem):
            hoist(child)

    hoist(root)
    ET.register_namespace("", "http://www.w3.org/2000/svg")
    ET.register_namespace("xlink", "http://www.w3.org/1999/xlink")
    return ET.tostring(root, encoding="unicode")


# --- corpus assembly ---


def split_ids(ids: Sequence[str], train_fraction: float, seed: int) -> tuple[list[str], list[str]]:
    """Deterministic seeded shuffle split; train size = round(n * fraction)."""
    ordered = sorted(ids)
    rng = random.Random(seed)
    rng.shuffle(ordered)
    n_train = int(round(len(ordered) * train_fraction))
    return ordered[:n_train], ordered[n_train:]


def _load_input_doc(svg_path: Path) -> SlideDoc:
    text = svg_path.read_text(encoding="utf-8")
    try:
        return parse_slide_svg(text)
    except MalformedSvg:
        raise
    except Exception:
        return parse_slide_svg(pre_flatten(text))


def build_corpus(
    input_dir: str | Path,
    out_dir: str | Path,
    train_fraction: float = 0.9,
    seed: int = 0,
    detections: dict[str, DetectionSet] | None = None,
    max_images: int = DEFAULT_MAX_IMAGES,
    max_texts: int = DEFAULT_MAX_TEXTS,
    renderer_cmd: str | None = None,
) -> CorpusStats:
    """Group, filter, normalize and split the input slides into a corpus.

    Input layout: ``<input_dir>/<id>.svg`` + ``<input_dir>/<id>.png``.
    With ``renderer_cmd`` set, slide.png is re-rendered from the processed
    SVG through the external renderer instead of copying the input raster.
    """
    input_dir = Path(input_dir)
    out_dir = Path(out_dir)
    svg_files = sorted(input_dir.glob("*.svg"))

    processed: dict[str, tuple[SlideDoc, Path]] = {}
    for svg_path in svg_files:
        slide_id = svg_path.stem
        png_path = svg_path.with_suffix(".png")
        if not png_path.exists():
            continue
        doc = _load_input_doc(svg_path)
        det = (detections or {}).get(slide_id)
        doc = doc.with_assets(texts=group_text_boxes(doc.texts, det))
        doc = normalize_coords(doc)
        if doc.n_images > max_images or doc.n_texts > max_texts:
            continue
        processed[slide_id] = (doc, png_path)

    train_ids, test_ids = split_ids(list(processed), train_fraction, seed)
    split_of = {sid: "train" for sid in train_ids}
    split_of.update({sid: "test" for sid in test_ids})

    image_hist: Counter = Counter()
    text_hist: Counter = Counter()
    char_hist: Counter = Counter()
    bucket = 1000

    for slide_id in sorted(processed):
        doc, png_path = processed[slide_id]
        sample_dir = out_dir / split_of[slide_id] / slide_id
        assets_dir = sample_dir / "assets"
        sample_dir.mkdir(parents=True, exist_ok=True)
        raster = load_png(png_path)

        new_images = []
        for k, img in enumerate(doc.images, start=1):
            crop = crop_region(raster, img.bbox)
            href = f"assets/image_{k}.png"
            save_png(crop, sample_dir / href)
            new_images.append(ImageAsset(bbox=img.bbox, href=href))
        background_href = "assets/background.png"
        save_png(raster, sample_dir / background_href)
        doc = doc.with_assets(images=new_images, background=BackgroundAsset(background_href))

        svg_text = serialize_slide_svg(doc)
        (sample_dir / "slide.svg").write_text(svg_text, encoding="utf-8")
        if renderer_cmd:
            render_with_external(
                renderer_cmd, sample_dir / "slide.svg", sample_dir / "slide.png", doc.width, doc.height
            )
        else:
            save_png(raster, sample_dir / "slide.png")

        image_hist[doc.n_images] += 1
        text_hist[doc.n_texts] += 1
        char_hist[(len(svg_text) // bucket) * bucket] += 1

    return CorpusStats(
        image_count_hist=dict(image_hist),
        text_count_hist=dict(text_hist),
        svg_char_hist=dict(char_hist),
        split_sizes={"train": len(train_ids), "test": len(test_ids)},
        svg_char_bucket=bucket,
    )


def read_corpus_samples(corpus_dir: str | Path) -> list[CorpusSample]:
    corpus_dir = Path(corpus_dir)
    samples = []
    for split in ("train", "test"):
        split_dir = corpus_dir / split
        if not split_dir.is_dir():
            continue
        for sample_dir in sorted(p for p in split_dir.iterdir() if p.is_dir()):
            svg_path = sample_dir / "slide.svg"
            raster_path = sample_dir / "slide.png"
            if not svg_path.exists() or not raster_path.exists():
                continue
            doc = parse_slide_svg(svg_path.read_text(encoding="utf-8"))
            asset_paths = tuple(sample_dir / img.href for img in doc.images)
            samples.append(
                CorpusSample(
                    id=f"{split}/{sample_dir.name}",
                    raster_path=raster_path,
                    svg_path=svg_path,
                    asset_paths=asset_paths,
                    n_images=doc.n_images,
                    n_texts=doc.n_texts,
                )
            )
    return samples


def corpus_stats(corpus_dir: str | Path, bucket: int = 1000) -> CorpusStats:
    """Histograms over an existing corpus; SVG length measured in characters."""
    corpus_dir = Path(corpus_dir)
    image_hist: Counter = Counter()
    text_hist: Counter = Counter()
    char_hist: Counter = Counter()
    split_sizes = {"train": 0, "test": 0}
    for sample in read_corpus_samples(corpus_dir):
        split = sample.id.split("/", 1)[0]
        split_sizes[split] += 1
        image_hist[sample.n_images] += 1
        text_hist[sample.n_texts] += 1
        chars = len(sample.svg_path.read_text(encoding="utf-8"))
        char_hist[(chars // bucket) * bucket] += 1
    return CorpusStats(
        image_count_hist=dict(image_hist),
        text_count_hist=dict(text_hist),
        svg_char_hist=dict(char_hist),
        split_sizes=split_sizes,
        svg_char_bucket=bucket,
    )


def write_stats(stats: CorpusStats, json_path: str | Path, csv_path: str | Path | None = None) -> None:
    Path(json_path).write_text(json.dumps(stats.as_dict(), indent=2) + "\n", encoding="utf-8")
    if csv_path is not None:
        with Path(csv_path).open("w", newline="", encoding="utf-8") as fh:
            writer = csv.writer(fh)
            writer.writerow(["histogram", "bin", "count"])
            for name, hist in (
                ("image_count", stats.image_count_hist),
                ("text_count", stats.text_count_hist),
                ("svg_chars", stats.svg_char_hist),
            ):
                for key in sorted(hist):
                    writer.writerow([name, key, hist[key]])
