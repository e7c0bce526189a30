"""Training-corpus exporter.

For every corpus sample we emit a skeleton-context record and a
partial-context record; a seeded half of the corpus additionally gets two
initial-context records (one whose prior started from a skeleton, one from
a partial), keeping the three context kinds in a 1:1:1 ratio.
"""

from __future__ import annotations

import json
import random
from dataclasses import asdict, dataclass
from pathlib import Path
from typing import Callable, Iterable, Mapping

from .contexts import (
    AuxContext,
    Detection,
    DetectionSet,
    build_partial,
    build_prompt,
    build_refinement_context,
    build_skeleton,
)
from .errors import MissingPrior
from .model import SlideDoc
from .svgio import serialize_slide_svg


@dataclass(frozen=True)
class TrainSample:
    id: str
    image_path: str
    doc: SlideDoc


@dataclass(frozen=True)
class TrainingRecord:
    id: str
    context_kind: str
    prompt: str
    image_path: str
    target_svg: str


PriorSource = Callable[[str, str], SlideDoc | None]


def detections_from_doc(doc: SlideDoc, confidence: float = 1.0) -> DetectionSet:
    """Stand-in detector: emits the ground-truth boxes as detections."""
    boxes = [
        Detection(cls="image", bbox=img.bbox, confidence=confidence) for img in doc.images
    ] + [Detection(cls="text", bbox=txt.bbox, confidence=confidence) for txt in doc.texts]
    return DetectionSet(boxes=tuple(boxes))


def refinement_half(sample_ids: Iterable[str], seed: int) -> set[str]:
    """Seeded unbiased selection of the half that gets refinement records."""
    ids = sorted(sample_ids)
    rng = random.Random(seed)
    rng.shuffle(ids)
    return set(ids[: len(ids) // 2])


def export_training_variants(
    corpus: Iterable[TrainSample],
    det_source: Mapping[str, DetectionSet] | Callable[[str], DetectionSet | None] | None = None,
    prior_source: PriorSource | None = None,
    seed: int = 0,
    conf_threshold: float = 0.25,
) -> list[TrainingRecord]:
    """Build the three-variant training mix for a corpus.

    ``det_source`` supplies partial-template boxes per sample id; samples
    without detections fall back to ground-truth boxes. ``prior_source``
    maps ``(sample_id, start_kind)`` to a prior prediction; pass ``None``
    to skip refinement records entirely. Raises :class:`MissingPrior` if a
    refinement-half sample has no prior for either start kind.
    """
    samples = sorted(corpus, key=lambda s: s.id)
    if prior_source is not None:
        half = refinement_half((s.id for s in samples), seed)
    else:
        half = set()

    def detections_for(sample: TrainSample) -> DetectionSet:
        if det_source is None:
            return detections_from_doc(sample.doc)
        det = det_source.get(sample.id) if isinstance(det_source, Mapping) else det_source(sample.id)
        return det if det is not None else detections_from_doc(sample.doc)

    records: list[TrainingRecord] = []
    for sample in samples:
        doc = sample.doc
        target = serialize_slide_svg(doc)
        canvas = (doc.width, doc.height)

        def add(variant: str, ctx: AuxContext):
            records.append(
                TrainingRecord(
                    id=f"{sample.id}#{variant}",
                    context_kind=ctx.kind.value,
                    prompt=build_prompt(ctx),
                    image_path=sample.image_path,
                    target_svg=target,
                )
            )

        add("skeleton", build_skeleton(doc.n_images, doc.n_texts, canvas, source=sample.id))
        add(
            "partial",
            build_partial(detections_for(sample), canvas, conf_threshold, source=sample.id),
        )
        if sample.id in half:
            for start in ("skeleton", "partial"):
                prior = prior_source(sample.id, start) if prior_source else None
                if prior is None:
                    raise MissingPrior(f"no {start}-start prior for sample {sample.id!r}")
                add(
                    f"initial_from_{start}",
                    build_refinement_context(prior, source=f"{sample.id}:{start}"),
                )
    return records


def write_training_records(records: Iterable[TrainingRecord], path: str | Path) -> int:
    """Write records as line-delimited JSON; returns the record count."""
    path = Path(path)
    n = 0
    with path.open("w", encoding="utf-8") as fh:
        for record in records:
            fh.write(json.dumps(asdict(record), ensure_ascii=False) + "\n")
            n += 1
    return n
