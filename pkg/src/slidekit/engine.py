"""Derendering engine: single passes, iterative refinement, full pipeline."""

from __future__ import annotations

import re
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass
from typing import Sequence

from .backends import Backend, BackendRequest
from .contexts import (
    AuxContext,
    DetectionSet,
    build_partial,
    build_prompt,
    build_refinement_context,
    build_skeleton,
)
from .errors import InvalidDoc, UnrepairableResponse
from .model import SlideDoc, validate
from .raster import Raster, encode_png, resize_max_side
from .svgio import parse_slide_svg

_FENCE_RE = re.compile(r"```[a-zA-Z]*\s*\n?(.*?)```", re.DOTALL)


@dataclass(frozen=True)
class DerenderResult:
    doc: SlideDoc
    raw_response: str
    repairs_applied: tuple[str, ...]
    pass_index: int
    context: AuxContext


@dataclass(frozen=True)
class PipelineRun:
    """All passes of one slide, first to last."""

    results: tuple[DerenderResult, ...]

    @property
    def final(self) -> DerenderResult:
        return self.results[-1]

    @property
    def backend_calls(self) -> int:
        return len(self.results)


def repair_with_names(raw: str) -> tuple[str, tuple[str, ...]]:
    """Recover an SVG payload from a noisy model response.

    Ordered repairs, each recorded only when it actually fired: strip a
    markdown code fence wrapping the payload, trim prose before the first
    ``<svg`` and after the last ``</svg>``, close a missing trailing
    ``</svg>``. Input with nothing to repair comes back unchanged and is
    left for the parser to judge.
    """
    text = raw
    applied: list[str] = []

    if not text.strip().startswith("<svg"):
        fence = _FENCE_RE.search(text)
        if fence is not None and fence.group(1).strip():
            text = fence.group(1).strip()
            applied.append("strip_fences")

    start = text.find("<svg")
    if start != -1:
        end = text.rfind("</svg>")
        if end >= start:
            candidate = text[start : end + len("</svg>")]
            suffix = text[end + len("</svg>") :]
        else:
            candidate = text[start:].rstrip()
            suffix = ""
        prefix = text[:start]
        if prefix.strip() or suffix.strip():
            text = candidate
            applied.append("trim_surrounding_text")
        if end < start and not candidate.rstrip().endswith("/>"):
            text = candidate + "\n</svg>"
            applied.append("close_svg_tag")

    return text, tuple(applied)


def repair_svg_text(raw: str) -> str:
    """Repaired SVG text only; see :func:`repair_with_names` for the audit trail."""
    return repair_with_names(raw)[0]


def derender_once(raster: Raster, ctx: AuxContext, backend: Backend, pass_index: int = 0) -> DerenderResult:
    """One backend pass: prompt, generate, repair, parse, validate."""
    request = BackendRequest(prompt=build_prompt(ctx), image=encode_png(raster))
    raw = backend.generate(request)
    repaired, repairs = repair_with_names(raw)
    try:
        doc = parse_slide_svg(repaired)
    except Exception as exc:
        raise UnrepairableResponse(f"no parseable SVG recovered: {exc}", raw_response=raw) from exc
    violations = validate(doc)
    if violations:
        raise InvalidDoc(violations, raw_response=raw)
    return DerenderResult(
        doc=doc, raw_response=raw, repairs_applied=repairs, pass_index=pass_index, context=ctx
    )


def refine(raster: Raster, prior: DerenderResult, backend: Backend) -> DerenderResult:
    """Feed the prior prediction back as an initial context for polishing."""
    ctx = build_refinement_context(prior.doc, source=f"pass_{prior.pass_index}")
    return derender_once(raster, ctx, backend, pass_index=prior.pass_index + 1)


def derender_pipeline(
    raster: Raster,
    backend: Backend,
    start: str = "skeleton",
    detections: DetectionSet | None = None,
    refine_steps: int = 0,
    max_side: int = 1024,
    conf_threshold: float = 0.25,
    skeleton_counts: tuple[int, int] = (1, 1),
) -> PipelineRun:
    """Resize, build the starting context, derender, then refine N times.

    ``start`` is ``"skeleton"`` or ``"partial"``; partial starts require a
    :class:`DetectionSet`. Every intermediate pass is kept for audit.
    """
    if refine_steps < 0:
        raise ValueError("refine_steps must be >= 0")
    raster = resize_max_side(raster, max_side)
    h, w = raster.shape[:2]
    if start == "skeleton":
        ctx = build_skeleton(skeleton_counts[0], skeleton_counts[1], (w, h), source="pipeline")
    elif start == "partial":
        if detections is None:
            raise ValueError("partial start requires detections")
        ctx = build_partial(detections, (w, h), conf_threshold=conf_threshold, source="pipeline")
    else:
        raise ValueError(f"unknown start context {start!r}")

    results = [derender_once(raster, ctx, backend, pass_index=0)]
    for _ in range(refine_steps):
        results.append(refine(raster, results[-1], backend))
    return PipelineRun(results=tuple(results))


def derender_many(
    rasters: Sequence[Raster],
    backend: Backend,
    parallelism: int = 1,
    **kwargs,
) -> list[PipelineRun]:
    """Run the pipeline over independent slides with a bounded worker pool."""
    if parallelism <= 1:
        return [derender_pipeline(r, backend, **kwargs) for r in rasters]
    with ThreadPoolExecutor(max_workers=parallelism) as pool:
        futures = [pool.submit(derender_pipeline, r, backend, **kwargs) for r in rasters]
        return [f.result() for f in futures]
