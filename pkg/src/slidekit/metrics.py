"""Evaluation metrics: layout coverage, text similarity, pixel error, ratings.

Layout quality is a *symmetric* IoU per asset class: the mean fraction of
each ground-truth box covered by the union of predictions, averaged with
the mean fraction of each predicted box covered by the union of ground
truth. Union areas are exact (coordinate-compression sweep, no double
counting). Text quality is normalized Levenshtein similarity over the
concatenated text in DOM order. Human preference is tracked with Elo
ratings updated from decomposed pairwise outcomes.
"""

from __future__ import annotations

import csv
import json
import math
import subprocess
from dataclasses import dataclass, field, replace
from pathlib import Path
from typing import Iterable, Mapping, Sequence

from .errors import DegenerateInput, DuplicateMethod, ShapeMismatch, UnknownMethod
from .model import UNKNOWN, BBox, SlideDoc
from .raster import Raster, mse

DEFAULT_K_FACTOR = 4.0
DEFAULT_INITIAL_RATING = 1000.0


# --- geometry ---


def union_area(boxes: Sequence[BBox]) -> float:
    """Exact area of the union of rectangles via coordinate compression."""
    boxes = [b for b in boxes if b.w > 0 and b.h > 0]
    if not boxes:
        return 0.0
    xs = sorted({b.x for b in boxes} | {b.x2 for b in boxes})
    ys = sorted({b.y for b in boxes} | {b.y2 for b in boxes})
    total = 0.0
    for i in range(len(xs) - 1):
        cx = (xs[i] + xs[i + 1]) / 2.0
        col_w = xs[i + 1] - xs[i]
        for j in range(len(ys) - 1):
            cy = (ys[j] + ys[j + 1]) / 2.0
            if any(b.x <= cx <= b.x2 and b.y <= cy <= b.y2 for b in boxes):
                total += col_w * (ys[j + 1] - ys[j])
    return total


def _clip(box: BBox, frame: BBox) -> BBox | None:
    x = max(box.x, frame.x)
    y = max(box.y, frame.y)
    x2 = min(box.x2, frame.x2)
    y2 = min(box.y2, frame.y2)
    if x2 <= x or y2 <= y:
        return None
    return BBox(x, y, x2 - x, y2 - y)


def covered_fraction(target: BBox, others: Sequence[BBox]) -> float:
    """Fraction of ``target``'s area overlapped by the union of ``others``.

    The denominator uses the same edge arithmetic as the sweep so a box
    covered by an identical box scores exactly 1.0.
    """
    denom = (target.x2 - target.x) * (target.y2 - target.y)
    if denom <= 0:
        return 0.0
    clipped = [c for c in (_clip(b, target) for b in others) if c is not None]
    return union_area(clipped) / denom


@dataclass(frozen=True)
class CoverageScores:
    gt_coverage: float
    pred_coverage: float
    symmetric_iou: float


def symmetric_iou(gt_boxes: Sequence[BBox], pred_boxes: Sequence[BBox]) -> CoverageScores:
    """Two directional coverage scores and their average.

    Conventions for empty inputs: both sides empty scores a perfect 1.0
    (absence correctly predicted); exactly one side empty scores 0.0.
    """
    if not gt_boxes and not pred_boxes:
        return CoverageScores(1.0, 1.0, 1.0)
    gt_cov = (
        sum(covered_fraction(b, pred_boxes) for b in gt_boxes) / len(gt_boxes) if gt_boxes else 0.0
    )
    pred_cov = (
        sum(covered_fraction(b, gt_boxes) for b in pred_boxes) / len(pred_boxes)
        if pred_boxes
        else 0.0
    )
    return CoverageScores(gt_cov, pred_cov, (gt_cov + pred_cov) / 2.0)


def _class_boxes(doc: SlideDoc) -> tuple[list[BBox], list[BBox]]:
    images = [a.bbox for a in doc.images if a.bbox is not UNKNOWN]
    texts = [a.bbox for a in doc.texts if a.bbox is not UNKNOWN]
    return texts, images


def miou(gt: SlideDoc, pred: SlideDoc) -> float:
    """Mean of the per-class symmetric IoUs for text and image assets."""
    gt_text, gt_image = _class_boxes(gt)
    pred_text, pred_image = _class_boxes(pred)
    iou_text = symmetric_iou(gt_text, pred_text).symmetric_iou
    iou_image = symmetric_iou(gt_image, pred_image).symmetric_iou
    return (iou_text + iou_image) / 2.0


# --- text ---


def levenshtein(a: str, b: str) -> int:
    """Minimal edit distance, iterative two-row dynamic program."""
    if len(a) < len(b):
        a, b = b, a
    previous = list(range(len(b) + 1))
    for i, ca in enumerate(a, start=1):
        current = [i]
        for j, cb in enumerate(b, start=1):
            current.append(
                min(previous[j] + 1, current[j - 1] + 1, previous[j - 1] + (ca != cb))
            )
        previous = current
    return previous[-1]


def doc_text(doc: SlideDoc) -> str:
    """All text lines in DOM order, lines and assets joined by newlines."""
    return "\n".join(t.text for t in doc.texts)


def ocr_accuracy(gt: SlideDoc, pred: SlideDoc) -> float:
    """1 - Levenshtein(S_gt, S_pred) / max(|S_gt|, |S_pred|); empty-vs-empty is 1."""
    s_gt, s_pred = doc_text(gt), doc_text(pred)
    longest = max(len(s_gt), len(s_pred))
    if longest == 0:
        return 1.0
    return 1.0 - levenshtein(s_gt, s_pred) / longest


# --- ratings ---


@dataclass(frozen=True)
class EloTable:
    """Immutable rating table; updates return a new table."""

    ratings: Mapping[str, float]
    k_factor: float = DEFAULT_K_FACTOR
    initial: float = DEFAULT_INITIAL_RATING
    history: tuple[tuple[str, str], ...] = ()

    @classmethod
    def create(
        cls,
        methods: Iterable[str],
        k_factor: float = DEFAULT_K_FACTOR,
        initial: float = DEFAULT_INITIAL_RATING,
    ) -> "EloTable":
        return cls(ratings={m: initial for m in methods}, k_factor=k_factor, initial=initial)

    def rating(self, method: str) -> float:
        if method not in self.ratings:
            raise UnknownMethod(f"method {method!r} not registered")
        return self.ratings[method]


def expected_score(rating_a: float, rating_b: float) -> float:
    return 1.0 / (1.0 + 10.0 ** ((rating_b - rating_a) / 400.0))


def win_rate(elo_a: float, elo_b: float) -> float:
    """Probability of A beating B implied by the rating difference."""
    return expected_score(elo_a, elo_b)


def elo_update(table: EloTable, winner: str, loser: str) -> EloTable:
    """Apply one pairwise outcome; the rating sum is conserved exactly."""
    r_w = table.rating(winner)
    r_l = table.rating(loser)
    delta = table.k_factor * (1.0 - expected_score(r_w, r_l))
    ratings = dict(table.ratings)
    ratings[winner] = r_w + delta
    ratings[loser] = r_l - delta
    return replace(table, ratings=ratings, history=table.history + ((winner, loser),))


def decompose_ranking(ranking: Sequence[str]) -> list[tuple[str, str]]:
    """All C(n, 2) pairwise outcomes of a best-first ranking.

    Pairs come out in rank order: (1st, 2nd), (1st, 3rd), ..., (n-1th, nth).
    """
    if len(set(ranking)) != len(ranking):
        raise DuplicateMethod(f"ranking mentions a method twice: {ranking}")
    pairs = []
    for i in range(len(ranking)):
        for j in range(i + 1, len(ranking)):
            pairs.append((ranking[i], ranking[j]))
    return pairs


def apply_ranking(table: EloTable, ranking: Sequence[str]) -> EloTable:
    """Decompose a ranking and apply every pairwise update in emitted order."""
    for winner, loser in decompose_ranking(ranking):
        table = elo_update(table, winner, loser)
    return table


# --- agreement ---


@dataclass(frozen=True)
class RankingSet:
    """k raters x n items matrix of ranks; each row is a permutation of 1..n."""

    ranks: tuple[tuple[int, ...], ...]

    def __post_init__(self):
        rows = tuple(tuple(int(r) for r in row) for row in self.ranks)
        object.__setattr__(self, "ranks", rows)
        if not rows:
            raise DegenerateInput("at least one rater required")
        n = len(rows[0])
        for row in rows:
            if sorted(row) != list(range(1, n + 1)):
                raise DegenerateInput(f"row {row} is not a permutation of 1..{n} (ties disallowed)")

    @property
    def n(self) -> int:
        return len(self.ranks[0])

    @property
    def k(self) -> int:
        return len(self.ranks)

    @classmethod
    def from_orderings(cls, orderings: Sequence[Sequence[str]]) -> "RankingSet":
        """Best-first method orderings to a rank matrix (methods as columns)."""
        methods = sorted(orderings[0])
        rows = []
        for ordering in orderings:
            if sorted(ordering) != methods:
                raise DegenerateInput("every ordering must rank the same methods")
            rank_of = {m: i + 1 for i, m in enumerate(ordering)}
            rows.append(tuple(rank_of[m] for m in methods))
        return cls(ranks=tuple(rows))


def kendalls_w(ranking_set: RankingSet) -> float:
    """Coefficient of concordance: W = 12 S / (k^2 (n^3 - n))."""
    n, k = ranking_set.n, ranking_set.k
    if n < 2:
        raise DegenerateInput("need at least 2 items to measure concordance")
    column_sums = [sum(row[i] for row in ranking_set.ranks) for i in range(n)]
    mean = sum(column_sums) / n
    s = sum((r - mean) ** 2 for r in column_sums)
    return 12.0 * s / (k * k * (n**3 - n))


def top_rank_frequency(
    orderings: Sequence[Sequence[str]], methods: Iterable[str] | None = None
) -> dict[str, float]:
    """Fraction of rankings placing each method first; fractions sum to 1."""
    counts: dict[str, int] = {m: 0 for m in (methods or [])}
    for ordering in orderings:
        counts.setdefault(ordering[0], 0)
        counts[ordering[0]] += 1
    total = len(orderings)
    if total == 0:
        return {m: 0.0 for m in counts}
    return {m: counts[m] / total for m in sorted(counts)}


# --- per-sample reports ---


@dataclass(frozen=True)
class MetricRecord:
    sample_id: str
    miou: float
    ocr_accuracy: float
    mse: float
    extra: Mapping[str, float] = field(default_factory=dict)

    def as_dict(self) -> dict:
        out = {
            "sample_id": self.sample_id,
            "miou": self.miou,
            "ocr_accuracy": self.ocr_accuracy,
            "mse": self.mse,
        }
        out.update(self.extra)
        return out


def run_external_scorer(command: str, gt_png: Path, pred_png: Path) -> dict[str, float]:
    """Hook for out-of-process scorers: ``<cmd> <gt.png> <pred.png>`` prints JSON."""
    import shlex

    argv = shlex.split(command) + [str(gt_png), str(pred_png)]
    proc = subprocess.run(argv, capture_output=True, text=True, timeout=300)
    if proc.returncode != 0:
        raise RuntimeError(f"external scorer exited {proc.returncode}: {proc.stderr[:300]}")
    scores = json.loads(proc.stdout)
    return {str(k): float(v) for k, v in scores.items()}


def evaluate_sample(
    gt_doc: SlideDoc,
    gt_raster: Raster,
    pred_doc: SlideDoc,
    pred_raster: Raster,
    sample_id: str = "",
    extra: Mapping[str, float] | None = None,
) -> MetricRecord:
    if gt_raster.shape != pred_raster.shape:
        raise ShapeMismatch(f"raster shapes differ: {gt_raster.shape} vs {pred_raster.shape}")
    return MetricRecord(
        sample_id=sample_id,
        miou=miou(gt_doc, pred_doc),
        ocr_accuracy=ocr_accuracy(gt_doc, pred_doc),
        mse=mse(gt_raster, pred_raster),
        extra=dict(extra or {}),
    )


def summarize(records: Sequence[MetricRecord]) -> dict[str, float]:
    """Mean of every numeric column over a record list."""
    if not records:
        return {}
    keys = ["miou", "ocr_accuracy", "mse"] + sorted(
        {k for r in records for k in r.extra}
    )
    out: dict[str, float] = {}
    for key in keys:
        values = [
            getattr(r, key) if key in ("miou", "ocr_accuracy", "mse") else r.extra.get(key)
            for r in records
        ]
        values = [v for v in values if v is not None and not math.isnan(v)]
        out[key] = sum(values) / len(values) if values else float("nan")
    return out


def write_records_jsonl(records: Sequence[MetricRecord], path: str | Path) -> None:
    with Path(path).open("w", encoding="utf-8") as fh:
        for record in records:
            fh.write(json.dumps(record.as_dict()) + "\n")


def write_summary_csv(summaries: Mapping[str, Mapping[str, float]], path: str | Path) -> None:
    """Method-per-row, metric-per-column table."""
    columns = sorted({k for s in summaries.values() for k in s})
    ordered = [c for c in ("miou", "ocr_accuracy", "mse") if c in columns] + [
        c for c in columns if c not in ("miou", "ocr_accuracy", "mse")
    ]
    with Path(path).open("w", newline="", encoding="utf-8") as fh:
        writer = csv.writer(fh)
        writer.writerow(["method"] + ordered)
        for method in sorted(summaries):
            writer.writerow([method] + [f"{summaries[method].get(c, float('nan')):.6g}" for c in ordered])
