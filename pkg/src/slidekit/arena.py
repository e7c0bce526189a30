"""Human-evaluation arena: blinded sessions, rankings, Elo standings.

State is event-sourced: every accepted ranking is appended to a
line-delimited JSON log, and the live leaderboard is exactly what
replaying that log through the metrics library produces. Submissions are
serialized through a single lock (single-writer); reads take snapshots.

Event log, one JSON object per line:

``{"type": "init", "methods": [...], "k_factor": 4.0, "initial": 1000.0, "seed": 0}``
    written once when the log is created.
``{"type": "session", "session_id": "...", "rater_id": "..."}``
    a rater opened a session.
``{"type": "ranking", "session_id", "rater_id", "sample_id", "ranking",
   "idempotency_key", "ts"}``
    an accepted ranking; ``ranking`` lists method names best-first.
"""

from __future__ import annotations

import json
import random
import string
import threading
import time
import uuid
from dataclasses import dataclass, field
from pathlib import Path

from .errors import (
    DuplicateSubmission,
    InvalidPermutation,
    MissingOutput,
    SlidekitError,
    UnknownMethod,
)
from .metrics import EloTable, RankingSet, apply_ranking, kendalls_w, top_rank_frequency

LABELS = string.ascii_uppercase


@dataclass(frozen=True)
class RankingRecord:
    sample_id: str
    rater_id: str
    ranking: tuple[str, ...]  # method names, best first
    timestamp: float


@dataclass
class ArenaSession:
    session_id: str
    rater_id: str
    sample_order: list[str]
    labels: dict[str, dict[str, str]]  # sample_id -> label -> method
    submitted: dict[str, str] = field(default_factory=dict)  # sample_id -> idempotency key

    @property
    def next_sample(self) -> str | None:
        for sample_id in self.sample_order:
            if sample_id not in self.submitted:
                return sample_id
        return None

    @property
    def done(self) -> bool:
        return self.next_sample is None


@dataclass(frozen=True)
class ArenaCorpus:
    """Original raster plus one rendering per method, per sample."""

    originals: dict[str, Path]
    outputs: dict[str, dict[str, Path]]  # sample_id -> method -> path

    @classmethod
    def from_directory(cls, root: str | Path, methods: list[str]) -> "ArenaCorpus":
        """Layout: ``<root>/<sample_id>/{original.png, <method>.png}``."""
        root = Path(root)
        originals: dict[str, Path] = {}
        outputs: dict[str, dict[str, Path]] = {}
        for sample_dir in sorted(p for p in root.iterdir() if p.is_dir()):
            original = sample_dir / "original.png"
            if not original.exists():
                continue
            originals[sample_dir.name] = original
            outputs[sample_dir.name] = {
                method: sample_dir / f"{method}.png" for method in methods
            }
        return cls(originals=originals, outputs=outputs)

    def check_complete(self, methods: list[str]) -> None:
        for sample_id, per_method in self.outputs.items():
            for method in methods:
                path = per_method.get(method)
                if path is None or not path.exists():
                    raise MissingOutput(f"method {method!r} lacks output for sample {sample_id!r}")


class ArenaStore:
    """Single-writer arena state with an append-only event log."""

    def __init__(
        self,
        methods: list[str],
        corpus: ArenaCorpus,
        event_log: str | Path,
        k_factor: float = 4.0,
        initial: float = 1000.0,
        seed: int = 0,
    ):
        if len(methods) < 2:
            raise SlidekitError("arena needs at least 2 methods")
        if len(methods) > len(LABELS):
            raise SlidekitError(f"at most {len(LABELS)} methods supported")
        corpus.check_complete(methods)
        self.methods = list(methods)
        self.corpus = corpus
        self.k_factor = k_factor
        self.initial = initial
        self.seed = seed
        self.event_log = Path(event_log)
        self.table = EloTable.create(methods, k_factor=k_factor, initial=initial)
        self.records: list[RankingRecord] = []
        self.sessions: dict[str, ArenaSession] = {}
        self._lock = threading.Lock()
        self._ranked: dict[tuple[str, str], str] = {}  # (rater, sample) -> idempotency key
        if self.event_log.exists() and self.event_log.stat().st_size > 0:
            self._restore()
        else:
            self._append_event(
                {
                    "type": "init",
                    "methods": self.methods,
                    "k_factor": k_factor,
                    "initial": initial,
                    "seed": seed,
                }
            )

    # --- events ---

    def _append_event(self, event: dict) -> None:
        self.event_log.parent.mkdir(parents=True, exist_ok=True)
        with self.event_log.open("a", encoding="utf-8") as fh:
            fh.write(json.dumps(event) + "\n")

    def _restore(self) -> None:
        for line in self.event_log.read_text(encoding="utf-8").splitlines():
            if not line.strip():
                continue
            event = json.loads(line)
            if event["type"] == "init":
                self.table = EloTable.create(
                    event["methods"], k_factor=event["k_factor"], initial=event["initial"]
                )
            elif event["type"] == "session":
                self._make_session(event["session_id"], event["rater_id"])
            elif event["type"] == "ranking":
                self._apply_record(
                    RankingRecord(
                        sample_id=event["sample_id"],
                        rater_id=event["rater_id"],
                        ranking=tuple(event["ranking"]),
                        timestamp=event["ts"],
                    ),
                    session_id=event.get("session_id", ""),
                    idempotency_key=event.get("idempotency_key", ""),
                )

    # --- sessions ---

    def _make_session(self, session_id: str, rater_id: str) -> ArenaSession:
        order = sorted(self.corpus.originals)
        rng = random.Random(f"{self.seed}:{rater_id}")
        rng.shuffle(order)
        labels: dict[str, dict[str, str]] = {}
        for sample_id in order:
            methods = self.methods[:]
            rng.shuffle(methods)
            labels[sample_id] = {LABELS[i]: m for i, m in enumerate(methods)}
        session = ArenaSession(
            session_id=session_id, rater_id=rater_id, sample_order=order, labels=labels
        )
        self.sessions[session_id] = session
        return session

    def create_session(self, rater_id: str) -> ArenaSession:
        with self._lock:
            session = self._make_session(uuid.uuid4().hex, rater_id)
            # a rater resuming sees their previous submissions
            for sample_id in session.sample_order:
                key = self._ranked.get((rater_id, sample_id))
                if key is not None:
                    session.submitted[sample_id] = key
            self._append_event(
                {"type": "session", "session_id": session.session_id, "rater_id": rater_id}
            )
            return session

    def get_session(self, session_id: str) -> ArenaSession:
        session = self.sessions.get(session_id)
        if session is None:
            raise SlidekitError(f"unknown session {session_id!r}")
        return session

    # --- rankings ---

    def _apply_record(self, record: RankingRecord, session_id: str, idempotency_key: str) -> None:
        self.table = apply_ranking(self.table, record.ranking)
        self.records.append(record)
        self._ranked[(record.rater_id, record.sample_id)] = idempotency_key
        session = self.sessions.get(session_id)
        if session is not None:
            session.submitted[record.sample_id] = idempotency_key

    def submit_ranking(
        self,
        session_id: str,
        sample_id: str,
        label_order: list[str],
        idempotency_key: str = "",
    ) -> RankingRecord:
        """Unblind a label permutation, store it, apply its pairwise outcomes."""
        with self._lock:
            session = self.get_session(session_id)
            if sample_id not in session.labels:
                raise SlidekitError(f"sample {sample_id!r} not part of this session")
            label_map = session.labels[sample_id]
            if sorted(label_order) != sorted(label_map):
                raise InvalidPermutation(
                    f"ranking must be a permutation of labels {sorted(label_map)}"
                )
            key = (session.rater_id, sample_id)
            if key in self._ranked:
                if idempotency_key and self._ranked[key] == idempotency_key:
                    for record in self.records:
                        if (record.rater_id, record.sample_id) == key:
                            return record
                raise DuplicateSubmission(f"{key[0]!r} already ranked sample {sample_id!r}")
            ranking = tuple(label_map[label] for label in label_order)
            record = RankingRecord(
                sample_id=sample_id,
                rater_id=session.rater_id,
                ranking=ranking,
                timestamp=time.time(),
            )
            self._apply_record(record, session_id=session_id, idempotency_key=idempotency_key)
            self._append_event(
                {
                    "type": "ranking",
                    "session_id": session_id,
                    "rater_id": record.rater_id,
                    "sample_id": record.sample_id,
                    "ranking": list(record.ranking),
                    "idempotency_key": idempotency_key,
                    "ts": record.timestamp,
                }
            )
            return record

    # --- standings ---

    def completed_raters(self) -> list[str]:
        n_samples = len(self.corpus.originals)
        counts: dict[str, set[str]] = {}
        for record in self.records:
            counts.setdefault(record.rater_id, set()).add(record.sample_id)
        return sorted(r for r, seen in counts.items() if len(seen) == n_samples)

    def agreement(self) -> float | None:
        """Mean per-sample Kendall's W across raters who finished every sample."""
        raters = self.completed_raters()
        if not raters or len(self.methods) < 2:
            return None
        by_sample: dict[str, list[tuple[str, ...]]] = {}
        for record in self.records:
            if record.rater_id in raters:
                by_sample.setdefault(record.sample_id, []).append(record.ranking)
        values = [
            kendalls_w(RankingSet.from_orderings(orderings))
            for orderings in by_sample.values()
        ]
        return sum(values) / len(values) if values else None

    def leaderboard(self) -> dict:
        with self._lock:
            table = self.table
            orderings = [list(r.ranking) for r in self.records]
        top = top_rank_frequency(orderings, methods=self.methods)
        standings = [
            {
                "method": method,
                "elo": table.ratings[method],
                "top_rank_pct": 100.0 * top.get(method, 0.0),
            }
            for method in sorted(self.methods, key=lambda m: -table.ratings[m])
        ]
        return {
            "standings": standings,
            "kendalls_w": self.agreement(),
            "n_rankings": len(self.records),
            "rating_sum": sum(table.ratings.values()),
        }

    def resolve_blind_image(self, session_id: str, sample_id: str, label: str) -> Path:
        session = self.get_session(session_id)
        label_map = session.labels.get(sample_id)
        if label_map is None or label not in label_map:
            raise SlidekitError(f"unknown label {label!r} for sample {sample_id!r}")
        method = label_map[label]
        return self.corpus.outputs[sample_id][method]


def replay_event_log(path: str | Path) -> EloTable:
    """Rebuild the rating table offline from the event log alone."""
    table: EloTable | None = None
    for line in Path(path).read_text(encoding="utf-8").splitlines():
        if not line.strip():
            continue
        event = json.loads(line)
        if event["type"] == "init":
            table = EloTable.create(
                event["methods"], k_factor=event["k_factor"], initial=event["initial"]
            )
        elif event["type"] == "ranking":
            if table is None:
                raise SlidekitError("event log has rankings before init")
            for method in event["ranking"]:
                if method not in table.ratings:
                    raise UnknownMethod(f"method {method!r} not in init event")
            table = apply_ranking(table, event["ranking"])
    if table is None:
        raise SlidekitError("event log has no init event")
    return table
