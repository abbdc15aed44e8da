"""The continuous-improvement cycle: capture what the bot did not understand.

Unmatched utterances become fallback records; reports aggregate them per
intention; recurring utterances become suggested training phrases; a human
reviewer assigns each suggestion a condition and applying it produces the
next table version. The system never trains itself silently.
"""

from __future__ import annotations

import threading
import time
import uuid
from dataclasses import dataclass, field
from typing import Callable

from .errors import InvalidTable, InvalidWindow, UnknownCondition, UnknownIntention
from .matcher import MatcherConfig, normalize, score
from .model import (
    AFFIRMATIVE,
    NEGATIVE,
    Condition,
    Intention,
    IntentionTable,
    validate_table,
)

DEFAULT_MIN_SUPPORT = 2


@dataclass
class FallbackRecord:
    id: str
    session_id: str
    intention_id: str
    utterance: str
    normalized: list[str]
    timestamp: float
    resolved: bool = False

    def to_dict(self) -> dict:
        return {
            "id": self.id,
            "session_id": self.session_id,
            "intention_id": self.intention_id,
            "utterance": self.utterance,
            "normalized": self.normalized,
            "timestamp": self.timestamp,
            "resolved": self.resolved,
        }

    @staticmethod
    def from_dict(d: dict) -> "FallbackRecord":
        return FallbackRecord(
            id=d["id"],
            session_id=d["session_id"],
            intention_id=d["intention_id"],
            utterance=d["utterance"],
            normalized=list(d["normalized"]),
            timestamp=d["timestamp"],
            resolved=d.get("resolved", False),
        )


@dataclass(frozen=True)
class Suggestion:
    intention_id: str
    condition: Condition
    phrase: str
    supporting_records: tuple[str, ...]

    def to_dict(self) -> dict:
        return {
            "intention_id": self.intention_id,
            "condition": self.condition.key,
            "phrase": self.phrase,
            "supporting_records": list(self.supporting_records),
        }


@dataclass
class FallbackReport:
    window_from: float
    window_to: float
    per_intention: dict[str, int]
    top_utterances: list[tuple[str, int]]
    records: list[FallbackRecord] = field(default_factory=list)

    @property
    def total(self) -> int:
        return sum(self.per_intention.values())

    def to_dict(self) -> dict:
        return {
            "window": {"from": self.window_from, "to": self.window_to},
            "total": self.total,
            "per_intention": self.per_intention,
            "top_utterances": [
                {"utterance": u, "count": c} for u, c in self.top_utterances
            ],
        }


class FallbackStore:
    """Append-only store of fallback records.

    `on_append` and `on_resolve` hooks receive every change for
    persistence; appends may come from many sessions concurrently.
    """

    def __init__(
        self,
        clock: Callable[[], float] = time.time,
        on_append: Callable[[FallbackRecord], None] | None = None,
        on_resolve: Callable[[list[str]], None] | None = None,
    ):
        self.clock = clock
        self._records: list[FallbackRecord] = []
        self._by_id: dict[str, FallbackRecord] = {}
        self._lock = threading.Lock()
        self._on_append = on_append
        self._on_resolve = on_resolve

    @property
    def records(self) -> list[FallbackRecord]:
        return list(self._records)

    def record_fallback(self, session_id: str, intention_id: str, utterance: str) -> FallbackRecord:
        record = FallbackRecord(
            id=uuid.uuid4().hex,
            session_id=session_id,
            intention_id=intention_id,
            utterance=utterance,
            normalized=normalize(utterance),
            timestamp=self.clock(),
        )
        with self._lock:
            self._records.append(record)
            self._by_id[record.id] = record
        if self._on_append is not None:
            self._on_append(record)
        return record

    def restore(self, record: FallbackRecord) -> None:
        with self._lock:
            self._records.append(record)
            self._by_id[record.id] = record

    def resolve(self, record_ids: list[str]) -> None:
        with self._lock:
            for rid in record_ids:
                record = self._by_id.get(rid)
                if record is not None:
                    record.resolved = True
        if self._on_resolve is not None:
            self._on_resolve(list(record_ids))

    def mark_resolved(self, record_ids: list[str]) -> None:
        """Replay-time resolve: no persistence hook."""
        with self._lock:
            for rid in record_ids:
                record = self._by_id.get(rid)
                if record is not None:
                    record.resolved = True

    def report(self, window_from: float, window_to: float) -> FallbackReport:
        if window_from > window_to:
            raise InvalidWindow(f"from {window_from} > to {window_to}")
        matching = [
            r for r in self._records if window_from <= r.timestamp <= window_to
        ]
        per_intention: dict[str, int] = {}
        groups: dict[str, tuple[str, int]] = {}  # normalized text -> (first raw, count)
        for record in matching:
            per_intention[record.intention_id] = per_intention.get(record.intention_id, 0) + 1
            key = " ".join(record.normalized)
            raw, count = groups.get(key, (record.utterance, 0))
            groups[key] = (raw, count + 1)
        top = sorted(groups.values(), key=lambda rc: (-rc[1], rc[0]))
        return FallbackReport(
            window_from=window_from,
            window_to=window_to,
            per_intention=dict(sorted(per_intention.items())),
            top_utterances=top,
            records=matching,
        )


def fallback_report(store: FallbackStore, window_from: float, window_to: float) -> FallbackReport:
    return store.report(window_from, window_to)


def suggest_training_phrases(
    report: FallbackReport,
    table: IntentionTable,
    cfg: MatcherConfig,
    min_support: int = DEFAULT_MIN_SUPPORT,
) -> list[Suggestion]:
    """One suggestion per (intention, utterance) group seen at least
    `min_support` times, phrased verbatim from the records.

    The proposed condition is only a default for the reviewer: whichever
    polarity lexicon scores the utterance higher, Affirmative on a tie.
    """
    validation = validate_table(table)
    if not validation.ok:
        raise InvalidTable(str(validation.errors[0]))

    groups: dict[tuple[str, str], list[FallbackRecord]] = {}
    for record in report.records:
        key = (record.intention_id, " ".join(record.normalized))
        groups.setdefault(key, []).append(record)

    suggestions = []
    for (intention_id, _), records in sorted(
        groups.items(), key=lambda kv: (-len(kv[1]), kv[0])
    ):
        if len(records) < min_support:
            continue
        node = table.get(intention_id)
        if node is None or node.is_terminal:
            continue
        tokens = records[0].normalized
        affirmative_score = max(score(tokens, normalize(p)) for p in cfg.affirmative)
        negative_score = max(score(tokens, normalize(p)) for p in cfg.negative)
        condition = AFFIRMATIVE if affirmative_score >= negative_score else NEGATIVE
        suggestions.append(
            Suggestion(
                intention_id=intention_id,
                condition=condition,
                phrase=records[0].utterance,
                supporting_records=tuple(r.id for r in records),
            )
        )
    return suggestions


def add_training_phrase(
    table: IntentionTable, intention_id: str, condition: Condition, phrase: str
) -> IntentionTable:
    """New table, version + 1, with `phrase` on the given condition.

    The input table is untouched; sessions bound to it are unaffected.
    """
    node = table.get(intention_id)
    if node is None:
        raise UnknownIntention(f"no intention {intention_id!r}")
    if node.row_for(condition) is None:
        raise UnknownCondition(
            f"{intention_id} has no {condition.key!r} condition"
        )
    intentions = []
    for intention in table.intentions:
        phrases = {k: list(v) for k, v in intention.training_phrases.items()}
        if intention.id == intention_id:
            phrases.setdefault(condition.key, []).append(phrase)
        intentions.append(
            Intention(
                id=intention.id,
                rows=list(intention.rows),
                training_phrases=phrases,
                terminal_event=intention.terminal_event,
            )
        )
    return IntentionTable(
        version=table.version + 1, intentions=intentions, root=table.root
    )


def apply_suggestion(
    table: IntentionTable,
    suggestion: Suggestion,
    reviewed_condition: Condition,
    store: FallbackStore | None = None,
) -> IntentionTable:
    """Apply a reviewed suggestion: new table version, records resolved."""
    new_table = add_training_phrase(
        table, suggestion.intention_id, reviewed_condition, suggestion.phrase
    )
    if store is not None:
        store.resolve(list(suggestion.supporting_records))
    return new_table
