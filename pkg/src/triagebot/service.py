"""Service wiring: persistence, the active-table registry, and recovery.

Every aggregate appends to its own JSON-lines log under the data
directory; table versions are whole JSON documents under `tables/`.
Startup replays the logs, so killing the process loses nothing that was
acknowledged. No external database.

    data/
      sessions.jsonl        session starts and turns (post-state events)
      incidents.jsonl       incident opens and lifecycle events
      fallbacks.jsonl       fallback records and resolutions
      notifications.jsonl   one line per dispatched notification
      samples.jsonl         collected (non-seed) incident samples
      tables/v<N>.json      every imported or improved table version
"""

from __future__ import annotations

import json
import os
import re
import threading
import time
from pathlib import Path
from typing import Callable

from .engine import DialogEngine, Session, Turn, TurnResult
from .errors import NoActiveTable, StorageError
from .improvement import (
    FallbackRecord,
    FallbackStore,
    Suggestion,
    apply_suggestion,
    suggest_training_phrases,
)
from .incidents import (
    HistoryEntry,
    Incident,
    IncidentStore,
    LifecycleState,
    NotificationDispatcher,
    NotificationRecord,
    Sample,
    SampleStore,
    default_target,
)
from .matcher import MatcherConfig, load_matcher_config
from .model import (
    IntentionTable,
    TerminalEvent,
    ValidationReport,
    export_table,
    parse_table,
    validate_table,
)

DATA_DIR_ENV = "TRIAGEBOT_DATA_DIR"
TABLE_FILE_RE = re.compile(r"^v(\d+)\.json$")


class JsonlLog:
    """One append-only JSON-lines file; appends are atomic per line."""

    def __init__(self, path: Path):
        self.path = path
        self._lock = threading.Lock()

    def append(self, record: dict) -> None:
        line = json.dumps(record, ensure_ascii=False)
        try:
            with self._lock, open(self.path, "a", encoding="utf-8") as fh:
                fh.write(line + "\n")
                fh.flush()
        except OSError as exc:
            raise StorageError(f"cannot append to {self.path}: {exc}") from exc

    def replay(self) -> list[dict]:
        if not self.path.exists():
            return []
        out = []
        with open(self.path, encoding="utf-8") as fh:
            for line in fh:
                line = line.strip()
                if line:
                    out.append(json.loads(line))
        return out


class TableRegistry:
    """Owns the active table; swaps are atomic and every version persists."""

    def __init__(self, tables_dir: Path):
        self.tables_dir = tables_dir
        self._lock = threading.Lock()
        self._active: IntentionTable | None = None
        self._versions: dict[int, IntentionTable] = {}

    @property
    def active(self) -> IntentionTable | None:
        return self._active

    def require_active(self) -> IntentionTable:
        table = self._active
        if table is None:
            raise NoActiveTable("import a table first")
        return table

    def version(self, number: int) -> IntentionTable | None:
        return self._versions.get(number)

    def activate(self, table: IntentionTable, persist: bool = True) -> None:
        with self._lock:
            if persist:
                path = self.tables_dir / f"v{table.version}.json"
                path.write_text(export_table(table, "json"), encoding="utf-8")
            self._versions[table.version] = table
            self._active = table

    def next_version(self) -> int:
        return self._active.version + 1 if self._active else 1

    def load_all(self) -> None:
        versions = []
        for name in os.listdir(self.tables_dir):
            m = TABLE_FILE_RE.match(name)
            if m:
                versions.append(int(m.group(1)))
        for number in sorted(versions):
            text = (self.tables_dir / f"v{number}.json").read_text(encoding="utf-8")
            table = parse_table(text, "json")
            self._versions[number] = table
        if versions:
            self._active = self._versions[max(versions)]


class TriageService:
    """Everything the API and CLI need, wired over one data directory."""

    def __init__(
        self,
        data_dir: str | Path,
        matcher_config_path: str | None = None,
        notify_url: str | None = None,
        clock: Callable[[], float] = time.time,
        max_fallbacks: int | None = None,
        http_post: Callable | None = None,
    ):
        self.data_dir = Path(data_dir)
        self.data_dir.mkdir(parents=True, exist_ok=True)
        (self.data_dir / "tables").mkdir(exist_ok=True)
        self.clock = clock

        self.cfg: MatcherConfig = load_matcher_config(matcher_config_path)

        self._session_log = JsonlLog(self.data_dir / "sessions.jsonl")
        self._incident_log = JsonlLog(self.data_dir / "incidents.jsonl")
        self._fallback_log = JsonlLog(self.data_dir / "fallbacks.jsonl")
        self._notification_log = JsonlLog(self.data_dir / "notifications.jsonl")
        self._sample_log = JsonlLog(self.data_dir / "samples.jsonl")

        self.registry = TableRegistry(self.data_dir / "tables")
        self.fallbacks = FallbackStore(
            clock=clock,
            on_append=lambda r: self._fallback_log.append({"type": "fallback", **r.to_dict()}),
            on_resolve=lambda ids: self._fallback_log.append(
                {"type": "resolved", "ids": ids, "timestamp": self.clock()}
            ),
        )
        self.samples = SampleStore(
            on_append=lambda s: self._sample_log.append(s.to_dict())
        )
        self.samples.seed()
        self.incidents = IncidentStore(
            self.samples, clock=clock, observer=self._incident_log.append
        )
        self.notifier = NotificationDispatcher(
            notify_url=notify_url or os.environ.get("TRIAGEBOT_NOTIFY_URL"),
            clock=clock,
            observer=self._notification_log.append,
            http_post=http_post,
        )
        self.engine = DialogEngine(
            self.cfg,
            fallback_store=self.fallbacks,
            clock=clock,
            observer=self._session_log.append,
            **({"max_fallbacks": max_fallbacks} if max_fallbacks else {}),
        )
        self._recover()

    # -- recovery ----------------------------------------------------------

    def _recover(self) -> None:
        self.registry.load_all()

        for entry in self._sample_log.replay():
            self.samples.restore_sample(Sample(**entry))

        for entry in self._fallback_log.replay():
            if entry.get("type") == "resolved":
                self.fallbacks.mark_resolved(entry["ids"])
            else:
                record = {k: v for k, v in entry.items() if k != "type"}
                self.fallbacks.restore(FallbackRecord.from_dict(record))

        for entry in self._incident_log.replay():
            if entry["type"] == "opened":
                doc = entry["incident"]
                self.incidents.restore(
                    Incident(
                        id=doc["id"],
                        type=doc["type"],
                        description=doc["description"],
                        state=LifecycleState(doc["state"]),
                        history=[HistoryEntry(**h) for h in doc["history"]],
                        assigned_group=doc.get("assigned_group"),
                    )
                )
            elif entry["type"] == "event":
                self.incidents.replay_event(
                    entry["incident_id"],
                    entry["event"],
                    entry["to"],
                    entry.get("actor"),
                    entry["timestamp"],
                )

        for entry in self._notification_log.replay():
            entry = dict(entry)
            entry["incident_ref"] = entry.pop("incident_id", None)
            self.notifier.restore(NotificationRecord(**entry))

        for entry in self._session_log.replay():
            if entry["type"] == "session_started":
                table = self.registry.version(entry["table_version"])
                if table is None:
                    continue  # table file lost; session not recoverable
                session = Session(
                    id=entry["session_id"],
                    table=table,
                    table_version=entry["table_version"],
                    current=table.root,
                    incident_ref=entry.get("incident_id"),
                )
                session.turns.append(
                    Turn("bot", entry["prompt"], entry["timestamp"])
                )
                self.engine.restore_session(session)
            elif entry["type"] == "turn":
                try:
                    session = self.engine.get_session(entry["session_id"])
                except Exception:
                    continue
                session.turns.append(Turn.from_dict(entry["user"]))
                session.turns.append(Turn.from_dict(entry["bot"]))
                session.current = entry["current"]
                session.closed = entry["closed"]
                session.event = (
                    TerminalEvent(entry["event"]) if entry.get("event") else None
                )
                session.fallback_streak = entry["fallback_streak"]

    # -- tables ------------------------------------------------------------

    def import_table(self, text: str, fmt: str | None = None) -> ValidationReport:
        table = parse_table(text, fmt)
        report = validate_table(table)
        if report.ok:
            # Active version must grow monotonically across imports; a
            # document carrying a higher version than the bump keeps it.
            table.version = max(table.version, self.registry.next_version())
            self.registry.activate(table)
        return report

    def active_table(self) -> IntentionTable:
        return self.registry.require_active()

    # -- sessions ----------------------------------------------------------

    def create_session(self, incident_ref: str | None = None) -> tuple[Session, str]:
        table = self.registry.require_active()
        return self.engine.start_session(table, incident_ref=incident_ref)

    def post_message(self, session_id: str, text: str) -> TurnResult:
        result = self.engine.advance(session_id, text)
        if result.terminal and result.event in (
            TerminalEvent.NOTIFY_RESPONSIBLE,
            TerminalEvent.ALIGN_USER,
        ):
            session = self.engine.get_session(session_id)
            incident = None
            if session.incident_ref:
                try:
                    incident = self.incidents.get(session.incident_ref)
                except Exception:
                    incident = None
            try:
                self.notifier.dispatch(
                    result.event.value,
                    session_id,
                    session.incident_ref,
                    default_target(result.event.value, incident),
                    summary=result.reply,
                )
            except Exception:
                pass  # delivery failure is recorded on the notification itself
        return result

    # -- improvement -------------------------------------------------------

    def fallback_report(self, window_from: float, window_to: float):
        return self.fallbacks.report(window_from, window_to)

    def suggestions(self, window_from: float, window_to: float, min_support: int = 2) -> list[Suggestion]:
        report = self.fallbacks.report(window_from, window_to)
        return suggest_training_phrases(
            report, self.registry.require_active(), self.cfg, min_support
        )

    def apply_suggestion(self, suggestion: Suggestion, reviewed_condition) -> IntentionTable:
        table = self.registry.require_active()
        new_table = apply_suggestion(
            table, suggestion, reviewed_condition, store=self.fallbacks
        )
        self.registry.activate(new_table)
        return new_table


def resolve_data_dir(explicit: str | None = None, default: str = "triagebot-data") -> Path:
    return Path(explicit or os.environ.get(DATA_DIR_ENV) or default)
