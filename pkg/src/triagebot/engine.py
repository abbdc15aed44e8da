"""Conversation engine: a triage session is a walk over an intention table.

Each session binds to the table object active when it started and never
migrates; table swaps during the improvement cycle only affect sessions
started afterwards. Every advance appends exactly one user turn and one
bot turn. Unmatched utterances re-prompt the same question and are handed
to the fallback recorder; too many in a row escalate to the responsible
group.
"""

from __future__ import annotations

import threading
import time
import uuid
from dataclasses import dataclass, field
from typing import Callable

from .errors import (
    AnswersExhausted,
    InvalidTable,
    SessionClosed,
    UnknownSession,
)
from .matcher import MatcherConfig, MatchResult, classify_condition
from .model import (
    AFFIRMATIVE,
    NEGATIVE,
    Condition,
    ConditionKind,
    Intention,
    IntentionTable,
    TerminalEvent,
    validate_table,
)

# Pseudo-node ids for outcomes the table does not spell out.
SYNTHETIC_CLOSE_ID = "synthetic-close"
SYNTHETIC_ESCALATION_ID = "synthetic-escalation"

CLOSE_NOT_INCIDENT_REPLY = "Understood — no incident recorded."
ESCALATION_REPLY = "Notify the responsible analyst or group"
CLARIFICATION_PREFIX = "Sorry, I didn't understand. "

DEFAULT_MAX_FALLBACKS = 2


@dataclass
class Turn:
    direction: str  # "bot" | "user"
    text: str
    timestamp: float
    match: dict | None = None  # MatchResult.to_dict(), user turns only
    fallback: bool = False

    def to_dict(self) -> dict:
        return {
            "direction": self.direction,
            "text": self.text,
            "timestamp": self.timestamp,
            "match": self.match,
            "fallback": self.fallback,
        }

    @staticmethod
    def from_dict(d: dict) -> "Turn":
        return Turn(
            direction=d["direction"],
            text=d["text"],
            timestamp=d["timestamp"],
            match=d.get("match"),
            fallback=d.get("fallback", False),
        )


@dataclass
class Session:
    id: str
    table: IntentionTable
    table_version: int
    current: str
    turns: list[Turn] = field(default_factory=list)
    fallback_streak: int = 0
    closed: bool = False
    event: TerminalEvent | None = None
    incident_ref: str | None = None

    @property
    def transcript(self) -> list[Turn]:
        return list(self.turns)

    def to_dict(self) -> dict:
        return {
            "session_id": self.id,
            "table_version": self.table_version,
            "current": self.current,
            "closed": self.closed,
            "event": self.event.value if self.event else None,
            "incident_id": self.incident_ref,
            "turns": [t.to_dict() for t in self.turns],
        }


@dataclass(frozen=True)
class TurnResult:
    reply: str
    terminal: bool
    event: TerminalEvent | None
    fallback: bool
    intention_id: str

    def to_dict(self) -> dict:
        return {
            "reply": self.reply,
            "terminal": self.terminal,
            "event": self.event.value if self.event else None,
            "fallback": self.fallback,
            "intention_id": self.intention_id,
        }


class DialogEngine:
    """Runs sessions over intention tables.

    Calls for one session are serialized by a per-session lock; distinct
    sessions proceed independently. `fallback_store` (anything with a
    `record_fallback(session_id, intention_id, utterance)`) receives every
    unmatched user turn; `observer` receives post-state events for
    persistence.
    """

    def __init__(
        self,
        cfg: MatcherConfig,
        fallback_store=None,
        max_fallbacks: int = DEFAULT_MAX_FALLBACKS,
        clock: Callable[[], float] = time.time,
        observer: Callable[[dict], None] | None = None,
    ):
        self.cfg = cfg
        self.fallback_store = fallback_store
        self.max_fallbacks = max_fallbacks
        self.clock = clock
        self.observer = observer
        self._sessions: dict[str, Session] = {}
        self._locks: dict[str, threading.Lock] = {}
        self._registry_lock = threading.Lock()

    # -- session lifecycle -------------------------------------------------

    def start_session(
        self, table: IntentionTable, incident_ref: str | None = None
    ) -> tuple[Session, str]:
        report = validate_table(table)
        if not report.ok:
            raise InvalidTable(str(report.errors[0]))
        root = table.get(table.root)
        if root.is_terminal:
            raise InvalidTable("root intention must not be terminal")

        session = Session(
            id=uuid.uuid4().hex,
            table=table,
            table_version=table.version,
            current=table.root,
            incident_ref=incident_ref,
        )
        prompt = root.response
        session.turns.append(Turn("bot", prompt, self.clock()))
        with self._registry_lock:
            self._sessions[session.id] = session
            self._locks[session.id] = threading.Lock()
        self._emit(
            {
                "type": "session_started",
                "session_id": session.id,
                "table_version": session.table_version,
                "incident_id": incident_ref,
                "prompt": prompt,
                "timestamp": session.turns[0].timestamp,
            }
        )
        return session, prompt

    def get_session(self, session_id: str) -> Session:
        session = self._sessions.get(session_id)
        if session is None:
            raise UnknownSession(f"no session {session_id!r}")
        return session

    def transcript(self, session_id: str) -> list[Turn]:
        return self.get_session(session_id).transcript

    def restore_session(self, session: Session) -> None:
        """Re-register a session rebuilt from the event log."""
        with self._registry_lock:
            self._sessions[session.id] = session
            self._locks[session.id] = threading.Lock()

    # -- the walk ----------------------------------------------------------

    def advance(self, session_id: str, utterance: str) -> TurnResult:
        session = self.get_session(session_id)
        with self._locks[session_id]:
            if session.closed:
                raise SessionClosed(f"session {session_id} already reached {session.event}")
            node = session.table.get(session.current)
            result = classify_condition(utterance, node, self.cfg)
            now = self.clock()
            session.turns.append(
                Turn("user", utterance, now, match=result.to_dict(),
                     fallback=not result.matched)
            )
            if result.matched:
                session.fallback_streak = 0
                turn_result = self._follow(session, node, result.condition)
            else:
                turn_result = self._fallback(session, node)
            session.turns.append(
                Turn("bot", turn_result.reply, now, fallback=turn_result.fallback)
            )
            self._emit(
                {
                    "type": "turn",
                    "session_id": session.id,
                    "user": session.turns[-2].to_dict(),
                    "bot": session.turns[-1].to_dict(),
                    "current": session.current,
                    "closed": session.closed,
                    "event": session.event.value if session.event else None,
                    "fallback_streak": session.fallback_streak,
                    "result": turn_result.to_dict(),
                }
            )
            return turn_result

    def _follow(self, session: Session, node: Intention, condition: Condition) -> TurnResult:
        row = node.row_for(condition)
        if row is None:
            # Only a Negative can be matched without a declared row; the
            # table leaves that branch undefined, so close the conversation.
            session.current = SYNTHETIC_CLOSE_ID
            session.closed = True
            session.event = TerminalEvent.CLOSE_NOT_INCIDENT
            return TurnResult(
                CLOSE_NOT_INCIDENT_REPLY, True, session.event, False, SYNTHETIC_CLOSE_ID
            )
        target = session.table.get(row.target)
        session.current = target.id
        if target.is_terminal:
            session.closed = True
            session.event = target.terminal_event
            return TurnResult(target.response, True, target.terminal_event, False, target.id)
        return TurnResult(target.response, False, None, False, target.id)

    def _fallback(self, session: Session, node: Intention) -> TurnResult:
        session.fallback_streak += 1
        if self.fallback_store is not None:
            self.fallback_store.record_fallback(
                session.id, node.id, session.turns[-1].text
            )
        if session.fallback_streak >= self.max_fallbacks:
            terminal = session.table.terminal_for_event(TerminalEvent.NOTIFY_RESPONSIBLE)
            session.closed = True
            session.event = TerminalEvent.NOTIFY_RESPONSIBLE
            if terminal is not None:
                session.current = terminal.id
                reply = terminal.response
            else:
                session.current = SYNTHETIC_ESCALATION_ID
                reply = ESCALATION_REPLY
            return TurnResult(reply, True, session.event, True, session.current)
        return TurnResult(
            CLARIFICATION_PREFIX + node.response, False, None, True, node.id
        )

    def _emit(self, event: dict) -> None:
        if self.observer is not None:
            self.observer(event)


def run_path(
    table: IntentionTable, answers: list[Condition]
) -> tuple[TerminalEvent, list[str]]:
    """Deterministic walk applying Affirmative/Negative answers in order.

    Bypasses the matcher entirely; the reference oracle for traversal
    behavior. Returns the terminal event and the visited node ids (the
    synthetic close appears as a pseudo-id).
    """
    report = validate_table(table)
    if not report.ok:
        raise InvalidTable(str(report.errors[0]))
    node = table.get(table.root)
    visited = [node.id]
    if node.is_terminal:
        return node.terminal_event, visited

    for answer in answers:
        if answer.kind not in (ConditionKind.AFFIRMATIVE, ConditionKind.NEGATIVE):
            raise ValueError("run_path answers must be Affirmative or Negative")
        row = node.row_for(answer)
        if row is None:
            visited.append(SYNTHETIC_CLOSE_ID)
            return TerminalEvent.CLOSE_NOT_INCIDENT, visited
        node = table.get(row.target)
        visited.append(node.id)
        if node.is_terminal:
            return node.terminal_event, visited
    raise AnswersExhausted(
        f"ran out of answers at {node.id} after visiting {len(visited)} nodes"
    )


def parse_answer(word: str) -> Condition:
    """Map CLI answer words to run_path conditions."""
    folded = word.strip().casefold()
    if folded in ("yes", "y", "affirmative"):
        return AFFIRMATIVE
    if folded in ("no", "n", "negative"):
        return NEGATIVE
    raise ValueError(f"answer {word!r} is neither yes nor no")
