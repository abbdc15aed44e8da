"""Incident records, their resolution lifecycle, and notification dispatch.

The lifecycle automaton covers the full resolution walk: an incident is
reported, triaged, assigned, corrected, then validated; validation either
resolves it or reopens it back to assignment. Closed is absorbing.
Incident-type samples seed the lexical classifier and can be extended by
any support professional without a rebuild.
"""

from __future__ import annotations

import json
import threading
import time
import uuid
from dataclasses import dataclass, field
from enum import Enum
from importlib import resources
from typing import Callable

import requests

from .errors import ChannelUnavailable, IllegalTransition, UnknownIncident, UnknownType

NOTIFY_URL_ENV = "TRIAGEBOT_NOTIFY_URL"


class LifecycleState(str, Enum):
    REPORTED = "Reported"
    TRIAGED = "Triaged"
    ASSIGNED = "Assigned"
    CORRECTION_APPLIED = "CorrectionApplied"
    UNDER_VALIDATION = "UnderValidation"
    RESOLVED = "Resolved"
    REOPENED = "Reopened"
    CLOSED = "Closed"


# (state, event) -> next state; anything absent is an IllegalTransition.
TRANSITIONS: dict[tuple[LifecycleState, str], LifecycleState] = {
    (LifecycleState.REPORTED, "triaged"): LifecycleState.TRIAGED,
    (LifecycleState.TRIAGED, "assigned"): LifecycleState.ASSIGNED,
    (LifecycleState.ASSIGNED, "correction_applied"): LifecycleState.CORRECTION_APPLIED,
    (LifecycleState.CORRECTION_APPLIED, "validation_started"): LifecycleState.UNDER_VALIDATION,
    (LifecycleState.UNDER_VALIDATION, "validated_ok"): LifecycleState.RESOLVED,
    (LifecycleState.UNDER_VALIDATION, "validated_fail"): LifecycleState.REOPENED,
    (LifecycleState.REOPENED, "assigned"): LifecycleState.ASSIGNED,
    (LifecycleState.RESOLVED, "closed"): LifecycleState.CLOSED,
}

LIFECYCLE_EVENTS = sorted({event for _, event in TRANSITIONS})


def next_state(state: LifecycleState, event: str) -> LifecycleState:
    try:
        return TRANSITIONS[(state, event)]
    except KeyError:
        raise IllegalTransition(state.value, event) from None


@dataclass(frozen=True)
class IncidentType:
    name: str
    description: str


@dataclass
class HistoryEntry:
    state: str
    event: str
    timestamp: float
    actor: str | None = None

    def to_dict(self) -> dict:
        return {
            "state": self.state,
            "event": self.event,
            "timestamp": self.timestamp,
            "actor": self.actor,
        }


@dataclass
class Incident:
    id: str
    type: str
    description: str
    state: LifecycleState
    history: list[HistoryEntry] = field(default_factory=list)
    assigned_group: str | None = None

    def to_dict(self) -> dict:
        return {
            "id": self.id,
            "type": self.type,
            "description": self.description,
            "state": self.state.value,
            "assigned_group": self.assigned_group,
            "history": [h.to_dict() for h in self.history],
        }


@dataclass
class Sample:
    id: str
    incident_type: str
    utterance_text: str
    source: str  # "seed" | "collected"

    def to_dict(self) -> dict:
        return {
            "id": self.id,
            "incident_type": self.incident_type,
            "utterance_text": self.utterance_text,
            "source": self.source,
        }


def load_seed_samples() -> list[tuple[str, str]]:
    """(type name, description) pairs from the shipped incident taxonomy."""
    text = resources.files("triagebot.data").joinpath("incident_samples.json").read_text("utf-8")
    return [(row["type"], row["description"]) for row in json.loads(text)]


class SampleStore:
    """Incident types plus their labeled sample descriptions.

    Reads are lock-free snapshots; appends are serialized. `on_append`
    receives collected samples for persistence.
    """

    def __init__(self, on_append: Callable[[Sample], None] | None = None):
        self._types: dict[str, IncidentType] = {}
        self._samples: list[Sample] = []
        self._lock = threading.Lock()
        self._on_append = on_append

    def seed(self) -> None:
        for name, description in load_seed_samples():
            self.register_type(name, description)
            self._append(Sample(uuid.uuid4().hex, name, description, "seed"), notify=False)

    def register_type(self, name: str, description: str = "") -> IncidentType:
        with self._lock:
            if name not in self._types:
                self._types[name] = IncidentType(name, description)
            return self._types[name]

    def has_type(self, name: str) -> bool:
        return name in self._types

    @property
    def types(self) -> list[IncidentType]:
        return list(self._types.values())

    @property
    def samples(self) -> list[Sample]:
        return list(self._samples)

    def record_sample(self, incident_type: str, utterance_text: str, source: str = "collected") -> str:
        if incident_type not in self._types:
            raise UnknownType(f"incident type {incident_type!r} is not registered")
        if not utterance_text.strip():
            raise ValueError("sample text must be non-empty")
        sample = Sample(uuid.uuid4().hex, incident_type, utterance_text, source)
        self._append(sample, notify=source == "collected")
        return sample.id

    def restore_sample(self, sample: Sample) -> None:
        self._append(sample, notify=False)

    def _append(self, sample: Sample, notify: bool) -> None:
        with self._lock:
            self._samples.append(sample)
        if notify and self._on_append is not None:
            self._on_append(sample)

    def texts_by_type(self) -> dict[str, list[str]]:
        """Ordered mapping consumed by the incident-type classifier."""
        out: dict[str, list[str]] = {t: [] for t in self._types}
        for sample in self._samples:
            out[sample.incident_type].append(sample.utterance_text)
        return out


class IncidentStore:
    """Incident records with per-incident serialized mutations."""

    def __init__(
        self,
        types: SampleStore,
        clock: Callable[[], float] = time.time,
        observer: Callable[[dict], None] | None = None,
    ):
        self._types = types
        self._incidents: dict[str, Incident] = {}
        self._locks: dict[str, threading.Lock] = {}
        self._registry_lock = threading.Lock()
        self.clock = clock
        self.observer = observer

    def open_incident(self, incident_type: str, description: str) -> Incident:
        if not self._types.has_type(incident_type):
            raise UnknownType(f"incident type {incident_type!r} is not registered")
        now = self.clock()
        incident = Incident(
            id=f"inc-{uuid.uuid4().hex[:12]}",
            type=incident_type,
            description=description,
            state=LifecycleState.REPORTED,
            history=[HistoryEntry(LifecycleState.REPORTED.value, "reported", now)],
        )
        with self._registry_lock:
            self._incidents[incident.id] = incident
            self._locks[incident.id] = threading.Lock()
        self._emit({"type": "opened", "incident": incident.to_dict()})
        return incident

    def get(self, incident_id: str) -> Incident:
        incident = self._incidents.get(incident_id)
        if incident is None:
            raise UnknownIncident(f"no incident {incident_id!r}")
        return incident

    def transition(self, incident_id: str, event: str, actor: str | None = None) -> Incident:
        incident = self.get(incident_id)
        with self._locks[incident_id]:
            new_state = next_state(incident.state, event)
            old_state = incident.state
            incident.state = new_state
            incident.history.append(
                HistoryEntry(new_state.value, event, self.clock(), actor)
            )
            if event == "assigned" and actor:
                incident.assigned_group = actor
        self._emit(
            {
                "type": "event",
                "incident_id": incident_id,
                "event": event,
                "from": old_state.value,
                "to": new_state.value,
                "actor": actor,
                "timestamp": incident.history[-1].timestamp,
            }
        )
        return incident

    def restore(self, incident: Incident) -> None:
        with self._registry_lock:
            self._incidents[incident.id] = incident
            self._locks[incident.id] = threading.Lock()

    def replay_event(self, incident_id: str, event: str, to: str, actor: str | None, timestamp: float) -> None:
        incident = self.get(incident_id)
        incident.state = LifecycleState(to)
        incident.history.append(HistoryEntry(to, event, timestamp, actor))
        if event == "assigned" and actor:
            incident.assigned_group = actor

    def _emit(self, event: dict) -> None:
        if self.observer is not None:
            self.observer(event)


@dataclass
class NotificationRecord:
    id: str
    key: str  # idempotency key: session id + event
    event: str
    session_id: str
    incident_ref: str | None
    target: str
    channel: str  # "webhook" | "log"
    delivered: bool
    payload: str
    timestamp: float

    def to_dict(self) -> dict:
        return {
            "id": self.id,
            "key": self.key,
            "event": self.event,
            "session_id": self.session_id,
            "incident_id": self.incident_ref,
            "target": self.target,
            "channel": self.channel,
            "delivered": self.delivered,
            "payload": self.payload,
            "timestamp": self.timestamp,
        }


def default_target(event: str, incident: Incident | None = None) -> str:
    # AlignUser speaks to whoever reported the incident; everything else
    # goes to the responsible support group.
    if event == "AlignUser":
        return "reporting-user"
    if incident is not None and incident.assigned_group:
        return incident.assigned_group
    return "support-group"


class NotificationDispatcher:
    """Sends terminal-event notifications exactly once per (session, event).

    The webhook channel POSTs the JSON payload to `notify_url` with one
    retry; the log channel always succeeds (persistence is the delivery).
    Duplicate dispatches return the already-persisted record untouched.
    """

    def __init__(
        self,
        notify_url: str | None = None,
        clock: Callable[[], float] = time.time,
        observer: Callable[[dict], None] | None = None,
        http_post: Callable | None = None,
        timeout: float = 3.0,
    ):
        self.notify_url = notify_url
        self.clock = clock
        self.observer = observer
        self._http_post = http_post or requests.post
        self.timeout = timeout
        self._records: dict[str, NotificationRecord] = {}
        self._lock = threading.Lock()

    @property
    def records(self) -> list[NotificationRecord]:
        return list(self._records.values())

    def restore(self, record: NotificationRecord) -> None:
        self._records[record.key] = record

    def dispatch(
        self,
        event: str,
        session_id: str,
        incident_ref: str | None,
        target: str,
        summary: str = "",
    ) -> NotificationRecord:
        if event not in ("NotifyResponsible", "AlignUser"):
            raise ValueError(f"no notification defined for event {event!r}")
        key = f"{session_id}:{event}"
        with self._lock:
            existing = self._records.get(key)
            if existing is not None:
                return existing
            now = self.clock()
            payload = json.dumps(
                {
                    "event": event,
                    "session_id": session_id,
                    "incident_id": incident_ref,
                    "target": target,
                    "summary": summary,
                    "timestamp": now,
                },
                ensure_ascii=False,
            )
            channel = "webhook" if self.notify_url else "log"
            delivered = True
            failure = None
            if channel == "webhook":
                delivered = self._post_with_retry(payload)
                if not delivered:
                    failure = ChannelUnavailable(
                        f"webhook {self.notify_url} unreachable after retry"
                    )
            record = NotificationRecord(
                id=uuid.uuid4().hex,
                key=key,
                event=event,
                session_id=session_id,
                incident_ref=incident_ref,
                target=target,
                channel=channel,
                delivered=delivered,
                payload=payload,
                timestamp=now,
            )
            self._records[key] = record
            if self.observer is not None:
                self.observer(record.to_dict())
        if failure is not None:
            raise failure
        return record

    def _post_with_retry(self, payload: str) -> bool:
        for _ in range(2):
            try:
                response = self._http_post(
                    self.notify_url,
                    data=payload.encode("utf-8"),
                    headers={"Content-Type": "application/json"},
                    timeout=self.timeout,
                )
                if 200 <= response.status_code < 300:
                    return True
            except requests.RequestException:
                continue
        return False
