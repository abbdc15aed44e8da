"""Intention tables: the portable decision-tree artifact.

An intention table is a versioned set of intentions. Each intention asks one
question (its response) and routes the analyst's answer through condition
rows (Yes / No / custom phrase) to another intention, or marks a terminal
outcome. Tables travel as CSV (the classic four-column shape) or as JSON
(which additionally carries training phrases and explicit terminal events).

Tables are immutable values once built; every mutation-like operation
returns a new table.
"""

from __future__ import annotations

import csv
import io
import json
import re
from dataclasses import dataclass, field
from enum import Enum

from .errors import ActionGrammarError, FormatError, InvalidTable

CSV_HEADER = ["intention", "response", "condition", "action"]

ACTION_PREFIX_RE = re.compile(r"^proceed\s+for\s+intention\s+(\S+)$", re.IGNORECASE)
INTENTION_NN_RE = re.compile(r"^intention-(\d+)$")


class ConditionKind(str, Enum):
    AFFIRMATIVE = "affirmative"
    NEGATIVE = "negative"
    PHRASE = "phrase"


@dataclass(frozen=True)
class Condition:
    """The interpreted meaning of a user reply: yes, no, or a custom phrase."""

    kind: ConditionKind
    phrase: str | None = None

    @property
    def key(self) -> str:
        """Stable string key used in JSON documents and phrase maps."""
        if self.kind is ConditionKind.PHRASE:
            return f"phrase:{self.phrase}"
        return self.kind.value

    @staticmethod
    def from_key(key: str) -> "Condition":
        if key == ConditionKind.AFFIRMATIVE.value:
            return AFFIRMATIVE
        if key == ConditionKind.NEGATIVE.value:
            return NEGATIVE
        if key.startswith("phrase:") and len(key) > len("phrase:"):
            return Condition(ConditionKind.PHRASE, key[len("phrase:"):])
        raise FormatError(f"unknown condition key: {key!r}")


AFFIRMATIVE = Condition(ConditionKind.AFFIRMATIVE)
NEGATIVE = Condition(ConditionKind.NEGATIVE)


class TerminalEvent(str, Enum):
    NOTIFY_RESPONSIBLE = "NotifyResponsible"
    ALIGN_USER = "AlignUser"
    CLOSE_NOT_INCIDENT = "CloseNotIncident"


# Terminal intentions in the CSV shape carry their outcome only as response
# prose; these are the recognized texts.
RESPONSE_EVENT_MAP = {
    "notify the responsible analyst or group": TerminalEvent.NOTIFY_RESPONSIBLE,
    "align user over fix": TerminalEvent.ALIGN_USER,
}


@dataclass(frozen=True)
class TransitionRow:
    """One source row: condition plus ProceedTo target, or a terminal marker.

    condition and target are None together (the terminal marker) or set
    together; a row with only one of them is rejected at parse time.
    """

    intention: str
    response: str
    condition: Condition | None
    target: str | None

    @property
    def is_terminal_marker(self) -> bool:
        return self.condition is None


@dataclass
class Intention:
    """One node of the dialog tree: an id, a question, and its routing rows."""

    id: str
    rows: list[TransitionRow]
    training_phrases: dict[str, list[str]] = field(default_factory=dict)
    terminal_event: TerminalEvent | None = None

    def __post_init__(self):
        # Canonical form never stores empty phrase lists; keeps round-trip
        # equality independent of "absent vs empty" in source documents.
        self.training_phrases = {
            k: list(v) for k, v in self.training_phrases.items() if v
        }

    @property
    def response(self) -> str:
        return self.rows[0].response if self.rows else ""

    @property
    def transitions(self) -> list[TransitionRow]:
        """Outgoing rows only (terminal markers excluded)."""
        return [r for r in self.rows if r.condition is not None]

    @property
    def is_terminal(self) -> bool:
        return any(r.is_terminal_marker for r in self.rows)

    @property
    def conditions(self) -> list[Condition]:
        return [r.condition for r in self.transitions]

    def row_for(self, condition: Condition) -> TransitionRow | None:
        for r in self.transitions:
            if r.condition == condition:
                return r
        return None

    def phrases_for(self, condition: Condition) -> list[str]:
        return self.training_phrases.get(condition.key, [])


@dataclass
class IntentionTable:
    version: int
    intentions: list[Intention]
    root: str

    def __post_init__(self):
        self._by_id = {i.id: i for i in self.intentions}

    def get(self, intention_id: str) -> Intention | None:
        return self._by_id.get(intention_id)

    def __contains__(self, intention_id: str) -> bool:
        return intention_id in self._by_id

    @property
    def row_count(self) -> int:
        return sum(len(i.rows) for i in self.intentions)

    def terminal_for_event(self, event: TerminalEvent) -> Intention | None:
        for i in self.intentions:
            if i.is_terminal and i.terminal_event is event:
                return i
        return None

    def structurally_equal(self, other: "IntentionTable") -> bool:
        """Equality of content (root, intentions, rows, phrases, events).

        Version is bookkeeping owned by the import/improvement pipeline and
        is deliberately excluded; the CSV wire format cannot carry it.
        """
        return (
            self.root == other.root
            and self.intentions == other.intentions
        )


@dataclass(frozen=True)
class Finding:
    severity: str  # "error" | "warning"
    code: str
    message: str
    location: str  # intention id, possibly with a row index suffix

    def __str__(self) -> str:
        return f"{self.severity.upper()} {self.code} @{self.location} {self.message}"


@dataclass
class ValidationReport:
    findings: list[Finding]

    @property
    def ok(self) -> bool:
        return not any(f.severity == "error" for f in self.findings)

    @property
    def errors(self) -> list[Finding]:
        return [f for f in self.findings if f.severity == "error"]

    @property
    def warnings(self) -> list[Finding]:
        return [f for f in self.findings if f.severity == "warning"]

    def to_dict(self) -> dict:
        return {
            "ok": self.ok,
            "findings": [
                {
                    "severity": f.severity,
                    "code": f.code,
                    "message": f.message,
                    "location": f.location,
                }
                for f in self.findings
            ],
        }


@dataclass
class TableDiff:
    added: list[str]
    removed: list[str]
    modified: list[str]
    notes: dict[str, list[str]]
    new_version: int
    replacements: dict[str, Intention] = field(default_factory=dict)

    @property
    def empty(self) -> bool:
        return not (self.added or self.removed or self.modified)

    def apply_to(self, table: IntentionTable) -> IntentionTable:
        """Reconstruct the newer table from the older one plus this diff."""
        kept = [
            self.replacements.get(i.id, i)
            for i in table.intentions
            if i.id not in self.removed
        ]
        existing = {i.id for i in kept}
        kept.extend(self.replacements[a] for a in self.added if a not in existing)
        root = _derive_root(kept) or (kept[0].id if kept else "")
        return IntentionTable(version=self.new_version, intentions=kept, root=root)


def canonical_id(raw: str) -> str:
    """Canonical lowercase token form of an intention id.

    "Intention 02" -> "intention-02"; numeric suffixes are zero-padded to
    two digits so "intention-2" and "Intention 02" name the same node.
    """
    token = re.sub(r"[\s_]+", "-", raw.strip().lower())
    token = re.sub(r"[^\w-]", "", token)
    token = re.sub(r"-+", "-", token).strip("-")
    if not token:
        raise FormatError(f"intention id {raw!r} is empty after canonicalization")
    m = INTENTION_NN_RE.match(token)
    if m:
        token = f"intention-{int(m.group(1)):02d}"
    return token


def parse_action(text: str) -> str:
    """Parse a ProceedTo action cell into the target's canonical id."""
    m = ACTION_PREFIX_RE.match(text.strip())
    if not m:
        raise ActionGrammarError(f"action {text!r} does not match 'Proceed for intention NN'")
    token = m.group(1)
    if token.isdigit():
        return f"intention-{int(token):02d}"
    return canonical_id(token)


def infer_terminal_event(response: str) -> TerminalEvent:
    # Unrecognized terminal prose escalates rather than silently closing.
    return RESPONSE_EVENT_MAP.get(
        response.strip().casefold(), TerminalEvent.NOTIFY_RESPONSIBLE
    )


def _derive_root(intentions: list[Intention]) -> str | None:
    """The unique intention no ProceedTo action references, if there is one."""
    targets = {
        r.target for i in intentions for r in i.transitions if r.target is not None
    }
    roots = [i.id for i in intentions if i.id not in targets]
    return roots[0] if len(roots) == 1 else None


def parse_table(text: str, fmt: str | None = None) -> IntentionTable:
    """Parse a CSV or JSON intention-table document.

    The format is sniffed from the first non-blank character unless given
    explicitly ("csv" or "json"). Structural problems (dangling targets,
    cycles, duplicate conditions) are left for validate_table; only document
    shape and the action grammar are enforced here.
    """
    if fmt is None:
        stripped = text.lstrip("﻿ \t\r\n")
        fmt = "json" if stripped.startswith("{") else "csv"
    if fmt == "json":
        return _parse_json(text)
    if fmt == "csv":
        return _parse_csv(text)
    raise FormatError(f"unknown table format: {fmt!r}")


def _parse_csv(text: str) -> IntentionTable:
    text = text.lstrip("﻿")
    if not text.strip():
        raise FormatError("empty document")
    try:
        rows = list(csv.reader(io.StringIO(text)))
    except (csv.Error, UnicodeError) as exc:
        raise FormatError(f"malformed CSV: {exc}") from exc
    rows = [r for r in rows if r]  # blank lines are tolerated
    if not rows:
        raise FormatError("empty document")
    if rows[0] != CSV_HEADER:
        raise FormatError(
            f"wrong header: expected {','.join(CSV_HEADER)!r}, got {','.join(rows[0])!r}"
        )

    parsed: list[TransitionRow] = []
    for lineno, cells in enumerate(rows[1:], start=2):
        if len(cells) != 4:
            raise FormatError(f"line {lineno}: expected 4 fields, got {len(cells)}")
        raw_id, response, cond_cell, action_cell = cells
        intention_id = canonical_id(raw_id)
        if not response.strip():
            raise FormatError(f"line {lineno}: empty response")
        cond_cell = cond_cell.strip()
        action_cell = action_cell.strip()
        if not cond_cell and not action_cell:
            condition, target = None, None
        elif not cond_cell:
            raise FormatError(f"line {lineno}: action without condition")
        elif not action_cell:
            raise FormatError(f"line {lineno}: condition without action")
        else:
            condition = _parse_condition_cell(cond_cell)
            target = parse_action(action_cell)
        parsed.append(TransitionRow(intention_id, response, condition, target))

    return _assemble(parsed, version=1, declared_root=None, phrases={}, events={})


def _parse_condition_cell(cell: str) -> Condition:
    folded = cell.casefold()
    if folded == "yes":
        return AFFIRMATIVE
    if folded == "no":
        return NEGATIVE
    return Condition(ConditionKind.PHRASE, cell)


def _parse_json(text: str) -> IntentionTable:
    try:
        doc = json.loads(text)
    except json.JSONDecodeError as exc:
        raise FormatError(f"malformed JSON: {exc}") from exc
    if not isinstance(doc, dict):
        raise FormatError("top-level JSON value must be an object")
    if "intentions" not in doc or not isinstance(doc["intentions"], list):
        raise FormatError("missing 'intentions' array")
    version = doc.get("version", 1)
    if not isinstance(version, int) or version < 1:
        raise FormatError(f"bad version: {version!r}")

    parsed: list[TransitionRow] = []
    phrases: dict[str, dict[str, list[str]]] = {}
    events: dict[str, TerminalEvent] = {}
    for entry in doc["intentions"]:
        if not isinstance(entry, dict):
            raise FormatError("intention entries must be objects")
        try:
            intention_id = canonical_id(str(entry["id"]))
            response = str(entry["response"])
            transitions = entry["transitions"]
        except KeyError as exc:
            raise FormatError(f"intention entry missing {exc}") from exc
        if not isinstance(transitions, list) or not transitions:
            raise FormatError(f"{intention_id}: 'transitions' must be a non-empty array")
        for t in transitions:
            if not isinstance(t, dict):
                raise FormatError(f"{intention_id}: transitions must be objects")
            if "terminal_event" in t:
                try:
                    events[intention_id] = TerminalEvent(t["terminal_event"])
                except ValueError:
                    raise FormatError(
                        f"{intention_id}: unknown terminal_event {t['terminal_event']!r}"
                    ) from None
                parsed.append(TransitionRow(intention_id, response, None, None))
            elif "condition" in t and "to" in t:
                condition = Condition.from_key(str(t["condition"]))
                target = canonical_id(str(t["to"]))
                parsed.append(TransitionRow(intention_id, response, condition, target))
            else:
                raise FormatError(
                    f"{intention_id}: transition needs 'condition'+'to' or 'terminal_event'"
                )
        tp = entry.get("training_phrases", {})
        if not isinstance(tp, dict):
            raise FormatError(f"{intention_id}: 'training_phrases' must be an object")
        cleaned: dict[str, list[str]] = {}
        for key, plist in tp.items():
            Condition.from_key(key)  # reject unknown keys early
            if not isinstance(plist, list) or not all(isinstance(p, str) for p in plist):
                raise FormatError(f"{intention_id}: phrases for {key!r} must be strings")
            cleaned[key] = list(plist)
        phrases[intention_id] = cleaned

    declared_root = canonical_id(str(doc["root"])) if "root" in doc else None
    return _assemble(parsed, version, declared_root, phrases, events)


def _assemble(
    rows: list[TransitionRow],
    version: int,
    declared_root: str | None,
    phrases: dict[str, dict[str, list[str]]],
    events: dict[str, TerminalEvent],
) -> IntentionTable:
    """Group rows by intention in first-appearance order and pick a root."""
    grouped: dict[str, list[TransitionRow]] = {}
    for row in rows:
        grouped.setdefault(row.intention, []).append(row)
    if not grouped:
        raise FormatError("document defines no intentions")

    intentions = []
    for intention_id, its_rows in grouped.items():
        terminal = any(r.is_terminal_marker for r in its_rows)
        event = None
        if terminal:
            event = events.get(intention_id) or infer_terminal_event(its_rows[0].response)
        intentions.append(
            Intention(
                id=intention_id,
                rows=its_rows,
                training_phrases=phrases.get(intention_id, {}),
                terminal_event=event,
            )
        )

    # A provisional root keeps unrooted/ambiguous tables representable so the
    # validator can report them as findings instead of a parse failure.
    root = declared_root or _derive_root(intentions) or intentions[0].id
    return IntentionTable(version=version, intentions=intentions, root=root)


def validate_table(table: IntentionTable) -> ValidationReport:
    """Check the structural invariants of a table and report findings.

    Errors: missing/ambiguous root, root mismatch, dangling ProceedTo
    targets, cycles, conflicting responses for one id, duplicate
    (id, condition) pairs, terminal intentions with outgoing rows,
    non-terminals without an Affirmative row, empty responses.
    Warning: non-terminal without a Negative row.
    """
    findings: list[Finding] = []

    if not table.intentions:
        return ValidationReport(
            [Finding("error", "MissingRoot", "table has no intentions", "table")]
        )

    targets = {
        r.target
        for i in table.intentions
        for r in i.transitions
        if r.target is not None
    }
    roots = [i.id for i in table.intentions if i.id not in targets]
    if not roots:
        findings.append(
            Finding("error", "MissingRoot", "every intention is referenced; no root", "table")
        )
    elif len(roots) > 1:
        findings.append(
            Finding(
                "error",
                "AmbiguousRoot",
                f"multiple unreferenced intentions: {', '.join(sorted(roots))}",
                "table",
            )
        )
    elif roots[0] != table.root:
        findings.append(
            Finding(
                "error",
                "RootMismatch",
                f"declared root {table.root} but {roots[0]} is the unreferenced intention",
                "table",
            )
        )

    for intention in table.intentions:
        loc = intention.id
        responses = {r.response for r in intention.rows}
        if len(responses) > 1:
            findings.append(
                Finding("error", "ConflictingResponse",
                        f"rows carry {len(responses)} different responses", loc)
            )
        if not intention.response.strip():
            findings.append(Finding("error", "EmptyResponse", "response is empty", loc))

        seen_conditions: set[str] = set()
        marker_seen = False
        for idx, row in enumerate(intention.rows):
            if row.is_terminal_marker:
                if marker_seen:
                    findings.append(
                        Finding("error", "DuplicateCondition",
                                "more than one terminal marker row", f"{loc}[{idx}]")
                    )
                marker_seen = True
                continue
            key = row.condition.key
            if key in seen_conditions:
                findings.append(
                    Finding("error", "DuplicateCondition",
                            f"condition {key!r} appears more than once", f"{loc}[{idx}]")
                )
            seen_conditions.add(key)
            if row.target not in table:
                findings.append(
                    Finding("error", "DanglingReference",
                            f"target {row.target} does not exist", f"{loc}[{idx}]")
                )

        if intention.is_terminal:
            if intention.transitions:
                findings.append(
                    Finding("error", "TerminalWithTransitions",
                            "terminal intention has outgoing rows", loc)
                )
        else:
            if intention.row_for(AFFIRMATIVE) is None:
                findings.append(
                    Finding("error", "MissingAffirmative",
                            "non-terminal intention has no Affirmative row", loc)
                )
            if intention.row_for(NEGATIVE) is None:
                findings.append(
                    Finding("warning", "MissingNegative",
                            "no Negative row; a negative answer closes the conversation", loc)
                )

    cycle = _find_cycle(table)
    if cycle:
        findings.append(
            Finding("error", "CycleDetected",
                    "cycle: " + " -> ".join(cycle), cycle[0])
        )

    return ValidationReport(findings)


def _find_cycle(table: IntentionTable) -> list[str] | None:
    """First cycle over ProceedTo edges, in declaration order, as a closed path."""
    state: dict[str, int] = {}  # 0 unvisited implicit, 1 on stack, 2 done
    stack: list[str] = []

    def visit(node_id: str) -> list[str] | None:
        state[node_id] = 1
        stack.append(node_id)
        node = table.get(node_id)
        if node is not None:
            for row in node.transitions:
                tgt = row.target
                if tgt not in table:
                    continue
                if state.get(tgt, 0) == 1:
                    return stack[stack.index(tgt):] + [tgt]
                if state.get(tgt, 0) == 0:
                    found = visit(tgt)
                    if found:
                        return found
        stack.pop()
        state[node_id] = 2
        return None

    for intention in table.intentions:
        if state.get(intention.id, 0) == 0:
            found = visit(intention.id)
            if found:
                return found
    return None


def export_table(table: IntentionTable, fmt: str = "csv") -> str:
    """Serialize a valid table canonically; parse(export(t)) equals t.

    CSV carries neither version, training phrases, nor explicit terminal
    events (they are re-inferred from the response text); JSON carries
    everything.
    """
    report = validate_table(table)
    if not report.ok:
        raise InvalidTable(
            "; ".join(str(f) for f in report.errors) or "table is not valid"
        )
    if fmt == "csv":
        return _export_csv(table)
    if fmt == "json":
        return _export_json(table)
    raise FormatError(f"unknown table format: {fmt!r}")


def _action_cell(target: str) -> str:
    m = INTENTION_NN_RE.match(target)
    token = m.group(1) if m else target
    return f"Proceed for intention {token}"


def _export_csv(table: IntentionTable) -> str:
    out = io.StringIO()
    writer = csv.writer(out, lineterminator="\n")
    writer.writerow(CSV_HEADER)
    for intention in table.intentions:
        for row in intention.rows:
            if row.is_terminal_marker:
                writer.writerow([intention.id, row.response, "", ""])
            else:
                cond = row.condition
                cell = {
                    ConditionKind.AFFIRMATIVE: "Yes",
                    ConditionKind.NEGATIVE: "No",
                }.get(cond.kind, cond.phrase)
                writer.writerow([intention.id, row.response, cell, _action_cell(row.target)])
    return out.getvalue()


def _export_json(table: IntentionTable) -> str:
    doc = {
        "version": table.version,
        "root": table.root,
        "intentions": [
            {
                "id": i.id,
                "response": i.response,
                "transitions": [
                    {"terminal_event": i.terminal_event.value}
                    if r.is_terminal_marker
                    else {"condition": r.condition.key, "to": r.target}
                    for r in i.rows
                ],
                "training_phrases": i.training_phrases,
            }
            for i in table.intentions
        ],
    }
    return json.dumps(doc, indent=2, ensure_ascii=False) + "\n"


def diff_tables(old: IntentionTable, new: IntentionTable) -> TableDiff:
    """Per-intention comparison of two valid tables."""
    for side, t in (("old", old), ("new", new)):
        report = validate_table(t)
        if not report.ok:
            raise InvalidTable(f"{side} table is not valid: {report.errors[0]}")

    old_ids = {i.id: i for i in old.intentions}
    new_ids = {i.id: i for i in new.intentions}
    added = [i for i in new_ids if i not in old_ids]
    removed = [i for i in old_ids if i not in new_ids]
    modified: list[str] = []
    notes: dict[str, list[str]] = {}
    for intention_id in old_ids.keys() & new_ids.keys():
        a, b = old_ids[intention_id], new_ids[intention_id]
        changes = []
        if a.response != b.response:
            changes.append("response changed")
        if a.rows != b.rows:
            changes.append("transitions changed")
        if a.training_phrases != b.training_phrases:
            changes.append("training phrases changed")
        if a.terminal_event != b.terminal_event:
            changes.append("terminal event changed")
        if changes:
            modified.append(intention_id)
            notes[intention_id] = changes
    for intention_id in added:
        notes[intention_id] = ["added"]
    for intention_id in removed:
        notes[intention_id] = ["removed"]

    order = {i.id: n for n, i in enumerate(new.intentions)}
    added.sort(key=order.__getitem__)
    modified.sort(key=order.__getitem__)
    removed.sort(key=lambda i: [x.id for x in old.intentions].index(i))
    return TableDiff(
        added=added,
        removed=removed,
        modified=modified,
        notes=notes,
        new_version=new.version,
        replacements={i: new_ids[i] for i in added + modified},
    )


def table_to_dict(table: IntentionTable) -> dict:
    """JSON-ready projection of a table (same shape as the JSON format)."""
    return json.loads(_export_json(table))
