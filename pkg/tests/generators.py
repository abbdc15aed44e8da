"""Seeded random generators for property-style tests."""

from __future__ import annotations

import random

from triagebot.model import (
    AFFIRMATIVE,
    NEGATIVE,
    Condition,
    ConditionKind,
    Intention,
    IntentionTable,
    TerminalEvent,
    TransitionRow,
)

# Words safe to use in phrase conditions: never collide with the yes/no lexicons.
PHRASE_WORDS = [
    "printer", "jammed", "again", "crash", "report", "frozen", "screen",
    "blank", "restart", "loop", "export", "stuck", "timeout", "login",
]

TERMINAL_RESPONSES = {
    TerminalEvent.NOTIFY_RESPONSIBLE: "Notify the responsible analyst or group",
    TerminalEvent.ALIGN_USER: "Align user over fix",
}


def random_table(rng: random.Random, csv_representable: bool = False) -> IntentionTable:
    """A random valid table: forward edges only, exactly one root.

    With csv_representable=True the table stays inside what the CSV shape
    can carry: version 1, no training phrases, terminal events inferable
    from their response text.
    """
    n = rng.randint(3, 9)
    terminal_count = rng.randint(1, min(2, n - 2))
    terminal_ids = set(range(n - terminal_count, n))

    edges: dict[int, list[tuple[Condition, int]]] = {i: [] for i in range(n)}
    incoming: set[int] = set()
    for i in range(n):
        if i in terminal_ids:
            continue
        targets = list(range(i + 1, n))
        yes_target = rng.choice(targets)
        edges[i].append((AFFIRMATIVE, yes_target))
        incoming.add(yes_target)
        if rng.random() < 0.75:
            no_target = rng.choice(targets)
            edges[i].append((NEGATIVE, no_target))
            incoming.add(no_target)

    # Orphans (besides the root) get a phrase-condition edge from an earlier
    # non-terminal so the table keeps a unique root.
    for j in range(1, n):
        if j in incoming:
            continue
        sources = [i for i in range(j) if i not in terminal_ids]
        source = rng.choice(sources)
        words = rng.sample(PHRASE_WORDS, rng.randint(1, 3))
        phrase = " ".join(words)
        existing = {c.key for c, _ in edges[source]}
        while f"phrase:{phrase}" in existing:
            phrase = phrase + " " + rng.choice(PHRASE_WORDS)
        edges[source].append((Condition(ConditionKind.PHRASE, phrase), j))
        incoming.add(j)

    intentions = []
    for i in range(n):
        intention_id = f"intention-{i + 1:02d}"
        if i in terminal_ids:
            event = rng.choice(list(TERMINAL_RESPONSES))
            response = TERMINAL_RESPONSES[event]
            if not csv_representable and rng.random() < 0.3:
                event = TerminalEvent.CLOSE_NOT_INCIDENT
                response = "All done here"
            rows = [TransitionRow(intention_id, response, None, None)]
            intentions.append(
                Intention(id=intention_id, rows=rows, terminal_event=event)
            )
        else:
            response = f"Question {i + 1}?"
            rows = [
                TransitionRow(intention_id, response, cond, f"intention-{tgt + 1:02d}")
                for cond, tgt in edges[i]
            ]
            phrases: dict[str, list[str]] = {}
            if not csv_representable and rng.random() < 0.5:
                cond = rng.choice(rows).condition
                phrases[cond.key] = [
                    " ".join(rng.sample(PHRASE_WORDS, rng.randint(1, 3)))
                    for _ in range(rng.randint(1, 2))
                ]
            intentions.append(
                Intention(id=intention_id, rows=rows, training_phrases=phrases)
            )

    version = 1 if csv_representable else rng.randint(1, 9)
    return IntentionTable(version=version, intentions=intentions, root="intention-01")


def random_tokens(rng: random.Random, vocabulary: list[str], max_len: int = 8) -> list[str]:
    return [rng.choice(vocabulary) for _ in range(rng.randint(0, max_len))]
