"""Independent reference implementations used to compute expected values.

Nothing here imports the engine, parser, or matcher internals beyond plain
data types: the tree walker reads the CSV with csv.reader into dicts, and
the similarity oracle counts token overlap with loops instead of set
algebra. Expected values in the test modules were computed with these.
"""

from __future__ import annotations

import csv
import io

CLOSE_EVENT = "CloseNotIncident"
EVENT_BY_RESPONSE = {
    "align user over fix": "AlignUser",
    "notify the responsible analyst or group": "NotifyResponsible",
}


def read_tree(csv_text: str) -> dict:
    """CSV rows -> {id: {question, yes, no, terminal, event}} plus root id."""
    rows = list(csv.reader(io.StringIO(csv_text)))[1:]
    nodes: dict[str, dict] = {}
    referenced: set[str] = set()
    for raw_id, response, condition, action in rows:
        node_id = raw_id.strip().lower().replace(" ", "-")
        node = nodes.setdefault(
            node_id,
            {"question": response, "yes": None, "no": None, "terminal": False, "event": None},
        )
        if not condition and not action:
            node["terminal"] = True
            node["event"] = EVENT_BY_RESPONSE[response.strip().lower()]
        else:
            target = "intention-" + action.strip().split()[-1]
            node[condition.strip().lower()] = target
            referenced.add(target)
    roots = [n for n in nodes if n not in referenced]
    assert len(roots) == 1
    return {"nodes": nodes, "root": roots[0]}


def walk(tree: dict, answers: list[str]) -> tuple[str | None, list[str]]:
    """Apply yes/no answers recursively; returns (event or None, path).

    Event is None when the answers ran out before reaching a terminal. A
    "no" at a node without a no-branch closes the conversation.
    """
    nodes = tree["nodes"]

    def step(node_id: str, remaining: list[str], path: list[str]):
        path = path + [node_id]
        node = nodes[node_id]
        if node["terminal"]:
            return node["event"], path
        if not remaining:
            return None, path
        answer, rest = remaining[0], remaining[1:]
        target = node[answer]
        if target is None:
            return CLOSE_EVENT, path + ["synthetic-close"]
        return step(target, rest, path)

    return step(tree["root"], list(answers), [])


def enumerate_terminal_paths(tree: dict, max_depth: int) -> set[tuple[str, ...]]:
    """Distinct terminating walks over all yes/no vectors of length <= max_depth."""
    paths: set[tuple[str, ...]] = set()
    for length in range(1, max_depth + 1):
        for mask in range(2 ** length):
            answers = ["yes" if mask & (1 << i) else "no" for i in range(length)]
            event, path = walk(tree, answers)
            if event is not None:
                paths.add((event, *path))
    return paths


def jaccard(a: list[str], b: list[str]) -> float:
    """Token-set overlap computed with membership loops, not set algebra."""
    unique_a: list[str] = []
    for token in a:
        if token not in unique_a:
            unique_a.append(token)
    unique_b: list[str] = []
    for token in b:
        if token not in unique_b:
            unique_b.append(token)
    if not unique_a or not unique_b:
        return 0.0
    shared = 0
    for token in unique_a:
        if token in unique_b:
            shared += 1
    union = len(unique_a) + len(unique_b) - shared
    return shared / union


def classify(
    utterance_tokens: list[str],
    condition_phrases: list[tuple[str, list[list[str]]]],
    threshold: float,
) -> tuple[str | None, float]:
    """Brute-force best condition: every (phrase, utterance) pair is scored.

    `condition_phrases` is an ordered list of (condition key, tokenized
    phrase list). First-listed condition wins ties.
    """
    best_key, best_score = None, -1.0
    for key, phrases in condition_phrases:
        for phrase_tokens in phrases:
            s = jaccard(utterance_tokens, phrase_tokens)
            if s > best_score:
                best_key, best_score = key, s
    if best_score >= threshold:
        return best_key, best_score
    return None, best_score
