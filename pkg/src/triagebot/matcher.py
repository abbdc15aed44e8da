"""Deterministic lexical matching of analyst utterances.

Utterances are normalized to lowercase punctuation-free token lists and
scored against condition phrase sets by Jaccard overlap:

    J(a, b) = |set(a) & set(b)| / |set(a) | set(b)|

The best condition wins when its score clears the configured threshold;
anything below is a fallback, the raw material of the improvement loop.
No stemming, no stop words, no statistics: identical inputs always produce
identical results.
"""

from __future__ import annotations

import json
import os
import re
from dataclasses import dataclass
from importlib import resources

from .errors import ConfigError, EmptyStore, TerminalNode
from .model import AFFIRMATIVE, NEGATIVE, Condition, ConditionKind, Intention

MATCHER_CONFIG_ENV = "TRIAGEBOT_MATCHER_CONFIG"

_PUNCT_RE = re.compile(r"[^\w\s]+")

TokenList = list[str]


def normalize(utterance: str) -> TokenList:
    """Lowercase, strip punctuation, split on whitespace runs. Idempotent."""
    return _PUNCT_RE.sub("", utterance.lower()).split()


def score(a: TokenList, b: TokenList) -> float:
    """Jaccard similarity of two token lists as sets; 0.0 if either is empty."""
    sa, sb = set(a), set(b)
    if not sa or not sb:
        return 0.0
    return len(sa & sb) / len(sa | sb)


@dataclass(frozen=True)
class MatcherConfig:
    threshold: float = 0.5
    affirmative: tuple[str, ...] = ()
    negative: tuple[str, ...] = ()

    def __post_init__(self):
        if not 0.0 <= self.threshold <= 1.0:
            raise ConfigError(f"threshold {self.threshold} outside [0, 1]")
        if not self.affirmative or not self.negative:
            raise ConfigError("affirmative and negative lexicons must be non-empty")
        overlap = set(self.affirmative) & set(self.negative)
        if overlap:
            raise ConfigError(f"lexicons overlap: {sorted(overlap)}")

    def lexicon(self, condition: Condition) -> list[str]:
        if condition.kind is ConditionKind.AFFIRMATIVE:
            return list(self.affirmative)
        if condition.kind is ConditionKind.NEGATIVE:
            return list(self.negative)
        return [condition.phrase]


def load_matcher_config(path: str | None = None) -> MatcherConfig:
    """Load the lexicon config from `path`, the env override, or the shipped file."""
    if path is None:
        path = os.environ.get(MATCHER_CONFIG_ENV)
    if path is None:
        text = resources.files("triagebot.data").joinpath("matcher_config.json").read_text("utf-8")
    else:
        with open(path, encoding="utf-8") as fh:
            text = fh.read()
    try:
        doc = json.loads(text)
        return MatcherConfig(
            threshold=float(doc.get("threshold", 0.5)),
            affirmative=tuple(doc["affirmative"]),
            negative=tuple(doc["negative"]),
        )
    except (json.JSONDecodeError, KeyError, TypeError, ValueError) as exc:
        raise ConfigError(f"bad matcher config: {exc}") from exc


@dataclass(frozen=True)
class ScoredCandidate:
    key: str  # condition key, or incident type name
    score: float


@dataclass(frozen=True)
class MatchResult:
    matched: bool
    key: str | None
    score: float
    candidates: tuple[ScoredCandidate, ...]
    condition: Condition | None = None

    def to_dict(self) -> dict:
        return {
            "matched": self.matched,
            "key": self.key,
            "score": self.score,
            "candidates": [{"key": c.key, "score": c.score} for c in self.candidates],
        }


FALLBACK = MatchResult(matched=False, key=None, score=0.0, candidates=())


def _best(candidates: list[ScoredCandidate], threshold: float) -> tuple[ScoredCandidate | None, tuple[ScoredCandidate, ...]]:
    # Stable sort keeps declaration order among equal scores.
    ranked = tuple(sorted(candidates, key=lambda c: -c.score))
    if ranked and ranked[0].score >= threshold:
        return ranked[0], ranked
    return None, ranked


def classify_condition(
    utterance: str, node: Intention, cfg: MatcherConfig
) -> MatchResult:
    """Score an utterance against every condition available at a node.

    The node's declared conditions are scored against the configured
    lexicons plus that condition's training phrases. Affirmative and
    Negative are always in play even when the node declares no row for
    them, so the dialog engine can route undeclared polarities (the
    synthetic close of a root-level "no").
    """
    if node.is_terminal:
        raise TerminalNode(f"{node.id} is terminal; nothing to classify")
    tokens = normalize(utterance)

    conditions = list(node.conditions)
    for implicit in (AFFIRMATIVE, NEGATIVE):
        if implicit not in conditions:
            conditions.append(implicit)

    candidates = []
    for condition in conditions:
        phrases = cfg.lexicon(condition) + node.phrases_for(condition)
        best = max((score(tokens, normalize(p)) for p in phrases), default=0.0)
        candidates.append(ScoredCandidate(condition.key, best))

    winner, ranked = _best(candidates, cfg.threshold)
    if winner is None:
        return MatchResult(False, None, 0.0, ranked)
    return MatchResult(
        True, winner.key, winner.score, ranked, condition=Condition.from_key(winner.key)
    )


def classify_incident_type(utterance: str, samples, cfg: MatcherConfig) -> MatchResult:
    """Best-scoring incident type over each type's sample descriptions.

    `samples` is anything with a `texts_by_type()` returning an ordered
    mapping of type name to its sample texts.
    """
    by_type = samples.texts_by_type()
    if not any(texts for texts in by_type.values()):
        raise EmptyStore("no incident samples recorded")
    tokens = normalize(utterance)

    candidates = []
    for type_name, texts in by_type.items():
        best = max((score(tokens, normalize(t)) for t in texts), default=0.0)
        candidates.append(ScoredCandidate(type_name, best))

    winner, ranked = _best(candidates, cfg.threshold)
    if winner is None:
        return MatchResult(False, None, 0.0, ranked)
    return MatchResult(True, winner.key, winner.score, ranked)
