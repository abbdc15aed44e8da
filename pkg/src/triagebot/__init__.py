"""Incident-triage chatbot: importable intention tables, a deterministic
dialog engine, an ITIL-style incident lifecycle, and a fallback-driven
improvement loop."""

from .engine import DialogEngine, Session, TurnResult, run_path
from .improvement import (
    FallbackRecord,
    FallbackStore,
    Suggestion,
    apply_suggestion,
    suggest_training_phrases,
)
from .incidents import (
    Incident,
    IncidentStore,
    LifecycleState,
    NotificationDispatcher,
    SampleStore,
)
from .matcher import (
    MatcherConfig,
    MatchResult,
    classify_condition,
    classify_incident_type,
    load_matcher_config,
    normalize,
    score,
)
from .model import (
    AFFIRMATIVE,
    NEGATIVE,
    Condition,
    ConditionKind,
    Intention,
    IntentionTable,
    TableDiff,
    TerminalEvent,
    TransitionRow,
    ValidationReport,
    diff_tables,
    export_table,
    parse_table,
    validate_table,
)
from .service import TriageService

__version__ = "0.1.0"

__all__ = [
    "AFFIRMATIVE",
    "NEGATIVE",
    "Condition",
    "ConditionKind",
    "DialogEngine",
    "FallbackRecord",
    "FallbackStore",
    "Incident",
    "IncidentStore",
    "Intention",
    "IntentionTable",
    "LifecycleState",
    "MatchResult",
    "MatcherConfig",
    "NotificationDispatcher",
    "SampleStore",
    "Session",
    "Suggestion",
    "TableDiff",
    "TerminalEvent",
    "TransitionRow",
    "TriageService",
    "TurnResult",
    "ValidationReport",
    "apply_suggestion",
    "classify_condition",
    "classify_incident_type",
    "diff_tables",
    "export_table",
    "load_matcher_config",
    "normalize",
    "parse_table",
    "run_path",
    "score",
    "suggest_training_phrases",
    "validate_table",
]
