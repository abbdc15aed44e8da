"""Exception hierarchy shared by all triagebot modules.

Every error a caller can branch on is a distinct class; the HTTP layer
maps each one to exactly one (status, code) pair.
"""


class TriagebotError(Exception):
    """Base class for all triagebot errors."""

    code = "TriagebotError"

    def __init__(self, message: str = ""):
        super().__init__(message or self.code)
        self.message = message or self.code


class FormatError(TriagebotError):
    """Malformed table document: bad CSV/JSON structure or wrong header."""

    code = "FormatError"


class ActionGrammarError(FormatError):
    """Action cell does not match the 'Proceed for intention NN' grammar."""

    code = "ActionGrammarError"


class InvalidTable(TriagebotError):
    """Operation requires a table that passes validation."""

    code = "InvalidTable"


class ConfigError(TriagebotError):
    """Matcher configuration violates its invariants."""

    code = "ConfigError"


class TerminalNode(TriagebotError):
    """Classification requested against a terminal intention."""

    code = "TerminalNode"


class EmptyStore(TriagebotError):
    """Incident-type classification requires a non-empty sample store."""

    code = "EmptyStore"


class UnknownSession(TriagebotError):
    code = "UnknownSession"


class SessionClosed(TriagebotError):
    code = "SessionClosed"


class AnswersExhausted(TriagebotError):
    """run_path ran out of answers before reaching a terminal."""

    code = "AnswersExhausted"


class UnknownType(TriagebotError):
    """Incident type is not registered."""

    code = "UnknownType"


class UnknownIncident(TriagebotError):
    code = "UnknownIncident"


class IllegalTransition(TriagebotError):
    """Lifecycle event not legal from the incident's current state."""

    code = "IllegalTransition"

    def __init__(self, state: str, event: str):
        super().__init__(f"event '{event}' is not legal from state '{state}'")
        self.state = state
        self.event = event


class ChannelUnavailable(TriagebotError):
    """Webhook delivery failed after the retry; the record is still persisted."""

    code = "ChannelUnavailable"


class StorageError(TriagebotError):
    code = "StorageError"


class InvalidWindow(TriagebotError):
    """Report window has from > to."""

    code = "InvalidWindow"


class UnknownIntention(TriagebotError):
    code = "UnknownIntention"


class UnknownCondition(TriagebotError):
    code = "UnknownCondition"


class NoActiveTable(TriagebotError):
    """No table has been imported yet."""

    code = "NoActiveTable"
