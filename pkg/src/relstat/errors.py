"""Exception hierarchy shared by all relstat modules.

The CLI maps these onto exit codes: ValidationError (and its subclass
ParseError) exit 1, ScorerUnavailableError exit 3, anything else exit 2.
"""


class RelstatError(Exception):
    """Base class for all errors raised by this package."""


class ValidationError(RelstatError):
    """Input violates a documented invariant (bad config, bad record, ...)."""


class ParseError(ValidationError):
    """A file could not be parsed; carries line number and offending field."""

    def __init__(self, message: str, *, path: str | None = None,
                 line_number: int | None = None, field: str | None = None):
        self.path = path
        self.line_number = line_number
        self.field = field
        where = []
        if path is not None:
            where.append(str(path))
        if line_number is not None:
            where.append(f"line {line_number}")
        if field is not None:
            where.append(f"field {field!r}")
        prefix = f"[{', '.join(where)}] " if where else ""
        super().__init__(prefix + message)


class ScorerError(RelstatError):
    """A scorer backend failed to produce scores."""


class ScorerUnavailableError(ScorerError):
    """Remote scorer unreachable after the configured retries."""


class ProtocolError(ScorerError):
    """Remote scorer answered with a malformed response."""
