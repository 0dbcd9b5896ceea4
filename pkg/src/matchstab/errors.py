class MatchstabError(Exception):
    """Base class for all library errors."""


class ParseError(MatchstabError, ValueError):
    def __init__(self, message: str, line: int | None = None, col: int | None = None):
        self.message = message
        self.line = line
        self.col = col
        where = ""
        if line is not None:
            where = f"line {line}"
            if col is not None:
                where += f", col {col}"
            where += ": "
        super().__init__(where + message)


class CapExceeded(MatchstabError):
    """An exhaustive enumeration would exceed the configured size cap."""


class TierError(MatchstabError, ValueError):
    """A checker was asked to run under a tier the input does not satisfy."""
