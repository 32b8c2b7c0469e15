"""Exception hierarchy shared by every cetlab module."""

from __future__ import annotations


class CetError(Exception):
    """Base class for all cetlab errors."""


class ValidationError(CetError):
    """A graph failed a structural check.

    ``code`` names the violated rule (e.g. ``"BadRootDegree"``) and ``witness``
    is the offending vertex or edge id, when there is one.
    """

    def __init__(self, code: str, witness=None, message: str | None = None):
        self.code = code
        self.witness = witness
        text = code if witness is None else f"{code}({witness})"
        if message:
            text = f"{text}: {message}"
        super().__init__(text)


class InvalidMove(CetError):
    pass


class PreconditionViolated(CetError):
    pass


class NoPath(CetError):
    pass


class NotLevel1(CetError):
    pass


class NotStandardShape(CetError):
    pass


class BadSpec(CetError):
    pass


class IncompatibleInputs(CetError):
    pass


class NoLevel1Partner(CetError):
    pass


class CapExceeded(CetError):
    pass


class Unreachable(CetError):
    pass


class ParseError(CetError):
    """Syntax error in an interchange document; ``line`` is 1-based when known."""

    def __init__(self, message: str, line: int | None = None):
        self.line = line
        super().__init__(message if line is None else f"line {line}: {message}")


class UnsupportedFeature(ParseError):
    pass
