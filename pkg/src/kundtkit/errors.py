"""Exception hierarchy."""

from __future__ import annotations


class KundtkitError(Exception):
    """Base class for all errors raised by this package."""


class ParseError(KundtkitError):
    def __init__(self, message: str, text: str = "", position: int = 0):
        self.text = text
        self.position = position
        if text:
            pointer = " " * position + "^"
            message = f"{message} at position {position}\n  {text}\n  {pointer}"
        super().__init__(message)


class UnknownIdentifierError(ParseError):
    def __init__(self, name: str, text: str = "", position: int = 0):
        self.name = name
        super().__init__(f"unknown identifier {name!r}", text, position)


class EvaluationError(KundtkitError):
    """Singular evaluation (division by zero, log of a non-positive number, ...)."""

    def __init__(self, message: str, subexpression: str = ""):
        self.subexpression = subexpression
        if subexpression:
            message = f"{message} in subexpression '{subexpression}'"
        super().__init__(message)


class ModeError(KundtkitError):
    """Mixed or unsupported scalar modes (rational vs float)."""


class JetOrderError(KundtkitError):
    """A computation needs more Taylor orders than were supplied."""


class ShapeError(KundtkitError):
    """Dimension, rank or slot mismatch."""


class VarianceError(ShapeError):
    pass


class SingularMetricError(KundtkitError):
    pass


class PreconditionError(KundtkitError):
    pass


class RankBoundError(KundtkitError):
    pass


class InputError(KundtkitError):
    """Invalid metric-definition file or command-line input."""
