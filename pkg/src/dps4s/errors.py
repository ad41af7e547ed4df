"""Exception hierarchy shared by every module."""

from __future__ import annotations


class DPS4SError(Exception):
    """Base class for all errors raised by this package."""


class InvalidParams(DPS4SError, ValueError):
    """A numeric parameter is outside the domain of the formula."""


class DeltaViolated(DPS4SError, ValueError):
    def __init__(self, user: int, count: int, bound: int):
        super().__init__(f"user {user} contributes to {count} units, above tuple bound {bound}")
        self.user = user
        self.count = count
        self.bound = bound


class WeightOutOfRange(DPS4SError, ValueError):
    pass


class UnknownUser(DPS4SError, KeyError):
    pass


class QOutOfRange(InvalidParams):
    pass


class POutOfRange(InvalidParams):
    pass


class NonPositiveScale(InvalidParams):
    pass


class TooFewValues(DPS4SError, ValueError):
    pass


class NoSignChange(DPS4SError, ValueError):
    pass


class MaxIterations(DPS4SError, RuntimeError):
    pass


class AlphaTooSmall(InvalidParams):
    pass


class NoValidAlpha(InvalidParams):
    pass


class BracketFailure(DPS4SError, RuntimeError):
    pass


class SolverFailure(DPS4SError, RuntimeError):
    """The LP solver broke down numerically; ``diagnostics`` holds iteration state."""

    def __init__(self, message: str, diagnostics: dict | None = None):
        super().__init__(message)
        self.diagnostics = diagnostics or {}


class SolverNonConvergence(SolverFailure):
    pass


class InstanceTooLarge(DPS4SError, ValueError):
    pass


class SvtCapExceeded(DPS4SError, RuntimeError):
    pass


class ParseError(DPS4SError, ValueError):
    def __init__(self, line: int, message: str):
        super().__init__(f"line {line}: {message}")
        self.line = line


class SelfLoop(ParseError):
    pass


class PatternUnsupported(DPS4SError, ValueError):
    pass


class InfeasibleParams(InvalidParams):
    pass


class ZeroTruth(DPS4SError, ValueError):
    pass


class ConfigError(DPS4SError, ValueError):
    pass
