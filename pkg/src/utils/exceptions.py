"""
Error hierarchy for the condbell toolkit.

InputError subclasses describe bad input and map to CLI exit code 2;
anything else escaping a command is an internal error (exit code 3).
"""
from typing import Optional


class CondBellError(Exception):
    """Root of every error raised deliberately by this package."""

    exit_code = 3

    @property
    def code(self) -> str:
        return type(self).__name__


class InputError(CondBellError):
    """The caller supplied data or flags that violate a precondition."""

    exit_code = 2


class InvalidOutcome(InputError):
    pass


class InvalidDistribution(InputError):
    pass


class InvalidConfig(InputError):
    pass


class SameObservable(InputError):
    pass


class ZeroConditioningEvent(InputError):
    pass


class AsymmetricMarginals(InputError):
    pass


class InvalidGridStep(InputError):
    pass


class InvalidTarget(InputError):
    pass


class OddPopulation(InputError):
    pass


class ZeroBranch(InputError):
    """A post-selected branch came out empty; carries resimulation advice."""

    def __init__(self, message: str, branch: Optional[str] = None,
                 advised_n_total: Optional[int] = None):
        if advised_n_total is not None:
            message = f"{message} (rerun with n_total >= {advised_n_total})"
        super().__init__(message)
        self.branch = branch
        self.advised_n_total = advised_n_total


class MalformedRow(InputError):
    """A CSV row (or the file itself) cannot be read; `line` is None when unknown."""

    def __init__(self, line: Optional[int], reason: str):
        super().__init__(f"line {line}: {reason}" if line is not None else reason)
        self.line = line
        self.reason = reason


class DuplicateSubject(InputError):
    pass


class SchemaViolation(InputError):
    pass


class UnknownSubcommand(InputError):
    pass


class IoFailure(InputError):
    pass


class UsageError(InputError):
    """Missing or malformed command-line flags."""
