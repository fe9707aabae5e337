"""Exception hierarchy shared by the verifier modules.

Every error carries the exit code the command line maps it to, so callers
outside the CLI can still tell usage problems from resource exhaustion.
"""

from __future__ import annotations

EXIT_USAGE = 3
EXIT_RESOURCE = 4


class VerifierError(Exception):
    """Base class for all verifier failures."""

    exit_code = EXIT_USAGE


class SourceError(VerifierError):
    """A problem located in program or formula text."""

    def __init__(self, message: str, line: int | None = None, column: int | None = None) -> None:
        self.line = line
        self.column = column
        location = f" at line {line}, column {column}" if line is not None else ""
        super().__init__(f"{message}{location}")
        self.detail = message


class LexicalError(SourceError):
    pass


class ProgramSyntaxError(SourceError):
    pass


class DuplicateInputError(SourceError):
    pass


class DesugarError(SourceError):
    pass


class QBFError(SourceError):
    pass


class InputLengthError(VerifierError):
    pass


class InvalidLineError(VerifierError):
    pass


class InvalidParameterError(VerifierError):
    pass


class UndefinedConditioningError(VerifierError):
    """Conditioning on termination when an input never terminates."""

    def __init__(self, message: str, input_bits: str | None = None) -> None:
        super().__init__(message)
        self.input_bits = input_bits


class CorpusError(VerifierError):
    pass


class SolverInvariantError(VerifierError):
    """The linear system was singular after recurrent states were pruned."""


class ResourceBudgetExceeded(VerifierError):
    """A configured budget on chain states or alpha-grid points ran out."""

    exit_code = EXIT_RESOURCE

    def __init__(self, resource: str, limit: int, message: str | None = None) -> None:
        self.resource = resource
        self.limit = limit
        super().__init__(message or f"{resource} budget of {limit} exceeded")
