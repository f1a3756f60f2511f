"""
Exception hierarchy for LTL Synth.

Every error raised on purpose by the library derives from SynthError, so the
command line can map each family onto an exit code.
"""

from typing import FrozenSet, Optional


class SynthError(Exception):
    """Base class for all synthesis errors."""
    pass


class LtlSyntaxError(SynthError):
    """Raised when an LTL formula cannot be parsed."""

    def __init__(self, message: str, offset: int, expected: FrozenSet[str] = frozenset()):
        self.offset = offset
        self.expected = frozenset(expected)
        detail = ''
        if self.expected:
            detail = ' (expected {})'.format(', '.join(sorted(self.expected)))
        super().__init__('{} at byte {}{}'.format(message, offset, detail))


class HoaFormatError(SynthError):
    """Raised on malformed HOA input."""

    def __init__(self, message: str, line: Optional[int] = None):
        self.line = line
        if line is not None:
            message = 'line {}: {}'.format(line, message)
        super().__init__(message)


class AigerFormatError(SynthError):
    """Raised on malformed AIGER input."""

    def __init__(self, message: str, line: Optional[int] = None):
        self.line = line
        if line is not None:
            message = 'line {}: {}'.format(line, message)
        super().__init__(message)


class PreconditionError(SynthError):
    """Raised when an operation is applied to an input it does not support."""
    pass


class BypassNotApplicable(PreconditionError):
    """Raised when a bypass pattern cannot be turned into a strategy directly."""
    pass


class BudgetExceeded(SynthError):
    """Raised when a configured size budget is exhausted."""

    def __init__(self, what: str, budget: int):
        self.budget = budget
        super().__init__('{} exceeds budget of {}'.format(what, budget))


class UsageError(SynthError):
    """Raised on contradictory or missing command-line options."""
    pass


class InternalError(SynthError):
    """Raised when a self-check on a produced result fails."""
    pass
