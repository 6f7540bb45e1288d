"""Exception types shared across the package.

Every certified computation either returns an exact answer or raises one
of these; nothing falls back to an unverified guess.
"""


class BohrseqError(Exception):
    """Base class for all package errors."""


class InvalidInputError(BohrseqError, ValueError):
    """A precondition on user-supplied data is violated."""

    exit_code = 4


class PrecisionCapError(BohrseqError):
    """A comparison stayed undecided at the configured precision cap."""

    exit_code = 2

    def __init__(self, message, cap=None):
        super().__init__(message)
        self.cap = cap


class BudgetExceededError(BohrseqError):
    """A search or state budget ran out before a certificate was reached.

    Carries enough context to tell the caller how far the computation got.
    """

    exit_code = 3

    def __init__(self, message, **context):
        super().__init__(message)
        self.context = context


class CertificateError(BohrseqError):
    """An exact certificate inequality failed to verify."""

    exit_code = 3


class StageBuildError(BohrseqError):
    """A pipeline stage could not be completed; earlier stages stay valid."""

    exit_code = 3

    def __init__(self, stage, cause):
        super().__init__(f"stage {stage} failed: {cause}")
        self.stage = stage
        self.cause = cause
