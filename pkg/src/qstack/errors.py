"""Exception types shared across the stack."""

from __future__ import annotations


class QStackError(Exception):
    """Base class for domain errors.

    ``kind`` is a short machine-readable tag (``TOO_MANY_QUBITS``,
    ``NOT_ROUTED``...) that the CLI reports alongside the message.
    """

    kind = "ERROR"

    def __init__(self, message: str, kind: str | None = None):
        super().__init__(message)
        if kind is not None:
            self.kind = kind

    def __str__(self) -> str:
        return f"{self.kind}: {self.args[0]}"


class TooManyQubitsError(QStackError):
    kind = "TOO_MANY_QUBITS"


class NotRoutedError(QStackError):
    kind = "NOT_ROUTED"


class TooLargeError(QStackError):
    kind = "TOO_LARGE"


class LengthMismatchError(QStackError, ValueError):
    kind = "LENGTH_MISMATCH"


class BadPenaltyError(QStackError, ValueError):
    kind = "BAD_PENALTY"


class NotPowerOfTwoError(QStackError, ValueError):
    kind = "NOT_POWER_OF_TWO"


class NoMatchKnownError(QStackError):
    kind = "NO_MATCH_KNOWN"


class FitFailedError(QStackError):
    kind = "FIT_FAILED"
