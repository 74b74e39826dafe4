"""Exception types shared across the package."""


class QmrdxError(Exception):
    """Base class for all package-specific errors."""


class NetworkFormatError(QmrdxError):
    """A network or case file could not be parsed in the declared format."""


class NetworkValidationError(QmrdxError):
    """A network violates structural invariants.

    Carries the full list of violations, not just the first one found.
    """

    def __init__(self, violations):
        self.violations = list(violations)
        super().__init__("; ".join(self.violations))


class EvidenceError(QmrdxError):
    """Evidence is inconsistent or references unknown findings."""


class SessionStateError(QmrdxError):
    """An operation was applied to a session in the wrong lifecycle state."""
