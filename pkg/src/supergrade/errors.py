"""Exception roots shared across supergrade modules.

Module-specific errors live next to the code that raises them and subclass
``SupergradeError``; configuration problems subclass ``ConfigError`` so the CLI
can map them to exit code 2.
"""


class SupergradeError(Exception):
    """Base exception for supergrade errors."""
    pass


class ConfigError(SupergradeError):
    """Invalid run configuration."""
    pass


class ClaimError(SupergradeError):
    """An inner operation failed while a claim was being checked."""

    def __init__(self, claim: str, cause: Exception):
        self.claim = claim
        self.cause = cause
        super().__init__(f"{claim}: {type(cause).__name__}: {cause}")
