"""Exception types shared by every module; the CLI maps them to exit codes."""

from typing import Optional


class KempfError(Exception):
    """Base class for all engine errors."""

    exit_code = 1


class InputError(KempfError, ValueError):
    """Invalid data: dimension mismatch, malformed payload, violated precondition."""

    exit_code = 2

    def __init__(self, message: str, field: Optional[str] = None):
        self.field = field
        super().__init__(f"{field}: {message}" if field else message)


class NoCentreError(InputError):
    """The centre pipeline was asked for a subset that is completely reducible."""


class ResourceBudgetError(KempfError, RuntimeError):
    """A configured enumeration budget was exceeded."""

    exit_code = 3


class CrossCheckDisagreement(KempfError):
    """The exact solver and the lattice oracle disagree."""

    exit_code = 4
