"""Exception types shared across the package.

Input errors carry file/row/column context so a bad cell in a 160-country
CSV can be located without re-running under a debugger.
"""

from __future__ import annotations


class EpiValueError(Exception):
    """Base class for all errors raised by this package."""


class InputError(EpiValueError):
    """A problem with an input file. Optionally locates the offending cell."""

    def __init__(self, message: str, *, path=None, row=None, column=None):
        self.path = path
        self.row = row
        self.column = column
        ctx = []
        if path is not None:
            ctx.append(f"file={path}")
        if row is not None:
            ctx.append(f"row={row}")
        if column is not None:
            ctx.append(f"column={column}")
        if ctx:
            message = f"{message} ({', '.join(ctx)})"
        super().__init__(message)


class MissingColumn(InputError):
    pass


class MissingBand(InputError):
    pass


class MissingField(InputError):
    """A required value (e.g. an optional profile field) is absent."""


class NegativeValue(InputError):
    pass


class DuplicateCountry(InputError):
    pass


class EmptyFile(InputError):
    pass


class InvariantViolation(InputError):
    """A loaded or constructed value violates a documented invariant."""


class ZeroPopulationBand(InputError):
    pass


class UnknownCountry(EpiValueError):
    pass


class InvalidR0(EpiValueError):
    pass


class SingularContactMatrix(EpiValueError):
    pass


class NonFiniteState(EpiValueError):
    """Numerical blow-up during integration; usually means dt is too large."""


class NonPositiveIncome(EpiValueError):
    pass


class NonPositiveGDP(EpiValueError):
    pass


class CountryMismatch(EpiValueError):
    pass


class PartialFailure(EpiValueError):
    """Some countries failed during a sweep; the rest completed.

    Carries the completed result so callers can still use it.
    """

    def __init__(self, result, failures):
        self.result = result
        self.failures = failures
        lines = ", ".join(f"{iso3}: {reason}" for iso3, reason in failures)
        super().__init__(f"{len(failures)} countries failed: {lines}")
