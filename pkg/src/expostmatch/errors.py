"""Package exceptions.

The CLI maps these onto exit codes, so the hierarchy is deliberately
flat: InputError covers every malformed-input condition (exit 2) and
CapExceededError signals that an enumeration budget ran out (exit 4).
"""

from __future__ import annotations


class ExpostMatchError(Exception):
    """Base class for package errors."""


class InputError(ExpostMatchError):
    """Malformed or inconsistent input (file, instance, or matrix)."""


class CapExceededError(ExpostMatchError):
    """An enumeration exceeded its configured cap.

    Carries the cap so callers can report how far they got.
    """

    def __init__(self, message: str, cap: int):
        super().__init__(message)
        self.cap = cap
