"""Exception hierarchy.

Every check that can fail mathematically raises a subclass of
:class:`CheckFailure` carrying the witness that broke it; configuration and
precondition problems raise subclasses of :class:`ValueError`.
"""

from __future__ import annotations

from typing import Any


class SubconvError(Exception):
    """Base class for all package errors."""


# -- preconditions -----------------------------------------------------------

class NonInvertible(SubconvError, ValueError):
    pass


class ModuliNotCoprime(SubconvError, ValueError):
    pass


class NotPrime(SubconvError, ValueError):
    pass


class UnsupportedModulus(SubconvError, ValueError):
    pass


class PoleProximity(SubconvError, ValueError):
    pass


class UsageError(SubconvError, ValueError):
    pass


# -- numerical ---------------------------------------------------------------

class QuadratureFailure(SubconvError, ArithmeticError):
    pass


class NotConverged(SubconvError, ArithmeticError):
    pass


# -- mathematical check failures ----------------------------------------------

class CheckFailure(SubconvError):
    def __init__(self, message: str, witness: Any = None, report: Any = None):
        super().__init__(message)
        self.witness = witness
        self.report = report


class BoundViolation(CheckFailure):
    pass


class IdentityViolation(CheckFailure):
    pass


class VanishingViolation(CheckFailure):
    pass


class ClosedFormMismatch(CheckFailure):
    pass


class BranchIdentityMismatch(CheckFailure):
    pass


class GuardExceeded(CheckFailure):
    pass
