"""Exception hierarchy shared by every module.

The CLI maps these onto exit codes: budget problems exit 3, every other
failure of a check exits 2.
"""


class AnisoforgeError(Exception):
    """Base class for all errors raised by the toolkit."""


class BudgetExceeded(AnisoforgeError):
    """A configurable search or scan budget was exhausted."""


class SearchBudgetExceeded(BudgetExceeded):
    """A prime or factor search hit its iteration cap."""


class Inconsistent(AnisoforgeError):
    """Two congruences disagree on a common factor of their moduli."""


class NoDecomposition(AnisoforgeError):
    """No sum of three distinct admissible primes exists."""


class DisjointnessViolated(AnisoforgeError):
    """A derived plan has S and Sigma intersecting."""


class PreconditionFailed(AnisoforgeError):
    pass


class PrecisionExhausted(AnisoforgeError):
    """The working precision is too small to decide the requested answer."""


class PlanViolation(AnisoforgeError):
    """A stage was built with a ramification degree divisible by a target prime."""


class NotPrimitive(AnisoforgeError):
    """A generator's residue does not generate the residue extension."""


class ShapeMismatch(AnisoforgeError):
    pass


class CertificationFailed(AnisoforgeError):
    """Raised with the name of the failing certificate clause."""

    def __init__(self, clause, message="", witness=None):
        super().__init__(f"{clause}: {message}" if message else clause)
        self.clause = clause
        self.witness = witness


class AuditFailed(AnisoforgeError):
    def __init__(self, message, report=None, witness=None):
        super().__init__(message)
        self.report = report
        self.witness = witness


class InternalError(AnisoforgeError):
    """A check contradicted a theorem; treat as a bug."""
