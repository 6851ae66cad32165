"""Exception types shared across the package."""


class OffordError(Exception):
    """Base class for all errors raised by this package."""


class DimensionError(OffordError, ValueError):
    """Matrix or vector shape does not satisfy an operation's requirement."""


class InputError(OffordError, ValueError):
    """Malformed or out-of-domain input (bad file, broken precondition)."""


class BudgetError(OffordError):
    """An enumeration would exceed its configured cap.

    Carries the cap name, the cap value and the requirement that was
    observed, so callers can report exactly what blew up.
    """

    def __init__(self, cap_name: str, cap: int, required: int):
        self.cap_name = cap_name
        self.cap = cap
        self.required = required
        super().__init__(f"{cap_name} exceeded: requires {required}, cap is {cap}")


class ProperizationError(OffordError):
    """Relation elimination could not produce a proper progression."""

    def __init__(self, message: str, relation=None):
        self.relation = relation
        super().__init__(message if relation is None else f"{message} (relation {relation})")
