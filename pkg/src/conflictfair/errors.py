"""Exception hierarchy shared by every module of the package."""


class ConflictFairError(Exception):
    """Base class for all errors raised by conflictfair."""


class MalformedAllocation(ConflictFairError):
    """Allocation has the wrong number of bundles or out-of-range items."""


class InfeasibleAllocation(ConflictFairError):
    """Allocation has overlapping bundles or a conflict inside a bundle."""


class IncompleteValuation(ConflictFairError):
    """A table valuation was queried on an unlisted set and has no default."""


class UnsupportedValuation(ConflictFairError):
    """The valuation profile is outside the class an operation handles."""


class WrongSolver(ConflictFairError):
    """The instance does not meet the structural precondition of a solver."""


class PreconditionError(ConflictFairError):
    """An input violates a documented precondition."""


class CatalogError(ConflictFairError):
    """Unknown built-in instance name or invalid catalog parameter."""


class ValidationError(ConflictFairError):
    """Structural validation of user input failed."""


class ParseError(ConflictFairError):
    """A JSON document does not match the expected schema.

    ``location`` is a JSON-pointer-like path to the offending node.
    """

    def __init__(self, message: str, location: str = ""):
        self.location = location
        super().__init__(f"{location}: {message}" if location else message)


class BudgetExhausted(ConflictFairError):
    """An enumeration ran past its node budget before finishing."""

    def __init__(self, message: str, nodes: int = 0):
        self.nodes = nodes
        super().__init__(message)


class Inconclusive(BudgetExhausted):
    """An existence query could neither find a witness nor rule one out."""
