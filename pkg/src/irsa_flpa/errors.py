"""Exception hierarchy shared by the analysis engines and the CLI."""


class IrsaError(Exception):
    """Base class for all package errors."""


class ConfigError(IrsaError, ValueError):
    """Invalid system configuration, degree distribution or degree vector."""


class PreconditionError(IrsaError, ValueError):
    """An operation was called on inputs violating its precondition."""


class BudgetExceeded(IrsaError, RuntimeError):
    """An enumeration ran past its configured work budget.

    Attributes:
        visited: number of search nodes (or matrices) visited before abort.
        produced: number of results emitted before abort.
        budget: the budget that was exceeded.
    """

    def __init__(self, message, *, visited=0, produced=0, budget=0):
        super().__init__(message)
        self.visited = visited
        self.produced = produced
        self.budget = budget
