"""Exception types shared across the package."""


class InvalidArgument(ValueError):
    """An argument violates a documented precondition."""


class CapacityError(RuntimeError):
    """A size guard was exceeded (memory or brute-force cost)."""


class ContradictionError(RuntimeError):
    """Measurements became inconsistent with a nonnegative signal."""


class InfeasibleError(RuntimeError):
    """The linear program has no feasible point."""


class IterationLimitError(RuntimeError):
    """An iterative routine hit its iteration cap."""
