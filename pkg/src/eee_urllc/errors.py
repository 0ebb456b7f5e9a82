"""Exception types shared across the package."""


class DomainError(ValueError):
    """An argument lies outside the domain of the function."""


class InfeasibleError(RuntimeError):
    """The requested problem has no feasible point (e.g. unstable queue)."""


class ConvergenceError(RuntimeError):
    """An iterative or adaptive routine did not converge."""
