"""Exception hierarchy shared across the package."""


class GibbsSDPError(Exception):
    """Base class for all package errors."""


class NumericalError(GibbsSDPError):
    """An eigensolver or exponential failed to produce a usable result."""


class DimensionError(GibbsSDPError, ValueError):
    """Operands have incompatible shapes or exceed the dense limit."""


class InvalidInstanceError(GibbsSDPError, ValueError):
    """An SDP instance violates its normalization invariants."""

    def __init__(self, violations):
        self.violations = list(violations)
        super().__init__("; ".join(self.violations) or "invalid instance")


class PreconditionError(GibbsSDPError, ValueError):
    """A documented precondition of an operation does not hold."""


class WidthError(GibbsSDPError):
    """A payoff matrix left [0, I]: the width bound was underestimated."""


class SparsificationError(GibbsSDPError):
    """The sampled payoff matrix deviates beyond the Matrix Hoeffding budget."""


class SolverContractError(GibbsSDPError):
    """A feasibility solver returned something its contract forbids."""


class OracleError(GibbsSDPError):
    """A user-supplied oracle raised; carries the partial run trace."""

    def __init__(self, message, trace=None):
        super().__init__(message)
        self.trace = trace
