"""Exception hierarchy shared across the package."""


class ProjggmError(Exception):
    """Base class for all package errors."""


class DegenerateInputError(ProjggmError):
    """Input data is degenerate (e.g. a constant column)."""


class InvalidPrecisionError(ProjggmError):
    """A matrix claimed to be a precision matrix violates its invariants."""


class SingularMatrixError(ProjggmError):
    """A matrix required to be positive definite is singular or indefinite."""


class InvalidParameterError(ProjggmError):
    """A parameter is outside its valid range."""


class NonPDConstructionError(ProjggmError):
    """A constructed precision matrix turned out not to be positive definite."""


class SamplerDivergenceError(ProjggmError):
    """The Gibbs sampler produced a non-finite state."""

    def __init__(self, message: str, iteration: int):
        super().__init__(f"{message} (iteration {iteration})")
        self.iteration = iteration


class DimensionalityError(ProjggmError):
    """Too few observations for the requested method."""


class DegenerateResidualError(ProjggmError):
    """A node's projected residual variance collapsed to (near) zero."""

    def __init__(self, node: int, variance: float):
        super().__init__(
            f"residual variance {variance:.3e} for node {node} is below 1e-12"
        )
        self.node = node


class NonConvergenceError(ProjggmError):
    """Iterative positive-definite correction did not converge."""

    def __init__(self, message: str, report):
        super().__init__(message)
        self.report = report


class DataFormatError(ProjggmError):
    """A CSV or grid file could not be parsed."""
