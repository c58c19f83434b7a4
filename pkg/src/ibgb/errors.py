"""Exception types shared across the package."""


class InvalidArgument(ValueError):
    """A precondition on an argument was violated."""


class NumericError(FloatingPointError):
    """A forward/backward pass produced non-finite values.

    The message names the layer or term where the value first went bad.
    """


class TrainingDiverged(RuntimeError):
    """Training loss became NaN; carries the iteration index."""

    def __init__(self, iteration: int, message: str = ""):
        self.iteration = iteration
        super().__init__(message or f"training diverged at iteration {iteration}")


class UndefinedCorrelation(ValueError):
    """Correlation is undefined (zero variance in one of the arguments)."""


class RescaleUndefined(ValueError):
    """Rescaling is undefined because the reference mean is zero."""
