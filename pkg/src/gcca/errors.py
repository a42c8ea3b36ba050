"""Exception and warning types shared across the package."""


class DimensionError(ValueError):
    """Shapes or counts are inconsistent with an operation's contract."""


class RankError(ValueError):
    """A view or factor does not have the rank an operation requires."""


class ConvergenceError(RuntimeError):
    """An iterative solver did not meet its residual contract.

    The achieved relative residual is kept on ``residual``.
    """

    def __init__(self, message, residual=float("nan")):
        super().__init__(message)
        self.residual = residual


class DegenerateSampleError(RuntimeError):
    """Random factors stayed rank deficient after every retry."""


class SignalPowerError(ValueError):
    """Noise cannot be scaled against views with zero energy."""


class IllPosedWarning(UserWarning):
    """The pairwise system has no clear R-dimensional nullspace."""
