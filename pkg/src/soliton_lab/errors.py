"""Exception types shared across the package."""


class SolitonLabError(Exception):
    pass


class ConfigError(SolitonLabError, ValueError):
    """Bad configuration or usage; the CLI maps it to exit code 2."""


class UnsupportedKernelError(SolitonLabError, ValueError):
    pass


class DomainTooSmallError(SolitonLabError, ValueError):
    pass


class GridMismatchError(SolitonLabError, ValueError):
    pass


class BranchCutError(SolitonLabError, ValueError):
    pass


class BoundaryMassError(SolitonLabError, ValueError):
    pass


class ParityError(SolitonLabError, ValueError):
    pass


class DecompositionError(SolitonLabError, RuntimeError):
    def __init__(self, message, residuals=None):
        super().__init__(message)
        self.residuals = residuals


class IllConditionedError(SolitonLabError, RuntimeError):
    pass


class BlowupError(SolitonLabError, RuntimeError):
    def __init__(self, message, time=None, trajectory=None):
        super().__init__(message)
        self.time = time
        self.trajectory = trajectory


class ResolutionError(SolitonLabError):
    """Quadrature nodes too coarse for the oscillation they must resolve."""
