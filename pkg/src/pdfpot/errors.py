"""Exception types raised across the package."""


class DomainError(ValueError):
    """Argument lies outside the support of a distribution or formula."""


class NormalizationError(ValueError):
    """A tabulated density cannot be normalized."""


class EmptyCurveError(ValueError):
    """No valid cell remains after masking."""


class UnsupportedError(ValueError):
    """The requested quantity is not defined for this family or regime."""


class SolverError(RuntimeError):
    """An eigensolver failed to converge.

    Parameters
    ----------
    message : str
    diagnostics : dict, optional
        Iteration count, last residual and similar bookkeeping.
    """

    def __init__(self, message, diagnostics=None):
        super().__init__(message)
        self.diagnostics = dict(diagnostics or {})


class InconclusiveError(RuntimeError):
    """A grid-refinement check did not give a stable answer."""


class InputFormatError(ValueError):
    """A tabulated input file is malformed."""
