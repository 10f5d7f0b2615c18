"""Exception hierarchy shared by every module.

Indices carried by exceptions (slice, step, entry) are 1-based, matching the
frontal-slice numbering used throughout the library's reports.
"""


class QtError(Exception):
    """Base class for all library errors."""


class ShapeMismatch(QtError, ValueError):
    pass


class StructureViolation(QtError, ValueError):
    """A matrix does not carry the block structure an operation requires."""


class NumericalError(QtError, ArithmeticError):
    """Failures of a numerical kernel (the CLI maps these to exit code 2)."""


class ZeroQuaternion(NumericalError, ZeroDivisionError):
    pass


class Singular(NumericalError):
    def __init__(self, message="matrix is singular", *, slice=None, step=None):
        self.slice = slice
        self.step = step
        where = []
        if slice is not None:
            where.append(f"slice {slice}")
        if step is not None:
            where.append(f"step {step}")
        super().__init__(message + (f" ({', '.join(where)})" if where else ""))


class ZeroPivot(Singular):
    def __init__(self, message="zero pivot in LU without pivoting", *, slice=None, step=None):
        super().__init__(message, slice=slice, step=step)


class NoConvergence(NumericalError):
    def __init__(self, message="Jacobi SVD did not converge", *, slice=None):
        self.slice = slice
        super().__init__(message + (f" (slice {slice})" if slice is not None else ""))


class NotPureUnit(QtError, ValueError):
    def __init__(self, message="entry is not a pure unit quaternion", *, slice=None, entry=None):
        self.slice = slice
        self.entry = entry
        super().__init__(f"{message} (slice {slice}, entry {entry})")


class UnknownKind(QtError, ValueError):
    pass


class TooFewFrames(QtError, ValueError):
    pass
