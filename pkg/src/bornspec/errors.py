"""Exception hierarchy.

Validation problems derive from :class:`ValueError` (CLI exit code 2);
numerical breakdowns derive from :class:`NumericalError` (exit code 3).
"""


class BornSpecError(Exception):
    """Base class for every error raised by this package."""


class ValidationError(BornSpecError, ValueError):
    pass


class GeometryError(ValidationError):
    pass


class EmptyVoxelizationError(GeometryError):
    def __init__(self, message="empty voxelization"):
        super().__init__(message)


class VoxelFileError(BornSpecError, OSError):
    """Unreadable or malformed voxel list file."""

    def __init__(self, path, lineno, message):
        self.path = str(path)
        self.lineno = lineno
        where = f"{self.path}:{lineno}" if lineno is not None else self.path
        super().__init__(f"{where}: {message}")


class SelfTermError(ValidationError):
    pass


class DimensionMismatchError(ValidationError):
    pass


class MemoryCapError(ValidationError):
    def __init__(self, required_bytes, cap_bytes):
        self.required_bytes = int(required_bytes)
        self.cap_bytes = int(cap_bytes)
        super().__init__(
            f"refusing dense assembly: requires {self.required_bytes} bytes "
            f"(cap {self.cap_bytes} bytes; set BSPC_MEMORY_CAP_BYTES to override)"
        )


class NumericalError(BornSpecError, ArithmeticError):
    pass


class SingularSystemError(NumericalError):
    def __init__(self, condition_estimate, message=None):
        self.condition_estimate = float(condition_estimate)
        super().__init__(
            message
            or f"system is singular to working precision (1-norm condition estimate {self.condition_estimate:.3e})"
        )


class ConvergenceError(NumericalError):
    def __init__(self, message, last_iterate=None):
        self.last_iterate = last_iterate
        super().__init__(message)


class EigenSolverError(NumericalError):
    def __init__(self, stuck_index, message=None):
        self.stuck_index = stuck_index
        super().__init__(message or f"QR iteration failed to converge at eigenvalue index {stuck_index}")
