"""Input validation helpers shared by the functional API and the estimators."""

import numpy as np

from .errors import DimensionMismatchError, ValidationError


def check_points(points, *, name="points", allow_empty=False):
    """Return ``points`` as a C-contiguous float array of shape (n, 3)."""
    arr = np.asarray(points, dtype=float)
    if arr.ndim == 1 and arr.size == 3:
        arr = arr.reshape(1, 3)
    if arr.ndim != 2 or arr.shape[1] != 3:
        raise ValidationError(f"{name} must have shape (n, 3), got {arr.shape}")
    if not allow_empty and arr.shape[0] == 0:
        raise ValidationError(f"{name} is empty")
    if not np.all(np.isfinite(arr)):
        raise ValidationError(f"{name} contains non-finite values")
    return np.ascontiguousarray(arr)


def check_field(field, n_voxels, *, name="field"):
    """Return a complex vector field as a flat (3n,) array.

    Accepts shape (n, 3) or (3n,). Complex input is allowed, unlike
    :func:`sklearn.utils.check_array`.
    """
    arr = np.asarray(field)
    if arr.ndim == 2 and arr.shape == (n_voxels, 3):
        arr = arr.reshape(-1)
    if arr.ndim != 1 or arr.shape[0] != 3 * n_voxels:
        raise DimensionMismatchError(
            f"{name} must have shape ({n_voxels}, 3) or ({3 * n_voxels},), got {np.shape(field)}"
        )
    arr = arr.astype(complex)
    if not np.all(np.isfinite(arr)):
        raise ValidationError(f"{name} contains non-finite values")
    return arr


def check_square(matrix, *, name="matrix"):
    arr = np.asarray(matrix)
    if arr.ndim != 2 or arr.shape[0] != arr.shape[1]:
        raise DimensionMismatchError(f"{name} must be square, got shape {arr.shape}")
    if not np.all(np.isfinite(arr)):
        raise ValidationError(f"{name} contains non-finite entries")
    return arr


def check_positive(value, name, *, allow_zero=False):
    value = float(value)
    if not np.isfinite(value) or value < 0 or (value == 0 and not allow_zero):
        bound = ">= 0" if allow_zero else "> 0"
        raise ValidationError(f"{name} must be {bound}, got {value}")
    return value
