"""Small validation helpers shared by the public modules."""

import numpy as np

from .errors import InputError


def as_data_matrix(x, name="X"):
    """Coerce to a finite float64 matrix of shape (n, d) with n, d >= 1."""
    arr = np.asarray(x, dtype=np.float64)
    if arr.ndim != 2:
        raise InputError(f"{name} must be 2-D, got shape {arr.shape}")
    if arr.shape[0] < 1 or arr.shape[1] < 1:
        raise InputError(f"{name} must be non-empty, got shape {arr.shape}")
    if not np.all(np.isfinite(arr)):
        raise InputError(f"{name} contains non-finite values")
    return arr


def as_square_matrix(x, name="K"):
    """Coerce to a float64 square matrix; shape errors raise InputError."""
    arr = np.asarray(x, dtype=np.float64)
    if arr.ndim != 2 or arr.shape[0] != arr.shape[1]:
        raise InputError(f"{name} must be square, got shape {arr.shape}")
    return arr


def as_vector(x, name="x"):
    """Coerce to a finite float64 vector."""
    arr = np.asarray(x, dtype=np.float64)
    if arr.ndim != 1:
        raise InputError(f"{name} must be 1-D, got shape {arr.shape}")
    if not np.all(np.isfinite(arr)):
        raise InputError(f"{name} contains non-finite values")
    return arr


def as_index_array(x, name="indices"):
    """Coerce to a 1-D array of nonnegative, distinct integer indices."""
    arr = np.asarray(x)
    if arr.ndim != 1:
        raise InputError(f"{name} must be 1-D, got shape {arr.shape}")
    if arr.size and not np.issubdtype(arr.dtype, np.integer):
        raise InputError(f"{name} must be integers")
    arr = arr.astype(np.intp, copy=False)
    if arr.size:
        if arr.min() < 0:
            raise InputError(f"{name} must be nonnegative")
        if np.unique(arr).size != arr.size:
            raise InputError(f"{name} must be distinct")
    return arr
