"""Input validation helpers shared by the functional core and the estimators."""

import numpy as np

from .exceptions import InvalidInputError


def check_bits(bits):
    """Return ``bits`` as a 1-D ``uint8`` array of zeros and ones."""
    arr = np.asarray(bits)
    if arr.ndim != 1:
        arr = arr.ravel()
    if arr.size and not np.isin(arr, (0, 1)).all():
        raise InvalidInputError("bit sequences may only contain 0 and 1")
    return arr.astype(np.uint8, copy=False)


def check_samples(samples, allow_empty=False):
    """Return ``samples`` as a finite 1-D float array."""
    arr = np.asarray(samples, dtype=float)
    if arr.ndim != 1:
        arr = arr.ravel()
    if not allow_empty and arr.size == 0:
        raise InvalidInputError("sample window is empty")
    if not np.isfinite(arr).all():
        raise InvalidInputError("samples must be finite")
    return arr


def check_multiple(length, block, what="sequence"):
    if length % block:
        raise InvalidInputError(
            f"{what} length {length} is not a multiple of {block}"
        )


def check_positive(value, name):
    if not value > 0:
        raise InvalidInputError(f"{name} must be positive, got {value!r}")
    return value
