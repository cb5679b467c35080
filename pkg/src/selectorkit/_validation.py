"""Input validation helpers in the spirit of ``sklearn.utils.check_array``."""

import numpy as np

from .exceptions import InputError


def check_points(x, dim=None, name="x"):
    """Return ``x`` as a finite float array of shape (N, d).

    A single point of shape (d,) is promoted to (1, d).  The second return
    value tells whether the input was a single point so results can be
    squeezed back.
    """
    arr = np.asarray(x, dtype=float)
    single = arr.ndim == 1
    if single:
        arr = arr[None, :]
    if arr.ndim != 2:
        raise InputError(f"{name} must be a point or an array of points, got shape {arr.shape}")
    if dim is not None and arr.shape[1] != dim:
        raise InputError(f"{name} has dimension {arr.shape[1]}, expected {dim}")
    if not np.all(np.isfinite(arr)):
        raise InputError(f"{name} contains non-finite coordinates")
    return arr, single


def check_phase_point(x, dim=None):
    """Validate a single phase-space point (q1..qn, p1..pn)."""
    arr = np.asarray(x, dtype=float)
    if arr.ndim != 1 or arr.size == 0 or arr.size % 2:
        raise InputError(f"phase point must be a 1-d array of even length, got shape {arr.shape}")
    if dim is not None and arr.size != dim:
        raise InputError(f"phase point has dimension {arr.size}, expected {dim}")
    if not np.all(np.isfinite(arr)):
        raise InputError("phase point contains non-finite coordinates")
    return arr


def check_dimension(dim):
    dim = int(dim)
    if dim < 2 or dim % 2:
        raise InputError(f"phase-space dimension must be even and >= 2, got {dim}")
    return dim


def check_time(t):
    t = float(t)
    if not np.isfinite(t):
        raise InputError("time must be finite")
    return t


def check_positive(value, name, allow_zero=False):
    value = float(value)
    if not np.isfinite(value) or value < 0 or (value == 0 and not allow_zero):
        raise InputError(f"{name} must be {'non-negative' if allow_zero else 'positive'}, got {value}")
    return value


def check_random_state(seed):
    """Map ``None``/int/Generator to a ``numpy.random.Generator``."""
    if isinstance(seed, np.random.Generator):
        return seed
    return np.random.default_rng(seed)
