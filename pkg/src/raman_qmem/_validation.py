"""Small input-validation helpers shared across modules."""

import numbers

import numpy as np

from .errors import DomainError


def check_scalar(x, name, *, low=None, high=None, low_inclusive=True, high_inclusive=True):
    """Return ``x`` as a finite float, checking optional bounds."""
    if isinstance(x, (bool, np.bool_)) or not isinstance(x, (numbers.Real, np.floating, np.integer)):
        raise DomainError(f"{name} must be a real number, got {type(x).__name__}")
    x = float(x)
    if not np.isfinite(x):
        raise DomainError(f"{name} must be finite, got {x}")
    if low is not None:
        if (x < low) if low_inclusive else (x <= low):
            op = ">=" if low_inclusive else ">"
            raise DomainError(f"{name} must be {op} {low}, got {x}")
    if high is not None:
        if (x > high) if high_inclusive else (x >= high):
            op = "<=" if high_inclusive else "<"
            raise DomainError(f"{name} must be {op} {high}, got {x}")
    return x


def check_int(n, name, *, low=None):
    if isinstance(n, (bool, np.bool_)) or not isinstance(n, (numbers.Integral, np.integer)):
        raise DomainError(f"{name} must be an integer, got {type(n).__name__}")
    n = int(n)
    if low is not None and n < low:
        raise DomainError(f"{name} must be >= {low}, got {n}")
    return n


def as_real_array(x, name, *, ndim=1):
    arr = np.asarray(x)
    if np.iscomplexobj(arr):
        raise DomainError(f"{name} must be real-valued")
    arr = arr.astype(float)
    if arr.ndim != ndim:
        raise DomainError(f"{name} must be {ndim}-dimensional, got shape {arr.shape}")
    if not np.all(np.isfinite(arr)):
        raise DomainError(f"{name} contains non-finite values")
    return arr


def as_complex_array(x, name, *, ndim=1):
    arr = np.asarray(x, dtype=complex)
    if arr.ndim != ndim:
        raise DomainError(f"{name} must be {ndim}-dimensional, got shape {arr.shape}")
    if not np.all(np.isfinite(arr)):
        raise DomainError(f"{name} contains non-finite values")
    return arr


def check_grid(t, name="grid", *, strict=True, min_size=2):
    """Validate a sorted 1-D sample grid."""
    t = as_real_array(t, name)
    if t.size < min_size:
        raise DomainError(f"{name} needs at least {min_size} points, got {t.size}")
    d = np.diff(t)
    if strict and np.any(d <= 0):
        raise DomainError(f"{name} must be strictly increasing")
    if not strict and np.any(d < 0):
        raise DomainError(f"{name} must be non-decreasing")
    return t


def check_same_grid(a, b, what="grids", rtol=1e-12):
    a = np.asarray(a, dtype=float)
    b = np.asarray(b, dtype=float)
    scale = max(np.max(np.abs(a)), np.max(np.abs(b)), 1.0)
    if a.shape != b.shape or np.max(np.abs(a - b)) > rtol * scale:
        raise DomainError(f"{what} do not match")
