"""Shared small numerical helpers."""

from __future__ import annotations

import numpy as np


def spow(x, e):
    """Signed power sign(x)*|x|**e, the odd extension of x**e.

    Works on scalars and arrays; spow(0, e) = 0 for e > 0.
    """
    arr = np.asarray(x, dtype=float)
    out = np.sign(arr) * np.abs(arr) ** e
    if arr.ndim == 0:
        return float(out)
    return out


def as_scalar_or_array(values, scalar: bool):
    """Return a float for scalar inputs, the array otherwise."""
    if scalar:
        return float(values)
    return values
