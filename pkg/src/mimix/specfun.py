"""Digamma function on the positive reals.

Arguments below ``_ASYMPTOTIC_FROM`` are shifted up with the recurrence
psi(x) = psi(x + 1) - 1/x, then the asymptotic expansion in 1/x^2 is
summed. Small integers, the common case inside the estimators, come from
a table of harmonic numbers.
"""

from __future__ import annotations

import math

import numpy as np

from .core import ParameterError

EULER_GAMMA = 0.57721566490153286061

_ASYMPTOTIC_FROM = 10.0

# B_{2j} / (2j) for j = 1..7
_ASYMPTOTIC_COEFFS = (
    1.0 / 12.0,
    -1.0 / 120.0,
    1.0 / 252.0,
    -1.0 / 240.0,
    1.0 / 132.0,
    -691.0 / 32760.0,
    1.0 / 12.0,
)

_TABLE_SIZE = 64
# _INT_TABLE[n] = psi(n) for n = 1.._TABLE_SIZE; index 0 unused
_INT_TABLE = np.array(
    [np.nan]
    + [-EULER_GAMMA + math.fsum(1.0 / j for j in range(1, n)) for n in range(1, _TABLE_SIZE + 1)]
)


def _digamma_general(x: np.ndarray) -> np.ndarray:
    x = x.astype(np.float64, copy=True)
    shift = np.zeros_like(x)
    small = x < _ASYMPTOTIC_FROM
    while small.any():
        shift[small] += 1.0 / x[small]
        x[small] += 1.0
        small = x < _ASYMPTOTIC_FROM
    inv2 = 1.0 / (x * x)
    series = np.zeros_like(x)
    for c in reversed(_ASYMPTOTIC_COEFFS):
        series = (series + c) * inv2
    return np.log(x) - 0.5 / x - series - shift


def digamma(x):
    """psi(x) for x > 0, scalar or array.

    Absolute error is below 1e-10 on (0, 1e7]. Raises
    :class:`ParameterError` for non-positive or non-finite arguments.
    """
    arr = np.asarray(x, dtype=np.float64)
    scalar = arr.ndim == 0
    arr = np.atleast_1d(arr)
    if not np.all(arr > 0) or not np.all(np.isfinite(arr)):
        raise ParameterError("digamma is only defined here for finite x > 0")
    out = np.empty_like(arr)
    is_int = (arr == np.floor(arr)) & (arr <= _TABLE_SIZE)
    if is_int.any():
        out[is_int] = _INT_TABLE[arr[is_int].astype(np.intp)]
    rest = ~is_int
    if rest.any():
        out[rest] = _digamma_general(arr[rest])
    if scalar:
        return float(out[0])
    return out


def digamma_general(x):
    """Same as :func:`digamma` but bypassing the small-integer table."""
    arr = np.asarray(x, dtype=np.float64)
    scalar = arr.ndim == 0
    arr = np.atleast_1d(arr)
    if not np.all(arr > 0):
        raise ParameterError("digamma is only defined here for x > 0")
    out = _digamma_general(arr)
    return float(out[0]) if scalar else out
