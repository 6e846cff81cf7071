"""Inverse error function: polynomial initial guess refined by Halley steps."""

from __future__ import annotations

import math

import numpy as np

from .errors import InvalidParameterError

_TWO_OVER_SQRT_PI = 2.0 / math.sqrt(math.pi)

# single-precision erfinv approximation (M. Giles, 2010), used only as a starting point
_CENTRAL = (
    2.81022636e-08, 3.43273939e-07, -3.5233877e-06, -4.39150654e-06, 0.00021858087,
    -0.00125372503, -0.00417768164, 0.246640727, 1.50140941,
)
_TAIL = (
    -0.000200214257, 0.000100950558, 0.00134934322, -0.00367342844, 0.00573950773,
    -0.0076224613, 0.00943887047, 1.00167406, 2.83297682,
)


def _initial_guess(x: float) -> float:
    w = -math.log((1.0 - x) * (1.0 + x))
    if w < 5.0:
        w -= 2.5
        coeffs = _CENTRAL
    else:
        w = math.sqrt(w) - 3.0
        coeffs = _TAIL
    p = 0.0
    for c in coeffs:
        p = c + p * w
    return p * x


def erf_inv(x: float) -> float:
    """Return ``y`` with ``erf(y) == x`` for ``-1 < x < 1``."""
    x = float(x)
    if not -1.0 < x < 1.0:
        raise InvalidParameterError(f"erf_inv is defined on (-1, 1), got {x}")
    if x == 0.0:
        return 0.0
    y = _initial_guess(x)
    for _ in range(4):
        slope = _TWO_OVER_SQRT_PI * math.exp(-y * y)
        step = (math.erf(y) - x) / slope
        # Halley correction: erf'' / erf' = -2y
        y -= step / (1.0 + y * step)
        if abs(step) < 1e-17:
            break
    return y


erf_inv_array = np.vectorize(erf_inv, otypes=[np.float64])
