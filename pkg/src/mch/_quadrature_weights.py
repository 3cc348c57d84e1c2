"""Endpoint weights for the Gregory-corrected trapezoid rule."""
from fractions import Fraction
from math import comb

import numpy as np

# forward-difference coefficients of the left-endpoint correction
_GREGORY = (
    Fraction(1, 12),
    Fraction(-1, 24),
    Fraction(19, 720),
    Fraction(-3, 160),
    Fraction(863, 60480),
    Fraction(-275, 24192),
    Fraction(33953, 3628800),
    Fraction(-8183, 1036800),
)


def gregory_endpoint_weights(order=8):
    """Weights ``w`` so that ``sum(w[j] * v[j])`` equals the Gregory correction
    built from the first ``order`` forward differences at the left endpoint."""
    if not 0 <= order <= len(_GREGORY):
        raise ValueError(f"order must be in [0, {len(_GREGORY)}], got {order}")
    w = [Fraction(0)] * (order + 1)
    for k in range(1, order + 1):
        a = _GREGORY[k - 1]
        for j in range(k + 1):
            w[j] += a * comb(k, j) * (-1) ** (k - j)
    return np.array([float(v) for v in w])
