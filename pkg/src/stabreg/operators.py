"""Regularization matrices ``L`` for the penalty ``||L v - g||``.

Stencils are unscaled (no ``1/h`` factors) and stored dense.
"""

from __future__ import annotations

import numpy as np

from .errors import InvalidDimension

__all__ = [
    "identity_operator",
    "first_derivative_operator",
    "second_derivative_operator",
    "regularization_operator",
]


def identity_operator(n: int) -> np.ndarray:
    if n < 1:
        raise InvalidDimension(f"identity operator needs n >= 1, got {n}")
    return np.eye(n)


def first_derivative_operator(n: int) -> np.ndarray:
    """(n-1) x n forward difference, rows ``(-1, 1)``."""
    if n < 2:
        raise InvalidDimension(f"first derivative operator needs n >= 2, got {n}")
    out = np.zeros((n - 1, n))
    rows = np.arange(n - 1)
    out[rows, rows] = -1.0
    out[rows, rows + 1] = 1.0
    return out


def second_derivative_operator(n: int) -> np.ndarray:
    """(n-2) x n second difference, rows ``(1, -2, 1)``."""
    if n < 3:
        raise InvalidDimension(f"second derivative operator needs n >= 3, got {n}")
    out = np.zeros((n - 2, n))
    rows = np.arange(n - 2)
    out[rows, rows] = 1.0
    out[rows, rows + 1] = -2.0
    out[rows, rows + 2] = 1.0
    return out


def regularization_operator(n: int, order: int) -> np.ndarray:
    """Operator by derivative order ``d`` in {0, 1, 2}."""
    builders = {0: identity_operator, 1: first_derivative_operator, 2: second_derivative_operator}
    try:
        build = builders[int(order)]
    except (KeyError, ValueError, TypeError):
        raise InvalidDimension(f"operator order must be 0, 1 or 2, got {order!r}") from None
    return build(n)
