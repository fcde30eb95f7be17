"""Data perturbations: white noise, AR(1) filtered noise and neighbour smoothing.

Random draws come from a fixed recipe so that output is reproducible bit for
bit across platforms and numpy releases:

* uniform stream: the raw 64-bit output of numpy's ``PCG64`` bit generator
  seeded with ``seed`` (bit-generator streams are frozen by numpy's
  compatibility policy, unlike ``Generator`` methods);
* each word is mapped to ``(w >> 11) * 2**-53`` in ``[0, 1)``;
* normals by the Box-Muller transform on consecutive pairs ``(u1, u2)``:
  ``r = sqrt(-2 log(1 - u1))``, emitting ``r cos(2 pi u2)`` then
  ``r sin(2 pi u2)``.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np
from scipy.signal import lfilter

from .errors import InvalidDimension, InvalidParameter
from .linalg import as_matrix, as_vector

__all__ = [
    "NOISE_KINDS",
    "NoiseSpec",
    "standard_normals",
    "white_noise",
    "ar1_noise",
    "filtered_white_noise",
    "smoothing_perturbation",
    "perturb",
]

NOISE_KINDS = ("none", "white", "filtered_white", "smoothing")


@dataclass(frozen=True)
class NoiseSpec:
    """Perturbation descriptor; ``kind`` decides which of the other fields are read."""

    kind: str = "none"
    eta: float = 1e-3
    a_coeff: float = 0.5
    mu: float = 0.01
    seed: int = 0

    def __post_init__(self):
        if self.kind not in NOISE_KINDS:
            raise InvalidParameter(f"noise kind must be one of {NOISE_KINDS}, got {self.kind!r}")
        if not self.eta >= 0:
            raise InvalidParameter(f"eta must be >= 0, got {self.eta}")
        if not 0.0 <= self.a_coeff <= 1.0:
            raise InvalidParameter(f"a_coeff must lie in [0, 1], got {self.a_coeff}")


def standard_normals(count: int, seed: int) -> np.ndarray:
    """``count`` N(0, 1) draws from the PCG64 + Box-Muller recipe."""
    if count < 0:
        raise InvalidDimension(f"count must be >= 0, got {count}")
    pairs = (count + 1) // 2
    raw = np.random.PCG64(int(seed)).random_raw(2 * pairs)
    uniform = (raw >> np.uint64(11)).astype(np.float64) * 2.0**-53
    u1, u2 = uniform[0::2], uniform[1::2]
    radius = np.sqrt(-2.0 * np.log1p(-u1))
    angle = 2.0 * np.pi * u2
    out = np.empty(2 * pairs)
    out[0::2] = radius * np.cos(angle)
    out[1::2] = radius * np.sin(angle)
    return out[:count]


def white_noise(b, eta: float, seed: int) -> np.ndarray:
    """``b + eta * eps`` with independent standard normal ``eps``."""
    b = as_vector(b, "b")
    if not eta >= 0:
        raise InvalidParameter(f"eta must be >= 0, got {eta}")
    if eta == 0:
        return b.copy()
    return b + eta * standard_normals(b.size, seed)


def ar1_noise(n: int, eta: float, a_coeff: float, seed: int) -> np.ndarray:
    """AR(1) sequence ``e_i = a e_{i-1} + eta eps_i`` started at ``e_1 = eta eps_1``."""
    if not 0.0 <= a_coeff <= 1.0:
        raise InvalidParameter(f"a_coeff must lie in [0, 1], got {a_coeff}")
    if not eta >= 0:
        raise InvalidParameter(f"eta must be >= 0, got {eta}")
    drive = eta * standard_normals(n, seed)
    return lfilter([1.0], [1.0, -a_coeff], drive)


def filtered_white_noise(a_mat, b, eta: float, a_coeff: float, seed: int):
    """Add the same AR(1) value ``e_i`` to every entry of row ``i`` of ``A`` and to ``b_i``."""
    a_mat = as_matrix(a_mat, "A")
    b = as_vector(b, "b")
    if a_mat.shape[0] != b.size:
        raise InvalidDimension(f"A has {a_mat.shape[0]} rows but b has length {b.size}")
    if eta == 0:
        return a_mat.copy(), b.copy()
    e = ar1_noise(b.size, eta, a_coeff, seed)
    return a_mat + e[:, None], b + e


def smoothing_perturbation(a_mat, b, mu: float):
    """Add ``mu`` times the sum of the interior neighbours; boundary entries are untouched."""
    a_mat = as_matrix(a_mat, "A")
    b = as_vector(b, "b")
    rows, cols = a_mat.shape
    if b.size < 3 or rows < 3 or cols < 3:
        raise InvalidDimension(f"smoothing needs n >= 3, got A {a_mat.shape}, b {b.size}")
    if rows != b.size:
        raise InvalidDimension(f"A has {rows} rows but b has length {b.size}")
    if mu == 0:
        return a_mat.copy(), b.copy()
    eb = np.zeros_like(b)
    eb[1:-1] = mu * (b[:-2] + b[2:])
    ea = np.zeros_like(a_mat)
    ea[1:-1, 1:-1] = mu * (a_mat[:-2, 1:-1] + a_mat[2:, 1:-1] + a_mat[1:-1, :-2] + a_mat[1:-1, 2:])
    return a_mat + ea, b + eb


def perturb(a_mat, b, spec: NoiseSpec):
    """Apply ``spec`` and return ``(A_used, b_used)``; white noise leaves ``A`` as is."""
    if spec.kind == "none":
        return np.array(a_mat, dtype=np.float64), np.array(b, dtype=np.float64)
    if spec.kind == "white":
        return np.array(a_mat, dtype=np.float64), white_noise(b, spec.eta, spec.seed)
    if spec.kind == "filtered_white":
        return filtered_white_noise(a_mat, b, spec.eta, spec.a_coeff, spec.seed)
    return smoothing_perturbation(a_mat, b, spec.mu)
