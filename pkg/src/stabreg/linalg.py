"""Dense linear-algebra layer: SVD, rank, conditioning, pseudoinverse and direct solves.

Matrices and vectors are plain ``float64`` numpy arrays. The ``as_matrix`` and
``as_vector`` helpers are the single validation point: they reject non-finite
entries and empty shapes so that every downstream routine can assume clean input.
"""

from __future__ import annotations

import warnings
from dataclasses import dataclass
from pathlib import Path

import numpy as np
import scipy.linalg as sla

from .errors import InvalidDimension, NonConvergence, SingularToWorkingPrecision

__all__ = [
    "SvdResult",
    "Spectrum",
    "as_matrix",
    "as_vector",
    "svd",
    "singular_values",
    "default_tolerance",
    "numerical_rank",
    "condition_number",
    "min_norm_solution",
    "solve_linear",
    "dump_array",
    "load_array",
]

EPS = np.finfo(np.float64).eps


def as_matrix(a, name: str = "matrix") -> np.ndarray:
    arr = np.asarray(a, dtype=np.float64)
    if arr.ndim != 2:
        raise InvalidDimension(f"{name} must be 2-D, got shape {arr.shape}")
    if arr.shape[0] < 1 or arr.shape[1] < 1:
        raise InvalidDimension(f"{name} must have at least one row and column, got {arr.shape}")
    if not np.all(np.isfinite(arr)):
        raise ValueError(f"{name} contains non-finite entries")
    return arr


def as_vector(v, name: str = "vector") -> np.ndarray:
    arr = np.asarray(v, dtype=np.float64)
    if arr.ndim != 1:
        raise InvalidDimension(f"{name} must be 1-D, got shape {arr.shape}")
    if not np.all(np.isfinite(arr)):
        raise ValueError(f"{name} contains non-finite entries")
    return arr


@dataclass(frozen=True)
class SvdResult:
    """Thin SVD ``A = U diag(s) V^T`` with ``k = min(m, n)`` singular triplets.

    Attributes
    ----------
    u : (m, k) ndarray
        Left singular vectors (columns).
    s : (k,) ndarray
        Singular values, non-increasing and non-negative.
    v : (n, k) ndarray
        Right singular vectors (columns), *not* transposed.
    """

    u: np.ndarray
    s: np.ndarray
    v: np.ndarray

    @property
    def shape(self) -> tuple[int, int]:
        return self.u.shape[0], self.v.shape[0]

    def reconstruct(self) -> np.ndarray:
        return (self.u * self.s) @ self.v.T


def svd(a) -> SvdResult:
    """Thin SVD of ``a``.

    The divide-and-conquer driver is tried first; if LAPACK reports a
    convergence failure the QR-iteration driver is tried before giving up.

    Raises
    ------
    NonConvergence
        Both LAPACK drivers failed.
    """
    a = as_matrix(a)
    last_err = None
    for driver in ("gesdd", "gesvd"):
        try:
            u, s, vt = sla.svd(a, full_matrices=False, lapack_driver=driver, check_finite=False)
        except np.linalg.LinAlgError as err:
            last_err = err
            continue
        return SvdResult(u=u, s=s, v=vt.T)
    raise NonConvergence(f"SVD did not converge: {last_err}")


@dataclass(frozen=True)
class Spectrum:
    """Singular values of an ``m x n`` matrix, without the vectors."""

    s: np.ndarray
    shape: tuple[int, int]


def singular_values(a) -> Spectrum:
    """Singular values only.

    Without vectors LAPACK finishes with the qd iteration on the bidiagonal,
    which resolves values far below ``eps * sigma_1`` that the vector path
    returns as rounding noise. Rank and condition diagnostics use this path.
    """
    a = as_matrix(a)
    last_err = None
    for driver in ("gesdd", "gesvd"):
        try:
            s = sla.svd(a, compute_uv=False, lapack_driver=driver, check_finite=False)
        except np.linalg.LinAlgError as err:
            last_err = err
            continue
        return Spectrum(s=s, shape=a.shape)
    raise NonConvergence(f"SVD did not converge: {last_err}")


def default_tolerance(sv: SvdResult | Spectrum) -> float:
    """Rank cut ``max(m, n) * spacing(sigma_1)``.

    ``spacing(sigma_1)`` is the gap to the next representable double above the
    largest singular value, the convention under which the published rank values
    of the shaw/heat/phillips/gravity problems reproduce.
    """
    if sv.s.size == 0 or sv.s[0] == 0.0:
        return 0.0
    return max(sv.shape) * float(np.spacing(sv.s[0]))


def numerical_rank(sv: SvdResult | Spectrum, tol: float | None = None) -> int:
    if tol is None:
        tol = default_tolerance(sv)
    return int(np.count_nonzero(sv.s > tol))


def condition_number(sv: SvdResult | Spectrum) -> float:
    """``sigma_1 / sigma_k``; ``+inf`` when the smallest value is zero or the ratio overflows."""
    smax, smin = float(sv.s[0]), float(sv.s[-1])
    if smax == 0.0:
        return float("inf")
    if smin == 0.0:
        return float("inf")
    with np.errstate(over="ignore"):
        return float(np.float64(smax) / np.float64(smin))


def min_norm_solution(sv: SvdResult, b, tol: float | None = None) -> np.ndarray:
    """Pseudoinverse solution ``A^+ b`` truncated at ``tol``."""
    b = as_vector(b, "b")
    m, n = sv.shape
    if b.size != m:
        raise InvalidDimension(f"b has length {b.size}, expected {m}")
    if tol is None:
        tol = default_tolerance(sv)
    keep = sv.s > tol
    if not np.any(keep):
        return np.zeros(n)
    coef = (sv.u[:, keep].T @ b) / sv.s[keep]
    return sv.v[:, keep] @ coef


def solve_linear(m, rhs, pivot_tol: float = 0.0) -> np.ndarray:
    """Solve the square system ``m x = rhs`` by LU with partial pivoting.

    Parameters
    ----------
    m : (n, n) array_like
    rhs : (n,) array_like
    pivot_tol : float, optional
        Relative pivot floor: the factorization is rejected when
        ``min|u_ii| <= pivot_tol * max|u_ii|``. The default only rejects exact
        zero pivots, mirroring a plain backslash solve.

    Raises
    ------
    SingularToWorkingPrecision
        A pivot is zero (or below the requested floor) after factorization.
    """
    m = as_matrix(m, "system matrix")
    rhs = as_vector(rhs, "rhs")
    n = m.shape[0]
    if m.shape != (n, n):
        raise InvalidDimension(f"system matrix must be square, got {m.shape}")
    if rhs.size != n:
        raise InvalidDimension(f"rhs has length {rhs.size}, expected {n}")
    with warnings.catch_warnings():
        # exact-zero pivots are reported below as SingularToWorkingPrecision
        warnings.simplefilter("ignore", sla.LinAlgWarning)
        lu, piv = sla.lu_factor(m, check_finite=False)
    pivots = np.abs(np.diag(lu))
    pmax = pivots.max()
    if not np.all(np.isfinite(pivots)) or pmax == 0.0 or pivots.min() <= pivot_tol * pmax:
        raise SingularToWorkingPrecision(
            f"LU pivot ratio {pivots.min() / pmax if pmax else 0.0:.3e} at n={n}"
        )
    x = sla.lu_solve((lu, piv), rhs, check_finite=False)
    if not np.all(np.isfinite(x)):
        raise SingularToWorkingPrecision(f"non-finite solution at n={n}")
    return x


def dump_array(path, arr) -> Path:
    """Write a matrix (or a vector, as one column) in the plain-text dump format.

    First line ``rows cols``, then one row per line with 17 significant digits.
    """
    arr = np.asarray(arr, dtype=np.float64)
    if arr.ndim == 1:
        arr = arr[:, None]
    path = Path(path)
    rows, cols = arr.shape
    with path.open("w", encoding="ascii", newline="\n") as fh:
        fh.write(f"{rows} {cols}\n")
        for row in arr:
            fh.write(" ".join(format(float(x), ".17g") for x in row))
            fh.write("\n")
    return path


def load_array(path) -> np.ndarray:
    """Read a dump written by :func:`dump_array`; single-column data comes back 1-D."""
    with Path(path).open("r", encoding="ascii") as fh:
        rows, cols = (int(tok) for tok in fh.readline().split())
        data = np.array(fh.read().split(), dtype=np.float64)
    if data.size != rows * cols:
        raise ValueError(f"{path}: expected {rows * cols} entries, found {data.size}")
    data = data.reshape(rows, cols)
    return data[:, 0] if cols == 1 else data
