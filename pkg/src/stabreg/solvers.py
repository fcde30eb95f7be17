"""Tikhonov and stabilized-regularized solvers, filter factors and SVD diagnostics.

Two linear systems are solved directly:

* Tikhonov::

      (A^T A + gamma L^T L) u = A^T b + gamma L^T g

* stabilized-regularized, which adds the normal equation as a penalty::

      ((I + gamma A^T A) A^T A + gamma L^T L) u = (I + gamma A^T A) A^T b + gamma L^T g

The ``g`` term depends on ``RegConfig.g_mode``. With ``"exact"``, ``g = L u_ref``
for a known reference solution; if ``u_ref`` also satisfies the normal equation
it solves the stabilized system for every ``gamma``. With ``"zero"`` the
``gamma L^T g`` term is dropped and the method acts as the spectral filter
``phi = (s^2 + gamma s^4) / (s^2 + gamma s^4 + gamma)`` (for ``L = I``). No
gamma-independence is claimed in that mode.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import InvalidDimension, InvalidParameter
from .linalg import SvdResult, as_matrix, as_vector, solve_linear

__all__ = [
    "G_MODES",
    "RegConfig",
    "FilterProfile",
    "NormalProducts",
    "normal_products",
    "tikhonov_system",
    "stabreg_system",
    "tikhonov_solve",
    "stabreg_solve",
    "stabreg_filter_factors",
    "tikhonov_filter_factors",
    "limit_filter_factors",
    "stabreg_damping",
    "tikhonov_damping",
    "filtered_solution",
    "covariance_norm",
    "covariance_matrix",
    "bias_vector",
]

G_MODES = ("zero", "exact", "given")


@dataclass(frozen=True)
class RegConfig:
    """Regularization run: parameter ``gamma``, operator ``l_op`` and prior ``g``."""

    gamma: float
    l_op: np.ndarray
    g: np.ndarray | None = None
    g_mode: str = "zero"

    def __post_init__(self):
        if not (np.isfinite(self.gamma) and self.gamma > 0):
            raise InvalidParameter(f"gamma must be a positive finite number, got {self.gamma}")
        if self.g_mode not in G_MODES:
            raise InvalidParameter(f"g_mode must be one of {G_MODES}, got {self.g_mode!r}")
        l_op = as_matrix(self.l_op, "L")
        object.__setattr__(self, "l_op", l_op)
        if self.g_mode == "zero":
            object.__setattr__(self, "g", None)
            return
        if self.g is None:
            raise InvalidParameter(f"g_mode={self.g_mode!r} requires g")
        g = as_vector(self.g, "g")
        if g.size != l_op.shape[0]:
            raise InvalidDimension(f"g has length {g.size}, L has {l_op.shape[0]} rows")
        object.__setattr__(self, "g", g)

    @classmethod
    def exact(cls, gamma: float, l_op, u_ref) -> "RegConfig":
        """Prior taken from a known solution: ``g = L u_ref``."""
        l_op = as_matrix(l_op, "L")
        return cls(gamma, l_op, l_op @ as_vector(u_ref, "u_ref"), "exact")

    def with_gamma(self, gamma: float) -> "RegConfig":
        return RegConfig(gamma, self.l_op, self.g, self.g_mode)


@dataclass(frozen=True)
class FilterProfile:
    singular_values: np.ndarray
    factors: np.ndarray

    def __post_init__(self):
        s = np.asarray(self.singular_values, dtype=np.float64)
        f = np.asarray(self.factors, dtype=np.float64)
        if s.shape != f.shape:
            raise InvalidDimension(f"{s.shape} singular values vs {f.shape} factors")
        if np.any((f < 0.0) | (f > 1.0)):
            raise InvalidParameter("filter factors must lie in [0, 1]")
        object.__setattr__(self, "singular_values", s)
        object.__setattr__(self, "factors", f)


@dataclass(frozen=True)
class NormalProducts:
    """Gamma-independent pieces of both systems, computed once per sweep.

    ``ltg`` is ``None`` when no prior is used.
    """

    ata: np.ndarray
    atb: np.ndarray
    ata2: np.ndarray
    ata_atb: np.ndarray
    ltl: np.ndarray
    ltg: np.ndarray | None


def normal_products(a, b, l_op, g=None) -> NormalProducts:
    a = as_matrix(a, "A")
    b = as_vector(b, "b")
    l_op = as_matrix(l_op, "L")
    if b.size != a.shape[0]:
        raise InvalidDimension(f"A is {a.shape}, b has length {b.size}")
    if l_op.shape[1] != a.shape[1]:
        raise InvalidDimension(f"L is {l_op.shape}, A has {a.shape[1]} columns")
    ata = a.T @ a
    atb = a.T @ b
    ltg = None if g is None else l_op.T @ g
    return NormalProducts(ata, atb, ata @ ata, ata @ atb, l_op.T @ l_op, ltg)


def _products(a, b, cfg: RegConfig, products: NormalProducts | None) -> NormalProducts:
    if products is None:
        return normal_products(a, b, cfg.l_op, cfg.g)
    if cfg.g is not None and products.ltg is None:
        return NormalProducts(
            products.ata, products.atb, products.ata2, products.ata_atb, products.ltl, cfg.l_op.T @ cfg.g
        )
    return products


def tikhonov_system(a, b, cfg: RegConfig, products: NormalProducts | None = None):
    p = _products(a, b, cfg, products)
    gam = cfg.gamma
    mat = p.ata + gam * p.ltl
    rhs = p.atb.copy()
    if cfg.g is not None:
        rhs += gam * p.ltg
    return mat, rhs


def stabreg_system(a, b, cfg: RegConfig, products: NormalProducts | None = None):
    """Assembled matrix and right-hand side of the stabilized-regularized system."""
    p = _products(a, b, cfg, products)
    gam = cfg.gamma
    mat = p.ata + gam * p.ata2 + gam * p.ltl
    rhs = p.atb + gam * p.ata_atb
    if cfg.g is not None:
        rhs += gam * p.ltg
    return mat, rhs


def tikhonov_solve(a, b, cfg: RegConfig, products: NormalProducts | None = None) -> np.ndarray:
    return solve_linear(*tikhonov_system(a, b, cfg, products))


def stabreg_solve(a, b, cfg: RegConfig, products: NormalProducts | None = None) -> np.ndarray:
    """Solve the stabilized-regularized system for ``u_gamma``.

    Parameters
    ----------
    a : (m, n) array_like
    b : (m,) array_like
    cfg : RegConfig
    products : NormalProducts, optional
        Precomputed ``A^T A`` and friends for the same ``a``, ``b`` and ``L``;
        saves the O(n^3) products when sweeping over ``gamma``.

    Raises
    ------
    SingularToWorkingPrecision
        The assembled matrix has a zero pivot, e.g. ``N(A^T A)`` and ``N(L)``
        intersect.
    """
    return solve_linear(*stabreg_system(a, b, cfg, products))


def _check_sigma(sigma, gamma=None) -> np.ndarray:
    s = np.atleast_1d(np.asarray(sigma, dtype=np.float64))
    if np.any(s < 0) or not np.all(np.isfinite(s)):
        raise InvalidParameter("singular values must be finite and >= 0")
    if gamma is not None and not (gamma > 0):
        raise InvalidParameter(f"gamma must be positive, got {gamma}")
    return s


def stabreg_filter_factors(sigma, gamma: float) -> FilterProfile:
    s = _check_sigma(sigma, gamma)
    s2 = s * s
    top = s2 + gamma * s2 * s2
    return FilterProfile(s, top / (top + gamma))


def tikhonov_filter_factors(sigma, gamma: float) -> FilterProfile:
    s = _check_sigma(sigma, gamma)
    s2 = s * s
    return FilterProfile(s, s2 / (s2 + gamma))


def limit_filter_factors(sigma) -> FilterProfile:
    """Large-gamma limit ``s^4 / (s^4 + 1)`` of the stabilized factors."""
    s = _check_sigma(sigma)
    s4 = s**4
    return FilterProfile(s, s4 / (s4 + 1.0))


def stabreg_damping(sigma, gamma: float) -> np.ndarray:
    """``1 - phi`` in the cancellation-free form ``gamma / (s^2 + gamma s^4 + gamma)``."""
    s2 = _check_sigma(sigma, gamma) ** 2
    return gamma / (s2 + gamma * s2 * s2 + gamma)


def tikhonov_damping(sigma, gamma: float) -> np.ndarray:
    s2 = _check_sigma(sigma, gamma) ** 2
    return gamma / (s2 + gamma)


def filtered_solution(sv: SvdResult, b, profile: FilterProfile) -> np.ndarray:
    """``sum_i f_i (u_i^T b / s_i) v_i``; components with ``s_i = 0`` are dropped."""
    b = as_vector(b, "b")
    m, _ = sv.shape
    if b.size != m:
        raise InvalidDimension(f"b has length {b.size}, expected {m}")
    f = profile.factors
    if f.size != sv.s.size:
        raise InvalidDimension(f"{f.size} factors for {sv.s.size} singular values")
    nz = sv.s > 0
    coef = np.zeros_like(sv.s)
    coef[nz] = f[nz] * (sv.u[:, nz].T @ b) / sv.s[nz]
    return sv.v @ coef


def covariance_norm(sigma, gamma: float, eta: float) -> float:
    """``eta^2 max_i phi_i^2 / s_i^2`` over the non-zero singular values."""
    s = _check_sigma(sigma, gamma)
    if eta < 0:
        raise InvalidParameter(f"eta must be >= 0, got {eta}")
    s = s[s > 0]
    if s.size == 0 or eta == 0:
        return 0.0
    s2 = s * s
    vals = (1.0 + gamma * s2) ** 2 * s2 / (s2 + gamma * s2 * s2 + gamma) ** 2
    return float(eta**2 * np.max(vals))


def covariance_matrix(sv: SvdResult, gamma: float, eta: float) -> np.ndarray:
    """Assembled ``eta^2 sum_i (phi_i / s_i)^2 v_i v_i^T`` (dense, n x n)."""
    s = sv.s
    nz = s > 0
    weight = np.zeros_like(s)
    phi = stabreg_filter_factors(s[nz], gamma).factors
    weight[nz] = (phi / s[nz]) ** 2
    return eta**2 * (sv.v * weight) @ sv.v.T


def bias_vector(sv: SvdResult, u_star, gamma: float, method: str = "stabreg") -> np.ndarray:
    """``u* - E[u_gamma]`` for white noise: ``sum_i (1 - f_i) <u*, v_i> v_i``.

    The part of ``u*`` outside ``span(V)`` (only present when ``m < n``) is
    carried over in full, since its filter factor is zero.
    """
    u = as_vector(u_star, "u_star")
    _, n = sv.shape
    if u.size != n:
        raise InvalidDimension(f"u_star has length {u.size}, expected {n}")
    if method == "stabreg":
        damp = stabreg_damping(sv.s, gamma)
    elif method == "tikhonov":
        damp = tikhonov_damping(sv.s, gamma)
    else:
        raise InvalidParameter(f"method must be 'stabreg' or 'tikhonov', got {method!r}")
    coef = sv.v.T @ u
    out = sv.v @ (damp * coef)
    if sv.v.shape[1] < n:
        out += u - sv.v @ coef
    return out
