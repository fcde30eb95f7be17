"""Experiment-level computations: gamma grids, error records, L-curves and bound slacks."""

from __future__ import annotations

import math
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass

import numpy as np

from .errors import DegenerateReference, InvalidDimension, InvalidParameter, StabRegError
from .linalg import as_matrix, as_vector, numerical_rank, svd
from .solvers import RegConfig, normal_products, stabreg_solve, tikhonov_solve

__all__ = [
    "METHODS",
    "SWEEP_FIELDS",
    "SweepResult",
    "BoundReport",
    "gamma_grid",
    "error_metrics",
    "solve_method",
    "run_sweep",
    "lcurve_points",
    "bound_report",
]

METHODS = ("tikhonov", "stabreg")

# Frozen column order of the sweep CSV.
SWEEP_FIELDS = (
    "gamma",
    "method",
    "abs_err_sol",
    "rel_err_sol",
    "abs_err_data",
    "rel_err_data",
    "residual",
    "seminorm",
    "sol_norm",
)


@dataclass(frozen=True)
class SweepResult:
    gamma: float
    method: str
    abs_err_sol: float
    rel_err_sol: float
    abs_err_data: float
    rel_err_data: float
    residual: float
    seminorm: float
    sol_norm: float
    status: str = "ok"

    @classmethod
    def failed(cls, gamma: float, method: str, status: str) -> "SweepResult":
        nan = float("nan")
        return cls(gamma, method, nan, nan, nan, nan, nan, nan, nan, status)

    def row(self) -> tuple:
        return tuple(getattr(self, name) for name in SWEEP_FIELDS)


def gamma_grid(lo: float, hi: float, count: int) -> np.ndarray:
    """``count`` log-uniform values from ``lo`` to ``hi``; both endpoints exact."""
    if not (0 < lo < hi) or not math.isfinite(hi):
        raise InvalidParameter(f"need 0 < lo < hi, got lo={lo}, hi={hi}")
    if count < 2:
        raise InvalidParameter(f"count must be >= 2, got {count}")
    grid = np.logspace(math.log10(lo), math.log10(hi), int(count))
    grid[0], grid[-1] = lo, hi
    return grid


def error_metrics(u_star, u, a, b_used, l_op, a_used=None) -> dict:
    """Norm diagnostics of a computed solution ``u``.

    Data errors use the exact operator ``a``; the residual uses the operator and
    right-hand side that were actually solved with (``a_used`` defaults to ``a``).

    Raises
    ------
    DegenerateReference
        ``||u*||`` or ``||A u*||`` is zero.
    """
    u_star = as_vector(u_star, "u_star")
    u = as_vector(u, "u")
    a = as_matrix(a, "A")
    b_used = as_vector(b_used, "b_used")
    l_op = as_matrix(l_op, "L")
    a_used = a if a_used is None else as_matrix(a_used, "A_used")
    if not (u.size == u_star.size == a.shape[1] == l_op.shape[1]) or b_used.size != a.shape[0]:
        raise InvalidDimension("inconsistent sizes in error_metrics")
    ref_sol = float(np.linalg.norm(u_star))
    au_star = a @ u_star
    ref_data = float(np.linalg.norm(au_star))
    if ref_sol == 0.0 or ref_data == 0.0:
        raise DegenerateReference("exact solution or exact data has zero norm")
    abs_sol = float(np.linalg.norm(u_star - u))
    abs_data = float(np.linalg.norm(au_star - a @ u))
    return {
        "abs_err_sol": abs_sol,
        "rel_err_sol": abs_sol / ref_sol,
        "abs_err_data": abs_data,
        "rel_err_data": abs_data / ref_data,
        "residual": float(np.linalg.norm(a_used @ u - b_used)),
        "seminorm": float(np.linalg.norm(l_op @ u)),
        "sol_norm": float(np.linalg.norm(u)),
    }


def solve_method(method: str, a, b, cfg: RegConfig, products=None) -> np.ndarray:
    if method == "stabreg":
        return stabreg_solve(a, b, cfg, products)
    if method == "tikhonov":
        return tikhonov_solve(a, b, cfg, products)
    raise InvalidParameter(f"method must be one of {METHODS}, got {method!r}")


def run_sweep(
    a,
    b_used,
    u_star,
    l_op,
    gammas,
    methods=METHODS,
    g_mode: str = "zero",
    a_exact=None,
    workers: int = 1,
) -> list[SweepResult]:
    """Solve every ``(gamma, method)`` pair and record its error metrics.

    ``a`` is the operator solved with (possibly perturbed); ``a_exact`` is the
    noise-free operator used for data errors and defaults to ``a``. With
    ``g_mode="exact"`` the prior is ``g = L u*``. Solver failures become rows
    with ``status`` set to the error name instead of aborting the sweep.
    Results come back ordered by gamma, then by method order.
    """
    a = as_matrix(a, "A")
    l_op = as_matrix(l_op, "L")
    u_star = as_vector(u_star, "u_star")
    a_exact = a if a_exact is None else as_matrix(a_exact, "A_exact")
    for m in methods:
        if m not in METHODS:
            raise InvalidParameter(f"method must be one of {METHODS}, got {m!r}")
    if g_mode not in ("zero", "exact"):
        raise InvalidParameter(f"sweep g_mode must be 'zero' or 'exact', got {g_mode!r}")
    g = l_op @ u_star if g_mode == "exact" else None
    products = normal_products(a, b_used, l_op, g)
    jobs = [(float(gam), m) for gam in sorted(float(x) for x in gammas) for m in methods]

    def one(job):
        gam, method = job
        cfg = RegConfig(gam, l_op, g, g_mode)
        try:
            u = solve_method(method, a, b_used, cfg, products)
        except StabRegError as err:
            return SweepResult.failed(gam, method, type(err).__name__)
        return SweepResult(gam, method, **error_metrics(u_star, u, a_exact, b_used, l_op, a_used=a))

    if workers > 1:
        with ThreadPoolExecutor(max_workers=workers) as pool:
            return list(pool.map(one, jobs))
    return [one(job) for job in jobs]


def lcurve_points(sweeps) -> list[tuple[float, float, float, float]]:
    """``(residual, seminorm, sol_norm, gamma)`` tuples sorted by gamma; data only."""
    sweeps = list(sweeps)
    if not sweeps:
        raise InvalidParameter("lcurve_points needs at least one sweep result")
    ordered = sorted(sweeps, key=lambda r: r.gamma)
    return [(r.residual, r.seminorm, r.sol_norm, r.gamma) for r in ordered]


@dataclass(frozen=True)
class BoundReport:
    """Both sides of the perturbation estimates.

    ``lhs_data <= rhs_data`` always; ``lhs_sol <= rhs_sol`` when ``A`` has full
    column rank. ``rank_deficient`` is set (and the solution fields are ``None``)
    otherwise.
    """

    lhs_data: float
    rhs_data: float
    lhs_sol: float | None
    rhs_sol: float | None
    lambda_n: float | None
    rank_deficient: bool

    @property
    def slack_data(self) -> float:
        return self.rhs_data - self.lhs_data

    @property
    def slack_sol(self) -> float | None:
        return None if self.rank_deficient else self.rhs_sol - self.lhs_sol


def bound_report(a, b, b_tilde, u_g, u_g_tilde, gamma: float) -> BoundReport:
    """Evaluate ``||A(u - u~)|| <= ||(I + gamma A A^T)(b - b~)||`` and its solution-space form.

    The solution-space bound divides by ``sqrt(lambda_n)`` with
    ``lambda_n = sigma_min(A)^2``.
    """
    a = as_matrix(a, "A")
    b, b_tilde = as_vector(b, "b"), as_vector(b_tilde, "b_tilde")
    u_g, u_g_tilde = as_vector(u_g, "u_gamma"), as_vector(u_g_tilde, "u_gamma_tilde")
    if not gamma > 0:
        raise InvalidParameter(f"gamma must be positive, got {gamma}")
    m, n = a.shape
    if b.size != m or b_tilde.size != m or u_g.size != n or u_g_tilde.size != n:
        raise InvalidDimension("inconsistent sizes in bound_report")
    db = b - b_tilde
    rhs = float(np.linalg.norm(db + gamma * (a @ (a.T @ db))))
    du = u_g - u_g_tilde
    lhs_data = float(np.linalg.norm(a @ du))
    sv = svd(a)
    if m < n or numerical_rank(sv) < n:
        return BoundReport(lhs_data, rhs, None, None, None, True)
    lam = float(sv.s[-1]) ** 2
    return BoundReport(lhs_data, rhs, float(np.linalg.norm(du)), rhs / math.sqrt(lam), lam, False)
