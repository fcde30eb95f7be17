"""Invariant suite behind ``stabreg verify``.

Each check returns a :class:`Check` with the measured quantity and the
threshold it was held to, so the report is useful even when everything passes.
"""

from __future__ import annotations

import math
from dataclasses import asdict, dataclass, field

import numpy as np

from . import problems
from .analysis import bound_report, gamma_grid
from .linalg import condition_number, min_norm_solution, numerical_rank, singular_values, svd
from .operators import identity_operator, regularization_operator
from .perturbation import white_noise
from .solvers import (
    RegConfig,
    covariance_matrix,
    covariance_norm,
    filtered_solution,
    limit_filter_factors,
    stabreg_damping,
    stabreg_filter_factors,
    stabreg_solve,
    stabreg_system,
    tikhonov_damping,
    tikhonov_filter_factors,
    tikhonov_solve,
)

__all__ = [
    "Check",
    "GOLDEN",
    "random_full_rank",
    "check_golden",
    "check_exact_prior",
    "check_duality",
    "check_limit",
    "check_damping",
    "check_covariance",
    "check_bounds",
    "run_all",
]


@dataclass
class Check:
    name: str
    passed: bool
    measured: float
    threshold: float
    detail: dict = field(default_factory=dict)

    def __post_init__(self):
        self.passed = bool(self.passed)
        self.measured = self.measured.item() if isinstance(self.measured, np.generic) else self.measured
        self.threshold = float(self.threshold)

    def as_dict(self) -> dict:
        return asdict(self)


# (label, factory, expected rank, expected log10 cond); None cond means "huge".
GOLDEN = (
    ("shaw(64)", lambda: problems.shaw(64), 20, 18.97),
    ("shaw(1000)", lambda: problems.shaw(1000), 20, 20.89),
    ("heat(50)", lambda: problems.heat(50), 48, 26.47),
    ("heat(1000)", lambda: problems.heat(1000), 588, None),
    ("phillips(1000)", lambda: problems.phillips(1000), 1000, 10.42),
    ("gravity(1000)", lambda: problems.gravity(1000), 45, 20.41),
)

# Problems and operator orders for the exact-prior checks.
EXACT_PRIOR_CASES = (
    ("shaw", 64, 2),
    ("shaw", 200, 2),
    ("heat", 50, 2),
    ("heat", 200, 2),
    ("phillips", 100, 1),
    ("phillips", 200, 1),
    ("gravity", 64, 2),
    ("gravity", 200, 2),
)


def random_full_rank(rng: np.random.Generator, m: int, n: int, cond: float) -> np.ndarray:
    """``m x n`` matrix (m >= n) with singular values log-spaced from 1 down to ``1/cond``."""
    qu, _ = np.linalg.qr(rng.standard_normal((m, n)))
    qv, _ = np.linalg.qr(rng.standard_normal((n, n)))
    s = np.logspace(0.0, -math.log10(cond), n)
    return (qu * s) @ qv.T


def check_golden(include_large: bool = True) -> list[Check]:
    out = []
    for label, factory, rank_ref, lc_ref in GOLDEN:
        if not include_large and "1000" in label:
            continue
        sv = singular_values(factory().a)
        rank = numerical_rank(sv)
        cond = condition_number(sv)
        lc = math.log10(cond) if 0 < cond < math.inf else math.inf
        rank_ok = abs(rank - rank_ref) <= 1
        out.append(Check(f"golden rank {label}", rank_ok, rank, rank_ref, {"tolerance": 1}))
        if lc_ref is None:
            out.append(Check(f"golden cond {label}", lc >= 100, lc, 100.0, {"rule": "log10 cond >= 100 or inf"}))
        else:
            out.append(
                Check(f"golden cond {label}", abs(lc - lc_ref) <= 1.0, lc, lc_ref, {"tolerance": 1.0})
            )
    return out


def check_exact_prior(cases=EXACT_PRIOR_CASES, tol_resid=1e-8, tol_err=1e-6) -> list[Check]:
    """Minimum-norm reference solves the stabilized system for every gamma when ``g = L u_ref``."""
    gammas = gamma_grid(1e-5, 1e5, 21)
    out = []
    for name, n, order in cases:
        inst = problems.generate(name, n)
        l_op = regularization_operator(n, order)
        sv = svd(inst.a)
        u_ref = min_norm_solution(sv, inst.b)
        full = numerical_rank(sv) == n
        ref_data = np.linalg.norm(inst.a @ u_ref)
        worst_res = worst_data = worst_sol = 0.0
        for gam in gammas:
            cfg = RegConfig.exact(gam, l_op, u_ref)
            mat, rhs = stabreg_system(inst.a, inst.b, cfg)
            worst_res = max(worst_res, np.linalg.norm(mat @ u_ref - rhs) / np.linalg.norm(rhs))
            u = stabreg_solve(inst.a, inst.b, cfg)
            worst_data = max(worst_data, np.linalg.norm(inst.a @ (u - u_ref)) / ref_data)
            worst_sol = max(worst_sol, np.linalg.norm(u - u_ref) / np.linalg.norm(u_ref))
        label = f"{name}({n}) L{order}"
        out.append(Check(f"exact prior residual {label}", worst_res <= tol_resid, worst_res, tol_resid))
        out.append(Check(f"exact prior data error {label}", worst_data <= tol_err, worst_data, tol_err))
        if full:
            out.append(Check(f"exact prior solution error {label}", worst_sol <= tol_err, worst_sol, tol_err))
    return out


def check_duality(trials: int = 20, tol: float = 1e-8) -> list[Check]:
    """Direct solves with ``L = I, g = 0`` against the SVD filter expansions."""
    worst = {"stabreg": 0.0, "tikhonov": 0.0}
    for seed in range(trials):
        rng = np.random.default_rng(seed)
        n = int(rng.integers(2, 21))
        m = int(rng.integers(n, 31))
        cond = 10.0 ** rng.uniform(0.0, 6.0)
        a = random_full_rank(rng, m, n, cond)
        b = rng.standard_normal(m)
        sv = svd(a)
        eye = identity_operator(n)
        for gam in (1e-6, 1.0, 1e6):
            cfg = RegConfig(gam, eye)
            for method, solve, factors in (
                ("stabreg", stabreg_solve, stabreg_filter_factors),
                ("tikhonov", tikhonov_solve, tikhonov_filter_factors),
            ):
                ref = filtered_solution(sv, b, factors(sv.s, gam))
                err = np.linalg.norm(solve(a, b, cfg) - ref) / np.linalg.norm(ref)
                worst[method] = max(worst[method], err)
    return [Check(f"duality {k}", v <= tol, v, tol, {"trials": trials}) for k, v in worst.items()]


def check_limit(include_large: bool = True, tol_factors=1e-6, tol_solution=1e-3) -> list[Check]:
    sigma = np.logspace(-4, 0, 100)
    dev = float(np.max(np.abs(stabreg_filter_factors(sigma, 1e12).factors - limit_filter_factors(sigma).factors)))
    out = [Check("limit factors gamma=1e12", dev <= tol_factors, dev, tol_factors)]

    # Distance to the limit must shrink as gamma grows.
    gammas = np.logspace(-6, 12, 37)
    lim = limit_filter_factors(sigma).factors
    gaps = np.array([np.abs(stabreg_filter_factors(sigma, g).factors - lim) for g in gammas])
    growth = float(np.max(np.diff(gaps, axis=0)))
    out.append(Check("limit approach monotone", growth <= 1e-15, growth, 1e-15))

    if include_large:
        inst = problems.shaw(1000)
        sv = svd(inst.a)
        ref = filtered_solution(sv, inst.b, limit_filter_factors(sv.s))
        u = stabreg_solve(inst.a, inst.b, RegConfig(1e12, identity_operator(inst.n)))
        rel = float(np.linalg.norm(u - ref) / np.linalg.norm(ref))
        out.append(Check("limit solution shaw(1000)", rel <= tol_solution, rel, tol_solution))
    return out


def check_damping() -> list[Check]:
    sigma = np.logspace(-8, 2, 100)
    gammas = np.logspace(-6, 12, 19)
    violations = 0
    for gam in gammas:
        violations += int(np.count_nonzero(stabreg_damping(sigma, gam) > tikhonov_damping(sigma, gam)))
    return [Check("damping comparison", violations == 0, violations, 0, {"grid": [100, 19]})]


def check_covariance(tol: float = 1e-10) -> list[Check]:
    """Closed-form covariance norm against the assembled matrix.

    The 1-norm comparison uses a diagonal ``A`` (``V`` a permutation), the only
    case where the assembled 1-norm equals the largest eigenvalue; general
    matrices are compared in the 2-norm.
    """
    rng = np.random.default_rng(2024)
    worst_one = worst_two = 0.0
    for trial in range(10):
        sigma = np.sort(10.0 ** rng.uniform(-3, 1, 8))[::-1]
        gam = 10.0 ** rng.uniform(-3, 3)
        eta = 10.0 ** rng.uniform(-4, 0)
        closed = covariance_norm(sigma, gam, eta)
        cov = covariance_matrix(svd(np.diag(sigma)), gam, eta)
        worst_one = max(worst_one, abs(np.linalg.norm(cov, 1) - closed) / closed)
        a = random_full_rank(rng, 10, 8, 1e3) * 10.0 ** rng.uniform(-1, 1)
        sv = svd(a)
        closed = covariance_norm(sv.s, gam, eta)
        cov = covariance_matrix(sv, gam, eta)
        worst_two = max(worst_two, abs(np.linalg.norm(cov, 2) - closed) / closed)
    return [
        Check("covariance 1-norm (diagonal A)", worst_one <= tol, worst_one, tol),
        Check("covariance 2-norm (random A)", worst_two <= tol, worst_two, tol),
    ]


def check_bounds(trials: int = 50, tol: float = 1e-10) -> list[Check]:
    """Perturbation bounds in data and solution space, plus the exact-prior variant."""
    worst = {"data": math.inf, "solution": math.inf, "exact data": math.inf, "exact solution": math.inf}
    slacks = []
    lam_err = 0.0
    for seed in range(trials):
        rng = np.random.default_rng(10_000 + seed)
        n = int(rng.integers(4, 13))
        m = int(rng.integers(n, 2 * n + 1))
        a = random_full_rank(rng, m, n, 10.0 ** rng.uniform(0, 4))
        u_star = rng.standard_normal(n)
        b = a @ u_star
        b_tilde = white_noise(b, 10.0 ** rng.uniform(-4, -1), seed)
        gam = 10.0 ** rng.uniform(-3, 5)
        order = seed % 3 if n >= 3 else 0
        l_op = regularization_operator(n, order)

        cfg = RegConfig(gam, l_op, rng.standard_normal(l_op.shape[0]), "given")
        rep = bound_report(a, b, b_tilde, stabreg_solve(a, b, cfg), stabreg_solve(a, b_tilde, cfg), gam)
        slacks.append(rep.slack_data / rep.rhs_data)
        worst["data"] = min(worst["data"], rep.slack_data / rep.rhs_data)
        worst["solution"] = min(worst["solution"], rep.slack_sol / rep.rhs_sol)
        smin = svd(a).s[-1]
        lam_err = max(lam_err, abs(rep.lambda_n - smin**2) / smin**2)

        # Exact prior: u* itself stands in for the unperturbed regularized solution.
        cfg = RegConfig.exact(gam, l_op, u_star)
        rep = bound_report(a, b, b_tilde, u_star, stabreg_solve(a, b_tilde, cfg), gam)
        worst["exact data"] = min(worst["exact data"], rep.slack_data / rep.rhs_data)
        worst["exact solution"] = min(worst["exact solution"], rep.slack_sol / rep.rhs_sol)

    out = [Check(f"bound slack {k}", v >= -tol, v, -tol, {"trials": trials}) for k, v in worst.items()]
    q = np.quantile(slacks, [0.0, 0.25, 0.5, 0.75, 1.0])
    out[0].detail["relative_slack_quantiles"] = [float(x) for x in q]
    out.append(Check("lambda_n equals sigma_min^2", lam_err <= 1e-12, lam_err, 1e-12))
    return out


def run_all(include_large: bool = True) -> list[Check]:
    checks: list[Check] = []
    checks += check_golden(include_large)
    checks += check_exact_prior()
    checks += check_duality()
    checks += check_limit(include_large)
    checks += check_damping()
    checks += check_covariance()
    checks += check_bounds()
    return checks
