"""Acceptance suite: one PASS/FAIL line per criterion, each at its stated tolerance."""

from __future__ import annotations

import hashlib
import math
import time

import numpy as np
import pytest

from stabreg import problems
from stabreg.analysis import bound_report, gamma_grid, run_sweep
from stabreg.cli import main
from stabreg.linalg import condition_number, min_norm_solution, numerical_rank, singular_values, svd
from stabreg.operators import identity_operator, regularization_operator
from stabreg.perturbation import NoiseSpec, perturb, white_noise
from stabreg.solvers import (
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
from stabreg.verify import random_full_rank


@pytest.fixture
def report(capsys):
    def emit(label: str, ok: bool, detail: str) -> None:
        with capsys.disabled():
            print(f"\n[{'PASS' if ok else 'FAIL'}] {label}: {detail}")

    return emit


GOLDEN = [
    ("shaw(64)", lambda: problems.shaw(64), 20, 18.97),
    ("shaw(1000)", lambda: problems.shaw(1000), 20, 20.89),
    ("heat(50)", lambda: problems.heat(50, kappa=1.0), 48, 26.47),
    ("heat(1000)", lambda: problems.heat(1000, kappa=1.0), 588, None),
    ("phillips(1000)", lambda: problems.phillips(1000), 1000, 10.42),
    ("gravity(1000)", lambda: problems.gravity(1000, depth=0.25), 45, 20.41),
]


def test_golden_spectra(report):
    start = time.perf_counter()
    failures, parts = [], []
    for label, factory, rank_ref, lc_ref in GOLDEN:
        spec = singular_values(factory().a)
        rank = numerical_rank(spec)
        cond = condition_number(spec)
        lc = math.log10(cond) if math.isfinite(cond) else math.inf
        ok_rank = abs(rank - rank_ref) <= 1
        ok_cond = (cond >= 1e100) if lc_ref is None else abs(lc - lc_ref) <= 1.0
        parts.append(f"{label} rank={rank} log10cond={lc:.2f}")
        if not (ok_rank and ok_cond):
            failures.append(label)
    elapsed = time.perf_counter() - start
    ok = not failures and elapsed <= 300
    report("golden spectra", ok, "; ".join(parts) + f"; {elapsed:.1f}s")
    assert not failures
    assert elapsed <= 300


EXACT_CASES = [("shaw", 64, 2), ("shaw", 200, 2), ("heat", 50, 2), ("heat", 200, 2), ("phillips", 100, 1), ("phillips", 200, 1), ("gravity", 64, 2), ("gravity", 200, 2)]


def test_exact_prior_suite(report):
    gammas = gamma_grid(1e-5, 1e5, 21)
    worst_res = worst_data = worst_sol = 0.0
    for name, n, order in EXACT_CASES:
        inst = problems.generate(name, n)
        l_op = regularization_operator(n, order)
        sv = svd(inst.a)
        u_ref = min_norm_solution(sv, inst.b)
        full = numerical_rank(singular_values(inst.a)) == n
        for gam in gammas:
            cfg = RegConfig.exact(gam, l_op, u_ref)
            mat, rhs = stabreg_system(inst.a, inst.b, cfg)
            worst_res = max(worst_res, np.linalg.norm(mat @ u_ref - rhs) / np.linalg.norm(rhs))
            u = stabreg_solve(inst.a, inst.b, cfg)
            worst_data = max(worst_data, np.linalg.norm(inst.a @ (u - u_ref)) / np.linalg.norm(inst.a @ u_ref))
            if full:
                worst_sol = max(worst_sol, np.linalg.norm(u - u_ref) / np.linalg.norm(u_ref))
    ok = worst_res <= 1e-8 and worst_data <= 1e-6 and worst_sol <= 1e-6
    report(
        "exact-prior suite",
        ok,
        f"max residual {worst_res:.2e} (<=1e-8), max rel_err_data {worst_data:.2e} (<=1e-6), "
        f"max rel_err_sol on full-rank {worst_sol:.2e} (<=1e-6)",
    )
    assert ok


def test_filter_duality(report):
    worst_s = worst_t = 0.0
    for seed in range(20):
        rng = np.random.default_rng(1000 + seed)
        n = int(rng.integers(2, 21))
        m = int(rng.integers(n, 31))
        a = random_full_rank(rng, m, n, 10.0 ** rng.uniform(0, 6))
        b = rng.standard_normal(m)
        sv = svd(a)
        for gam in (1e-6, 1.0, 1e6):
            cfg = RegConfig(gam, identity_operator(n))
            ref = filtered_solution(sv, b, stabreg_filter_factors(sv.s, gam))
            worst_s = max(worst_s, np.linalg.norm(stabreg_solve(a, b, cfg) - ref) / np.linalg.norm(ref))
            ref = filtered_solution(sv, b, tikhonov_filter_factors(sv.s, gam))
            worst_t = max(worst_t, np.linalg.norm(tikhonov_solve(a, b, cfg) - ref) / np.linalg.norm(ref))
    ok = worst_s <= 1e-8 and worst_t <= 1e-8
    report("filter duality", ok, f"stabreg {worst_s:.2e}, tikhonov {worst_t:.2e} (<=1e-8, 20 matrices x 3 gammas)")
    assert ok


def test_limit_factors(report):
    sigma = np.logspace(-4, 0, 100)
    dev = np.max(np.abs(stabreg_filter_factors(sigma, 1e12).factors - limit_filter_factors(sigma).factors))
    inst = problems.shaw(1000)
    sv = svd(inst.a)
    ref = filtered_solution(sv, inst.b, limit_filter_factors(sv.s))
    u = stabreg_solve(inst.a, inst.b, RegConfig(1e12, identity_operator(inst.n)))
    rel = np.linalg.norm(u - ref) / np.linalg.norm(ref)
    ok = dev <= 1e-6 and rel <= 1e-3
    report("limit factors", ok, f"factor deviation {dev:.2e} (<=1e-6), shaw(1000) solution deviation {rel:.2e} (<=1e-3)")
    assert ok


def test_damping_and_covariance(report):
    sigma = np.logspace(-8, 2, 100)
    violations = sum(
        int(np.count_nonzero(stabreg_damping(sigma, g) > tikhonov_damping(sigma, g))) for g in np.logspace(-6, 12, 19)
    )
    rng = np.random.default_rng(8)
    worst_one = worst_two = 0.0
    for _ in range(10):
        s = np.sort(10.0 ** rng.uniform(-3, 1, 8))[::-1]
        gam, eta = 10.0 ** rng.uniform(-3, 3), 10.0 ** rng.uniform(-4, 0)
        closed = covariance_norm(s, gam, eta)
        worst_one = max(worst_one, abs(np.linalg.norm(covariance_matrix(svd(np.diag(s)), gam, eta), 1) - closed) / closed)
        sv = svd(random_full_rank(rng, 8, 8, 1e3))
        closed = covariance_norm(sv.s, gam, eta)
        worst_two = max(worst_two, abs(np.linalg.norm(covariance_matrix(sv, gam, eta), 2) - closed) / closed)
    ok = violations == 0 and worst_one <= 1e-10 and worst_two <= 1e-10
    report(
        "damping and covariance",
        ok,
        f"{violations} violations on 100x19 grid; covariance 1-norm (V = I) {worst_one:.1e}, "
        f"2-norm (random V) {worst_two:.1e} (<=1e-10)",
    )
    assert ok


def test_perturbation_bounds(report):
    worst = math.inf
    lam_err = 0.0
    for seed in range(50):
        rng = np.random.default_rng(5000 + seed)
        n = int(rng.integers(3, 13))
        m = int(rng.integers(n, 2 * n + 1))
        a = random_full_rank(rng, m, n, 10.0 ** rng.uniform(0, 4))
        u_star = rng.standard_normal(n)
        b = a @ u_star
        b_tilde = white_noise(b, 10.0 ** rng.uniform(-4, -1), seed)
        gam = 10.0 ** rng.uniform(-3, 5)
        l_op = regularization_operator(n, seed % 3)
        cfg = RegConfig(gam, l_op)
        rep = bound_report(a, b, b_tilde, stabreg_solve(a, b, cfg), stabreg_solve(a, b_tilde, cfg), gam)
        worst = min(worst, rep.slack_data / rep.rhs_data, rep.slack_sol / rep.rhs_sol)
        smin = np.linalg.svd(a, compute_uv=False)[-1]
        lam_err = max(lam_err, abs(rep.lambda_n - smin**2) / smin**2)
        cfg = RegConfig.exact(gam, l_op, u_star)
        rep = bound_report(a, b, b_tilde, u_star, stabreg_solve(a, b_tilde, cfg), gam)
        worst = min(worst, rep.slack_data / rep.rhs_data, rep.slack_sol / rep.rhs_sol)
    ok = worst >= -1e-10 and lam_err <= 1e-12
    report("perturbation bounds", ok, f"min relative slack {worst:.3e} (>=-1e-10) over 50 seeds; lambda_n error {lam_err:.1e}")
    assert ok


def test_perturbed_stability(report):
    grid = gamma_grid(1.0, 1e5, 21)
    inst = problems.shaw(1000)
    a, b = perturb(inst.a, inst.b, NoiseSpec("white", 1e-3, seed=0))
    res = run_sweep(a, b, inst.u_star, regularization_operator(1000, 2), grid, ("stabreg",), "zero", a_exact=inst.a)
    data = np.array([r.rel_err_data for r in res])
    shaw_ok = data.max() / data.min() < 10 and data.max() <= 1e-2

    inst = problems.phillips(1000)
    a, b = perturb(inst.a, inst.b, NoiseSpec("white", 1e-3, seed=0))
    res = run_sweep(a, b, inst.u_star, regularization_operator(1000, 1), [1.0, 1e5], ("stabreg",), "zero", a_exact=inst.a)
    ratio = res[1].rel_err_sol / res[0].rel_err_sol
    ok = shaw_ok and ratio <= 5
    report(
        "perturbed-data stability",
        ok,
        f"shaw(1000) rel_err_data in [{data.min():.2e}, {data.max():.2e}] spread {data.max() / data.min():.2f} (<10, max<=1e-2); "
        f"phillips(1000) rel_err_sol ratio 1e5/1 = {ratio:.2f} (<=5)",
    )
    assert ok


def test_determinism(report, tmp_path):
    argv = ["sweep", "--problem", "shaw", "--n", "200", "--noise", "white", "--eta", "1e-3", "--seed", "11", "--workers", "2", "--no-figures"]
    digests = []
    for _ in range(2):
        assert main(argv + ["--out", str(tmp_path)]) == 0
        digests.append(hashlib.sha256((tmp_path / "sweep.csv").read_bytes()).hexdigest())
    ok = digests[0] == digests[1]
    report("determinism", ok, f"sha256 {digests[0][:16]}... on both runs")
    assert ok


@pytest.mark.slow
def test_heat_refinement_trend(report):
    sizes = (1000, 2000, 5000)
    errs = []
    for n in sizes:
        inst = problems.heat(n, kappa=1.0)
        a, b = perturb(inst.a, inst.b, NoiseSpec("white", 1e-3, seed=0))
        res = run_sweep(a, b, inst.u_star, regularization_operator(n, 2), [1e5], ("stabreg",), "zero", a_exact=inst.a)
        errs.append(res[0].rel_err_sol)
    ok = all(e2 <= e1 for e1, e2 in zip(errs, errs[1:]))
    report("heat refinement trend", ok, ", ".join(f"n={n}: {e:.3e}" for n, e in zip(sizes, errs)) + " (non-increasing)")
    assert ok
