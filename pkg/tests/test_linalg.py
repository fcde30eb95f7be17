from __future__ import annotations

import numpy as np
import pytest

from stabreg.errors import InvalidDimension, SingularToWorkingPrecision
from stabreg.linalg import (
    as_matrix,
    as_vector,
    condition_number,
    default_tolerance,
    dump_array,
    load_array,
    min_norm_solution,
    numerical_rank,
    singular_values,
    solve_linear,
    svd,
)


def test_as_matrix_rejects_bad_input():
    with pytest.raises(InvalidDimension):
        as_matrix(np.ones(3))
    with pytest.raises(InvalidDimension):
        as_matrix(np.ones((0, 3)))
    with pytest.raises(ValueError):
        as_matrix([[1.0, np.nan]])
    with pytest.raises(InvalidDimension):
        as_vector(np.ones((2, 2)))
    with pytest.raises(ValueError):
        as_vector([np.inf])


@pytest.mark.parametrize("shape", [(7, 4), (4, 7), (5, 5)])
def test_svd_reconstructs(shape):
    a = np.random.default_rng(1).standard_normal(shape)
    sv = svd(a)
    k = min(shape)
    assert sv.u.shape == (shape[0], k)
    assert sv.v.shape == (shape[1], k)
    assert sv.shape == shape
    assert np.all(np.diff(sv.s) <= 0)
    np.testing.assert_allclose(sv.reconstruct(), a, atol=1e-13)
    np.testing.assert_allclose(sv.u.T @ sv.u, np.eye(k), atol=1e-13)


def test_singular_values_match_full_svd_on_benign_matrix():
    a = np.random.default_rng(2).standard_normal((9, 6))
    np.testing.assert_allclose(singular_values(a).s, svd(a).s, rtol=1e-13)
    assert singular_values(a).shape == (9, 6)


def test_default_tolerance_definition():
    sv = svd(np.diag([3.0, 1.0, 0.5]))
    assert default_tolerance(sv) == 3 * np.spacing(3.0)


def test_numerical_rank_cases():
    assert numerical_rank(svd(np.diag([1.0, 1e-20, 0.0]))) == 1
    assert numerical_rank(svd(np.zeros((3, 4)))) == 0
    assert numerical_rank(svd(np.diag([1.0, 1e-3, 1e-6])), tol=1e-4) == 2
    b = np.random.default_rng(3).standard_normal((6, 2))
    assert numerical_rank(svd(b @ b.T)) == 2


def test_condition_number_cases():
    assert condition_number(svd(np.eye(4))) == pytest.approx(1.0)
    assert condition_number(svd(np.diag([2.0, 0.0]))) == np.inf
    assert condition_number(svd(np.zeros((2, 2)))) == np.inf
    assert condition_number(svd(np.diag([1e300, 1e-300]))) == np.inf
    assert condition_number(svd(np.diag([4.0, 0.5]))) == pytest.approx(8.0)


def test_min_norm_solution_matches_pinv_on_rank_deficient():
    rng = np.random.default_rng(4)
    a = rng.standard_normal((8, 3)) @ rng.standard_normal((3, 6))
    b = rng.standard_normal(8)
    expected = np.linalg.pinv(a, rcond=1e-10) @ b
    np.testing.assert_allclose(min_norm_solution(svd(a), b), expected, rtol=1e-10, atol=1e-12)


def test_min_norm_solution_zero_matrix_and_bad_length():
    sv = svd(np.zeros((3, 2)))
    np.testing.assert_array_equal(min_norm_solution(sv, np.ones(3)), np.zeros(2))
    with pytest.raises(InvalidDimension):
        min_norm_solution(sv, np.ones(4))


def test_solve_linear_matches_numpy():
    rng = np.random.default_rng(5)
    m = rng.standard_normal((10, 10)) + 10 * np.eye(10)
    rhs = rng.standard_normal(10)
    np.testing.assert_allclose(solve_linear(m, rhs), np.linalg.solve(m, rhs), rtol=1e-12)


def test_solve_linear_singular_and_shape_errors():
    with pytest.raises(SingularToWorkingPrecision):
        solve_linear(np.array([[1.0, 2.0], [2.0, 4.0]]), np.ones(2))
    with pytest.raises(SingularToWorkingPrecision):
        solve_linear(np.diag([1.0, 1e-12]), np.ones(2), pivot_tol=1e-8)
    with pytest.raises(InvalidDimension):
        solve_linear(np.ones((2, 3)), np.ones(2))
    with pytest.raises(InvalidDimension):
        solve_linear(np.eye(2), np.ones(3))


def test_dump_load_roundtrip_is_exact(tmp_path):
    rng = np.random.default_rng(6)
    mat = rng.standard_normal((4, 3)) * 10.0 ** rng.integers(-300, 300, (4, 3))
    vec = rng.standard_normal(5)
    np.testing.assert_array_equal(load_array(dump_array(tmp_path / "m.txt", mat)), mat)
    back = load_array(dump_array(tmp_path / "v.txt", vec))
    assert back.ndim == 1
    np.testing.assert_array_equal(back, vec)
    assert (tmp_path / "m.txt").read_text().splitlines()[0] == "4 3"


def test_load_array_detects_truncation(tmp_path):
    p = tmp_path / "bad.txt"
    p.write_text("2 2\n1 2\n3\n")
    with pytest.raises(ValueError):
        load_array(p)
