import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from projggm import (
    DataMatrix,
    log_det,
    precision_to_pcor,
    regression_identity,
    standardize,
)
from projggm.exceptions import (
    DegenerateInputError,
    InvalidPrecisionError,
    SingularMatrixError,
)

from conftest import random_pd


def test_standardize_three_point_column():
    data = DataMatrix(np.array([[1.0, 5.0], [2.0, 7.0], [3.0, 6.0]]))
    out = standardize(data)
    assert out.standardized
    np.testing.assert_allclose(out.values[:, 0], [-1.0, 0.0, 1.0])


def test_standardize_idempotent(rng):
    data = standardize(DataMatrix(rng.standard_normal((40, 4))))
    again = standardize(data)
    np.testing.assert_allclose(again.values, data.values, atol=1e-12)


def test_standardize_constant_column_names_offender():
    data = DataMatrix(np.array([[5.0, 1.0], [5.0, 2.0], [5.0, 3.0]]), ("a", "b"))
    with pytest.raises(DegenerateInputError, match="'a'"):
        standardize(data)


def test_data_matrix_rejects_non_finite():
    with pytest.raises(DegenerateInputError):
        DataMatrix(np.array([[1.0, np.nan], [2.0, 3.0]]))


def test_data_matrix_rejects_tiny():
    with pytest.raises(DegenerateInputError):
        DataMatrix(np.array([[1.0, 2.0]]))


def test_pcor_two_by_two():
    rho = precision_to_pcor(np.array([[1.0, 0.5], [0.5, 1.0]]))
    assert rho[0, 1] == pytest.approx(-0.5)
    assert rho[0, 0] == 1.0


def test_pcor_diagonal_precision_gives_identity():
    rho = precision_to_pcor(np.diag([2.0, 3.0, 4.0]))
    np.testing.assert_allclose(rho, np.eye(3))


def test_pcor_negative_offdiagonal():
    rho = precision_to_pcor(np.array([[2.0, -1.0], [-1.0, 2.0]]))
    assert rho[0, 1] == pytest.approx(0.5)


def test_pcor_rejects_nonpositive_diagonal():
    with pytest.raises(InvalidPrecisionError):
        precision_to_pcor(np.array([[0.0, 0.1], [0.1, 1.0]]))


def test_regression_identity_independence():
    beta, resid_var = regression_identity(np.eye(4), 2)
    np.testing.assert_allclose(beta, 0.0)
    assert resid_var == pytest.approx(1.0)


def test_regression_identity_two_by_two():
    omega = np.array([[1.0, 0.5], [0.5, 1.0]])
    beta, resid_var = regression_identity(omega, 0)
    np.testing.assert_allclose(beta, [-0.5])
    assert resid_var == pytest.approx(1.0)


def test_regression_identity_matches_covariance_side_solve(rng):
    # oracle: population least squares from sigma = inv(omega)
    omega = random_pd(5, rng)
    sigma = np.linalg.inv(omega)
    for i in range(5):
        beta, resid_var = regression_identity(omega, i)
        others = np.delete(np.arange(5), i)
        oracle = np.linalg.solve(sigma[np.ix_(others, others)], sigma[others, i])
        np.testing.assert_allclose(beta, oracle, atol=1e-8)
        oracle_var = sigma[i, i] - sigma[i, others] @ oracle
        assert resid_var == pytest.approx(oracle_var, abs=1e-8)


def test_regression_identity_rejects_singular():
    singular = np.ones((3, 3)) + np.eye(3) * 1e-16
    with pytest.raises((SingularMatrixError, InvalidPrecisionError)):
        regression_identity(singular, 0)


def test_log_det_identity():
    assert log_det(np.eye(7)) == pytest.approx(0.0)


def test_log_det_diagonal():
    assert log_det(np.diag([2.0, 3.0])) == pytest.approx(np.log(6.0))


def test_log_det_rank_deficient_sample_covariance(rng):
    x = rng.standard_normal((4, 6))
    xc = x - x.mean(axis=0)
    cov = xc.T @ xc / 4  # n < p, singular
    with pytest.raises(SingularMatrixError):
        log_det(cov)


@settings(max_examples=25, deadline=None)
@given(seed=st.integers(0, 10_000), p=st.integers(2, 10))
def test_regression_identity_oracle_property(seed, p):
    rng = np.random.default_rng(seed)
    omega = random_pd(p, rng)
    sigma = np.linalg.inv(omega)
    for i in range(p):
        beta, _ = regression_identity(omega, i)
        others = np.delete(np.arange(p), i)
        oracle = np.linalg.solve(sigma[np.ix_(others, others)], sigma[others, i])
        np.testing.assert_allclose(beta, oracle, atol=1e-8)


@settings(max_examples=25, deadline=None)
@given(seed=st.integers(0, 10_000), p=st.integers(2, 8))
def test_pcor_bounds_and_symmetry_property(seed, p):
    rng = np.random.default_rng(seed)
    rho = precision_to_pcor(random_pd(p, rng))
    assert np.max(np.abs(rho - rho.T)) <= 1e-12
    off = rho[~np.eye(p, dtype=bool)]
    assert np.all(np.abs(off) <= 1.0)


@settings(max_examples=25, deadline=None)
@given(seed=st.integers(0, 10_000), p=st.integers(2, 8))
def test_signed_geometric_mean_rule_property(seed, p):
    # the two node-wise coefficients of a pair always share a sign, and their
    # signed geometric mean reproduces the partial correlation
    rng = np.random.default_rng(seed)
    omega = random_pd(p, rng)
    rho = precision_to_pcor(omega)
    betas = [regression_identity(omega, i)[0] for i in range(p)]
    full = np.zeros((p, p))
    for i in range(p):
        full[i, np.delete(np.arange(p), i)] = betas[i]
    for i in range(p):
        for j in range(i + 1, p):
            prod = full[i, j] * full[j, i]
            assert prod >= -1e-15
            signed = np.sign(full[i, j]) * np.sqrt(max(prod, 0.0))
            assert signed == pytest.approx(rho[i, j], abs=1e-8)
