"""Foundational types and the algebraic identities linking covariance,
precision, partial correlations and node-wise regression."""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .exceptions import (
    DegenerateInputError,
    InvalidPrecisionError,
    SingularMatrixError,
)

SYMMETRY_TOL = 1e-10


def _readonly(a: np.ndarray) -> np.ndarray:
    a = np.array(a, dtype=float)
    a.flags.writeable = False
    return a


@dataclass(frozen=True)
class DataMatrix:
    """An n x p observation matrix with standardization state and names."""

    values: np.ndarray
    names: tuple[str, ...] = ()
    standardized: bool = False

    def __post_init__(self):
        values = _readonly(self.values)
        if values.ndim != 2:
            raise DegenerateInputError("data must be a 2-d matrix")
        n, p = values.shape
        if n < 2 or p < 2:
            raise DegenerateInputError(f"need n >= 2 and p >= 2, got {n} x {p}")
        if not np.all(np.isfinite(values)):
            raise DegenerateInputError("data contains non-finite entries")
        names = tuple(self.names) if self.names else tuple(f"x{j + 1}" for j in range(p))
        if len(names) != p:
            raise DegenerateInputError(f"{len(names)} names for {p} columns")
        object.__setattr__(self, "values", values)
        object.__setattr__(self, "names", names)
        if self.standardized:
            mu = values.mean(axis=0)
            sd = values.std(axis=0, ddof=1)
            if np.max(np.abs(mu)) > 1e-10 or np.max(np.abs(sd - 1.0)) > 1e-10:
                raise DegenerateInputError("matrix marked standardized is not")

    @property
    def n(self) -> int:
        return self.values.shape[0]

    @property
    def p(self) -> int:
        return self.values.shape[1]


def standardize(data: DataMatrix) -> DataMatrix:
    """Center each column to mean zero and scale to unit sample SD (ddof=1)."""
    x = data.values
    sd = x.std(axis=0, ddof=1)
    bad = np.flatnonzero(sd == 0.0)
    if bad.size:
        raise DegenerateInputError(
            f"column '{data.names[bad[0]]}' is constant and cannot be standardized"
        )
    z = (x - x.mean(axis=0)) / sd
    return DataMatrix(z, data.names, standardized=True)


def is_symmetric(m: np.ndarray, tol: float = SYMMETRY_TOL) -> bool:
    return m.ndim == 2 and m.shape[0] == m.shape[1] and np.max(np.abs(m - m.T)) <= tol


def symmetrize(m: np.ndarray) -> np.ndarray:
    """Average away last-digit asymmetry (used on ingestion of external matrices)."""
    return 0.5 * (m + m.T)


def validate_precision(omega: np.ndarray) -> np.ndarray:
    omega = np.asarray(omega, dtype=float)
    if not is_symmetric(omega):
        raise InvalidPrecisionError("precision matrix is not symmetric within 1e-10")
    if np.any(np.diag(omega) <= 0.0):
        raise InvalidPrecisionError("precision matrix has a non-positive diagonal entry")
    return omega


def precision_to_pcor(omega: np.ndarray) -> np.ndarray:
    """Partial correlations from a precision matrix: -w_ij / sqrt(w_ii w_jj)."""
    omega = validate_precision(omega)
    d = 1.0 / np.sqrt(np.diag(omega))
    rho = -omega * np.outer(d, d)
    np.fill_diagonal(rho, 1.0)
    return rho


def regression_identity(omega: np.ndarray, i: int) -> tuple[np.ndarray, float]:
    """Node-wise regression coefficients and residual variance implied by a
    positive-definite precision matrix.

    Returns ``(beta, resid_var)`` with ``beta_j = -w_ij / w_ii`` over ``j != i``
    (in column order with column ``i`` removed) and ``resid_var = 1 / w_ii``.
    """
    omega = validate_precision(omega)
    try:
        np.linalg.cholesky(omega)
    except np.linalg.LinAlgError:
        raise SingularMatrixError("precision matrix is not positive definite") from None
    p = omega.shape[0]
    if not 0 <= i < p:
        raise IndexError(f"node index {i} out of range for p={p}")
    others = np.delete(np.arange(p), i)
    beta = -omega[others, i] / omega[i, i]
    return beta, 1.0 / omega[i, i]


def log_det(matrix: np.ndarray) -> float:
    """Log-determinant of a symmetric positive-definite matrix via eigenvalues."""
    matrix = np.asarray(matrix, dtype=float)
    if not is_symmetric(matrix):
        raise SingularMatrixError("log_det requires a symmetric matrix")
    eigvals = np.linalg.eigvalsh(matrix)
    if np.any(eigvals <= 0.0):
        raise SingularMatrixError(
            f"matrix is singular or indefinite (min eigenvalue {eigvals.min():.3e})"
        )
    return float(np.sum(np.log(eigvals)))


def edges_from_matrix(m: np.ndarray, tol: float = 1e-12) -> frozenset[tuple[int, int]]:
    """Unordered index pairs whose off-diagonal entries exceed ``tol`` in magnitude."""
    p = m.shape[0]
    iu, ju = np.triu_indices(p, k=1)
    keep = np.abs(m[iu, ju]) > tol
    return frozenset(zip(iu[keep].tolist(), ju[keep].tolist()))
