"""Combine node-wise selections into one graph: or-rule symmetrization,
partial-correlation matrix, precision reconstruction, and fixed-pattern
positive-definite correction."""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Callable

import numpy as np

from .core import DataMatrix, edges_from_matrix
from .exceptions import DegenerateResidualError, NonConvergenceError

EdgeSet = frozenset


@dataclass
class PdReport:
    corrected: bool
    iterations: int
    min_eig_before: float
    min_eig_after: float

    def as_dict(self) -> dict:
        return {
            "corrected": self.corrected,
            "iterations": self.iterations,
            "min_eig_before": self.min_eig_before,
            "min_eig_after": self.min_eig_after,
        }


@dataclass
class EstimatedGraph:
    edges: frozenset
    pcor: np.ndarray
    omega_hat: np.ndarray
    pd_report: PdReport


def asymmetric_pairs(lam: np.ndarray) -> list[tuple[int, int]]:
    """Pairs (i, j) where exactly one of lam[i, j], lam[j, i] is nonzero."""
    p = lam.shape[0]
    out = []
    for i in range(p):
        for j in range(i + 1, p):
            if (lam[i, j] != 0.0) != (lam[j, i] != 0.0):
                out.append((i, j))
    return out


def or_rule_symmetrize(
    lam: np.ndarray,
    reproject: Callable[[int, frozenset], np.ndarray],
) -> tuple[np.ndarray, int]:
    """Re-project nodes whose neighborhoods miss a variable selected from the
    other side, so the nonzero pattern of the coefficient matrix is symmetric.

    ``reproject(node, support)`` must return the node's full-length coefficient
    vector projected onto ``support`` (zero elsewhere, zero at ``node``).
    Returns the symmetrized matrix and the number of re-projection calls
    (one per inconsistent pair).
    """
    lam = np.array(lam, dtype=float)
    calls = 0
    for i, j in asymmetric_pairs(lam):
        # the node whose entry is zero gains the missing variable
        node, forced = (i, j) if lam[i, j] == 0.0 else (j, i)
        support = frozenset(np.flatnonzero(lam[node]).tolist()) | {forced}
        row = np.asarray(reproject(node, support), dtype=float)
        lam[node] = row
        lam[node, node] = 0.0
        calls += 1
    return lam, calls


def pcor_from_lambda(lam: np.ndarray) -> np.ndarray:
    """Signed geometric mean of the two regression coefficients per pair,
    clamped to [-1, 1]; zero when the signs disagree."""
    prod = lam * lam.T
    rho = np.where(prod > 0.0, np.sign(lam) * np.minimum(1.0, np.sqrt(np.abs(prod))), 0.0)
    np.fill_diagonal(rho, 1.0)
    return rho


def residual_variances(lam: np.ndarray, data: DataMatrix) -> np.ndarray:
    """Per-node sample variance (1/n) of the centered projected residuals."""
    x = data.values
    n, p = x.shape
    resid = x - x @ lam.T  # row i of lam holds node i's coefficients, diagonal 0
    resid = resid - resid.mean(axis=0)
    var = np.mean(resid * resid, axis=0)
    for i in range(p):
        if var[i] < 1e-12:
            raise DegenerateResidualError(i, float(var[i]))
    return var


def precision_from_lambda(lam: np.ndarray, data: DataMatrix) -> np.ndarray:
    """Reconstruct the precision matrix from node-wise coefficients: diagonal
    is the inverse projected residual variance, off-diagonals average the two
    node-wise estimates, zeros preserved off the coefficient pattern."""
    var = residual_variances(lam, data)
    scaled = lam / var[:, None]  # entry (i, j) = lam_ij / var_i
    omega = -0.5 * (scaled + scaled.T)
    omega[lam == 0.0] = 0.0  # pattern symmetric, so this zeroes both sides
    np.fill_diagonal(omega, 1.0 / var)
    return omega


def nearest_pd_fixed_pattern(
    omega: np.ndarray,
    edges: frozenset,
    eps: float = 1e-6,
    max_iter: int = 200,
) -> tuple[np.ndarray, PdReport]:
    """Alternating projections onto the PD cone (eigenvalue clamp at ``eps``)
    and the fixed sparsity pattern (exact zeros off ``edges``)."""
    omega = 0.5 * (omega + np.asarray(omega, dtype=float).T)
    p = omega.shape[0]
    mask = np.zeros((p, p), dtype=bool)
    for i, j in edges:
        mask[i, j] = mask[j, i] = True
    np.fill_diagonal(mask, True)

    min_before = float(np.linalg.eigvalsh(omega).min())
    current = omega
    for it in range(max_iter + 1):
        eigvals, vecs = np.linalg.eigh(current)
        # tolerate float noise when the clamp lands a value at exactly eps
        if eigvals.min() >= eps * (1.0 - 1e-9):
            report = PdReport(
                corrected=it > 0,
                iterations=it,
                min_eig_before=min_before,
                min_eig_after=float(eigvals.min()),
            )
            return current, report
        clamped = (vecs * np.maximum(eigvals, eps)) @ vecs.T
        clamped = 0.5 * (clamped + clamped.T)
        clamped[~mask] = 0.0
        current = clamped
    report = PdReport(
        corrected=True,
        iterations=max_iter,
        min_eig_before=min_before,
        min_eig_after=float(np.linalg.eigvalsh(current).min()),
    )
    raise NonConvergenceError(
        f"fixed-pattern PD correction did not reach min eigenvalue {eps} "
        f"in {max_iter} iterations",
        report,
    )
