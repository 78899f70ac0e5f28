"""Synthetic truth generation: banded, random, cluster and scale-free
precision structures plus multivariate-normal data sampling."""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .assembly import nearest_pd_fixed_pattern
from .core import DataMatrix, edges_from_matrix
from .exceptions import (
    InvalidParameterError,
    NonPDConstructionError,
    SingularMatrixError,
)

STRUCTURES = ("ar1", "ar2", "cluster", "random", "scale-free")


@dataclass(frozen=True)
class TrueModel:
    structure: str
    omega: np.ndarray
    sigma: np.ndarray
    adjacency: frozenset
    seed: int | None = None
    params: dict = field(default_factory=dict)

    @property
    def p(self) -> int:
        return self.omega.shape[0]


def _finish(structure, omega, seed, **params) -> TrueModel:
    """Standardize to a unit-diagonal covariance and derive the adjacency."""
    eigvals = np.linalg.eigvalsh(omega)
    if eigvals.min() <= 0.0:
        raise NonPDConstructionError(
            f"{structure} construction is not positive definite "
            f"(min eigenvalue {eigvals.min():.3e}); try smaller band values"
        )
    sigma = np.linalg.inv(omega)
    d = np.sqrt(np.diag(sigma))
    sigma = sigma / np.outer(d, d)
    omega = omega * np.outer(d, d)
    omega = 0.5 * (omega + omega.T)
    sigma = 0.5 * (sigma + sigma.T)
    return TrueModel(
        structure=structure,
        omega=omega,
        sigma=sigma,
        adjacency=edges_from_matrix(omega),
        seed=seed,
        params=params,
    )


def gen_ar1(p: int, rho: float = 0.7) -> TrueModel:
    """First-order autoregressive truth: sigma_ij = rho^|i-j|, omega tridiagonal."""
    if p < 2:
        raise InvalidParameterError("p must be >= 2")
    if abs(rho) >= 1.0:
        raise InvalidParameterError(f"|rho| must be < 1, got {rho}")
    # analytic tridiagonal inverse of the AR-1 correlation matrix
    c = 1.0 / (1.0 - rho**2)
    omega = np.zeros((p, p))
    np.fill_diagonal(omega, (1.0 + rho**2) * c)
    omega[0, 0] = omega[-1, -1] = c
    idx = np.arange(p - 1)
    omega[idx, idx + 1] = omega[idx + 1, idx] = -rho * c
    sigma = rho ** np.abs(np.subtract.outer(np.arange(p), np.arange(p)))
    return TrueModel(
        structure="ar1",
        omega=omega,
        sigma=sigma.astype(float),
        adjacency=edges_from_matrix(omega),
        seed=None,
        params={"rho": rho},
    )


def gen_ar2(p: int, lag1: float = 0.5, lag2: float = 0.25) -> TrueModel:
    """Banded truth with unit diagonal and the two stated off-diagonal bands."""
    if p < 3:
        raise InvalidParameterError("p must be >= 3")
    omega = np.eye(p)
    idx = np.arange(p - 1)
    omega[idx, idx + 1] = omega[idx + 1, idx] = lag1
    idx = np.arange(p - 2)
    omega[idx, idx + 2] = omega[idx + 2, idx] = lag2
    return _finish("ar2", omega, None, lag1=lag1, lag2=lag2)


def _wishart_bartlett(p: int, dof: float, rng: np.random.Generator) -> np.ndarray:
    a = np.zeros((p, p))
    a[np.tril_indices(p, k=-1)] = rng.standard_normal(p * (p - 1) // 2)
    a[np.diag_indices(p)] = np.sqrt(rng.chisquare(dof - np.arange(p)))
    return a @ a.T


def _pattern_precision(edges: frozenset, p: int, df: int, rng: np.random.Generator) -> np.ndarray:
    """Approximate pattern-constrained Wishart draw: Bartlett Wishart with the
    non-edge entries zeroed, then fixed-pattern PD correction."""
    dof = max(df, p + 2)
    omega = _wishart_bartlett(p, dof, rng)
    mask = np.zeros((p, p), dtype=bool)
    for i, j in edges:
        mask[i, j] = mask[j, i] = True
    np.fill_diagonal(mask, True)
    omega[~mask] = 0.0
    omega, _ = nearest_pd_fixed_pattern(omega, edges, eps=1e-6)
    return omega


def gen_random(p: int, edge_prob: float, df: int, seed=None) -> TrueModel:
    """Bernoulli adjacency with a pattern-constrained Wishart-style precision."""
    if p < 2:
        raise InvalidParameterError("p must be >= 2")
    if not 0.0 < edge_prob < 1.0:
        raise InvalidParameterError(f"edge_prob must be in (0, 1), got {edge_prob}")
    rng = np.random.default_rng(seed)
    iu, ju = np.triu_indices(p, k=1)
    keep = rng.random(iu.size) < edge_prob
    edges = frozenset(zip(iu[keep].tolist(), ju[keep].tolist()))
    omega = _pattern_precision(edges, p, df, rng)
    return _finish("random", omega, seed, edge_prob=edge_prob, df=df)


def cluster_count(p: int) -> int:
    return max(2, round(p / 20))


def gen_cluster(p: int, df: int = 3, edge_prob: float = 0.3, seed=None) -> TrueModel:
    """Block-diagonal truth: nearly equal blocks, random structure within each
    block, exact zeros between blocks."""
    if p < 4:
        raise InvalidParameterError("p must be >= 4")
    rng = np.random.default_rng(seed)
    k = cluster_count(p)
    sizes = [p // k + (1 if b < p % k else 0) for b in range(k)]
    bounds = np.cumsum([0] + sizes)
    edges = set()
    for b in range(k):
        lo, hi = bounds[b], bounds[b + 1]
        for i in range(lo, hi):
            for j in range(i + 1, hi):
                if rng.random() < edge_prob:
                    edges.add((i, j))
    omega = _pattern_precision(frozenset(edges), p, df, rng)
    return _finish("cluster", omega, seed, df=df, edge_prob=edge_prob, clusters=k)


def gen_scale_free(p: int, df: int = 3, seed=None) -> TrueModel:
    """Preferential-attachment tree (one edge per arriving node, p-1 edges total)
    with a pattern-constrained Wishart-style precision."""
    if p < 2:
        raise InvalidParameterError("p must be >= 2")
    rng = np.random.default_rng(seed)
    targets = [0]  # node repeated once per incident edge, so sampling is degree-biased
    edges = set()
    for node in range(1, p):
        attach = int(targets[rng.integers(len(targets))])
        edges.add((min(node, attach), max(node, attach)))
        targets.extend([node, attach])
    omega = _pattern_precision(frozenset(edges), p, df, rng)
    return _finish("scale-free", omega, seed, df=df)


def sample_mvn(model: TrueModel, n: int, seed=None) -> DataMatrix:
    """Draw n iid rows from N(0, sigma) via the Cholesky factor of sigma."""
    if n < 2:
        raise InvalidParameterError("n must be >= 2")
    try:
        chol = np.linalg.cholesky(model.sigma)
    except np.linalg.LinAlgError:
        raise SingularMatrixError("covariance is not positive definite") from None
    rng = np.random.default_rng(seed)
    z = rng.standard_normal((n, model.p))
    return DataMatrix(z @ chol.T)


def generate(structure: str, p: int, seed=None, **params) -> TrueModel:
    """Dispatch by structure label with each generator's defaults."""
    if structure == "ar1":
        return gen_ar1(p, rho=params.get("rho", 0.7))
    if structure == "ar2":
        return gen_ar2(p, lag1=params.get("lag1", 0.5), lag2=params.get("lag2", 0.25))
    if structure == "random":
        return gen_random(
            p, edge_prob=params.get("edge_prob", 0.1), df=params.get("df", 3), seed=seed
        )
    if structure == "cluster":
        return gen_cluster(
            p, df=params.get("df", 3), edge_prob=params.get("edge_prob", 0.3), seed=seed
        )
    if structure == "scale-free":
        return gen_scale_free(p, df=params.get("df", 3), seed=seed)
    raise InvalidParameterError(f"unknown structure '{structure}' (choose from {STRUCTURES})")
