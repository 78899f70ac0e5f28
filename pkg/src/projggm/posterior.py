"""Reference-model posteriors for the node-wise regressions: horseshoe Gibbs
sampling for high-dimensional fits and Bayesian-bootstrap least squares for
low-dimensional ones."""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .exceptions import (
    DimensionalityError,
    InvalidParameterError,
    SamplerDivergenceError,
)


@dataclass(frozen=True)
class PosteriorDraws:
    """S draws of (coefficients, residual SD, intercept) for one node."""

    node: int
    beta: np.ndarray  # (S, D)
    sigma: np.ndarray  # (S,)
    intercept: np.ndarray  # (S,)
    method: str  # "horseshoe" | "bayesian-bootstrap"
    tau0: float = 1.0
    rhat: np.ndarray | None = None  # split-chain PSRF per coefficient

    def __post_init__(self):
        if self.beta.shape[0] < 100:
            raise InvalidParameterError("need at least 100 posterior draws")
        if np.any(self.sigma <= 0.0):
            raise InvalidParameterError("all residual SD draws must be positive")
        for a in (self.beta, self.sigma, self.intercept):
            if not np.all(np.isfinite(a)):
                raise InvalidParameterError("posterior draws contain non-finite values")

    @property
    def n_draws(self) -> int:
        return self.beta.shape[0]


@dataclass
class HorseshoeConfig:
    tau0: float = 1.0
    p0: float | None = None  # expected edge count; overrides tau0 when set
    warmup: int = 1000
    draws: int = 1000
    seed: int | None = None

    def __post_init__(self):
        if self.draws < 100:
            raise InvalidParameterError("draws must be >= 100")
        if self.warmup < 0:
            raise InvalidParameterError("warmup must be >= 0")
        if self.tau0 <= 0:
            raise InvalidParameterError("tau0 must be positive")


def tau0_from_p0(p0: float, D: int, sigma: float, N: int) -> float:
    """Global-shrinkage scale implied by an expected number of edges."""
    if not 0 < p0 < D:
        raise InvalidParameterError(f"p0 must be in (0, D={D}), got {p0}")
    if N < 1:
        raise InvalidParameterError("N must be >= 1")
    return p0 / (D - p0) * sigma / np.sqrt(N)


def _split_rhat(draws: np.ndarray) -> np.ndarray:
    """Potential scale reduction over two half-chains, per column."""
    s = draws.shape[0] // 2
    halves = np.stack([draws[:s], draws[s : 2 * s]])  # (2, s, D)
    within = halves.var(axis=1, ddof=1).mean(axis=0)
    between = s * halves.mean(axis=1).var(axis=0, ddof=1)
    var_plus = (s - 1) / s * within + between / s
    with np.errstate(divide="ignore", invalid="ignore"):
        rhat = np.sqrt(var_plus / within)
    return np.where(within > 0, rhat, 1.0)


def _inv_gamma(rng: np.random.Generator, shape, rate):
    return 1.0 / rng.gamma(shape, 1.0 / np.maximum(rate, 1e-300))


def fit_horseshoe(
    y: np.ndarray,
    X: np.ndarray,
    config: HorseshoeConfig,
    node: int = 0,
    _freeze_scales_at: float | None = None,
) -> PosteriorDraws:
    """Gibbs sampler for the horseshoe regression.

    Half-Cauchy hyperpriors enter through the inverse-gamma mixture
    augmentation, so every conditional is a standard Gaussian or inverse-gamma
    draw. The coefficient block uses the direct (D x D) solve when D <= n and
    the n x n dual form otherwise. ``_freeze_scales_at`` pins both the local
    and global scales (testing hook for the conjugate fixed-point check).
    """
    y = np.asarray(y, dtype=float)
    X = np.asarray(X, dtype=float)
    n, D = X.shape
    if n < 2:
        raise InvalidParameterError("need n >= 2")
    tau0 = config.tau0
    if config.p0 is not None:
        tau0 = tau0_from_p0(config.p0, D, 1.0, n)

    rng = np.random.default_rng(config.seed)
    beta = np.zeros(D)
    sigma2 = float(np.var(y)) or 1.0
    lam2 = np.ones(D)
    tau2 = tau0**2
    nu = np.ones(D)
    xi = 1.0
    alpha = float(np.mean(y))
    frozen = _freeze_scales_at is not None
    if frozen:
        lam2[:] = _freeze_scales_at**2
        tau2 = _freeze_scales_at**2

    use_dual = D > n
    if not use_dual:
        xtx = X.T @ X

    total = config.warmup + config.draws
    out_beta = np.empty((config.draws, D))
    out_sigma = np.empty(config.draws)
    out_alpha = np.empty(config.draws)

    for it in range(total):
        yc = y - alpha
        prior_var = lam2 * tau2
        sigma = np.sqrt(sigma2)
        if use_dual:
            # Bhattacharya-style exact draw, O(n^2 D)
            u = np.sqrt(prior_var) * rng.standard_normal(D)
            delta = rng.standard_normal(n)
            v = X @ u / sigma + delta
            m = (X * prior_var) @ X.T / sigma2 + np.eye(n)
            w = np.linalg.solve(m, yc / sigma - v)
            beta = u + prior_var * (X.T @ w) / sigma
        else:
            a = xtx / sigma2 + np.diag(1.0 / prior_var)
            chol = np.linalg.cholesky(a)
            mean = np.linalg.solve(
                chol.T, np.linalg.solve(chol, X.T @ yc / sigma2)
            )
            beta = mean + np.linalg.solve(chol.T, rng.standard_normal(D))

        if not frozen:
            lam2 = _inv_gamma(rng, 1.0, 1.0 / nu + beta**2 / (2.0 * tau2))
            nu = _inv_gamma(rng, 1.0, 1.0 + 1.0 / lam2)
            tau2 = float(
                _inv_gamma(rng, (D + 1) / 2.0, 1.0 / xi + np.sum(beta**2 / lam2) / 2.0)
            )
            xi = float(_inv_gamma(rng, 1.0, 1.0 / tau0**2 + 1.0 / tau2))

        resid = y - alpha - X @ beta
        sigma2 = float(_inv_gamma(rng, n / 2.0, resid @ resid / 2.0))
        alpha = float(np.mean(y - X @ beta) + np.sqrt(sigma2 / n) * rng.standard_normal())

        state_ok = (
            np.isfinite(beta).all()
            and np.isfinite(sigma2)
            and sigma2 > 0
            and np.isfinite(lam2).all()
            and np.isfinite(tau2)
        )
        if not state_ok:
            raise SamplerDivergenceError("non-finite Gibbs state", it)

        if it >= config.warmup:
            k = it - config.warmup
            out_beta[k] = beta
            out_sigma[k] = np.sqrt(sigma2)
            out_alpha[k] = alpha

    return PosteriorDraws(
        node=node,
        beta=out_beta,
        sigma=out_sigma,
        intercept=out_alpha,
        method="horseshoe",
        tau0=tau0,
        rhat=_split_rhat(out_beta),
    )


def fit_bayes_boot(
    y: np.ndarray,
    X: np.ndarray,
    S: int = 1000,
    seed=None,
    node: int = 0,
) -> PosteriorDraws:
    """Bayesian-bootstrap posterior: per draw, Dirichlet(1,...,1) observation
    weights and a weighted least-squares fit with intercept."""
    y = np.asarray(y, dtype=float)
    X = np.asarray(X, dtype=float)
    n, D = X.shape
    if n <= D + 2:
        raise DimensionalityError(
            f"Bayesian bootstrap needs n > D + 2 (n={n}, D={D}); use the horseshoe"
        )
    rng = np.random.default_rng(seed)
    design = np.column_stack([np.ones(n), X])
    out_beta = np.empty((S, D))
    out_sigma = np.empty(S)
    out_alpha = np.empty(S)
    weights = rng.dirichlet(np.ones(n), size=S)
    for s in range(S):
        w = weights[s]
        wx = design * w[:, None]
        coef = np.linalg.solve(wx.T @ design, wx.T @ y)
        resid = y - design @ coef
        out_alpha[s] = coef[0]
        out_beta[s] = coef[1:]
        out_sigma[s] = max(np.sqrt(np.sum(w * resid**2)), 1e-12)
    return PosteriorDraws(
        node=node,
        beta=out_beta,
        sigma=out_sigma,
        intercept=out_alpha,
        method="bayesian-bootstrap",
    )
