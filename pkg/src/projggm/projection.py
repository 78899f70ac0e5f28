"""Selection engine: analytic KL projection of posterior draws onto submodels,
forward search, PSIS-LOO utility estimation and the Bayesian-bootstrap
stopping rule."""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from .exceptions import InvalidParameterError
from .posterior import PosteriorDraws

_LOG_2PI = math.log(2.0 * math.pi)
KHAT_WARN = 0.7


@dataclass
class ProjectedDraws:
    support: tuple[int, ...]
    beta_perp: np.ndarray  # (S, k)
    intercept_perp: np.ndarray  # (S,)
    sigma_perp: np.ndarray  # (S,)
    delta: np.ndarray  # (S,) per-draw discrepancy


@dataclass
class LooWeights:
    w: np.ndarray  # (n, S) rows normalized
    khat: np.ndarray  # (n,)


@dataclass
class SelectionPath:
    node: int
    order: tuple[int, ...]  # variable addition sequence
    loss_by_size: np.ndarray  # index k = loss at size k (size 0 = null)
    u_hat: np.ndarray  # LOO utility per size
    se: np.ndarray
    u_ref: float
    u_null: float
    delta_u: float
    chosen_size: int
    psis_khat: np.ndarray
    flags: list = field(default_factory=list)

    @property
    def chosen_support(self) -> tuple[int, ...]:
        return self.order[: self.chosen_size]


def _fits(draws: PosteriorDraws, X: np.ndarray) -> np.ndarray:
    """Reference-model fitted values, one column per draw: (n, S)."""
    return X @ draws.beta.T + draws.intercept[None, :]


def _project_fits(
    fits: np.ndarray, sigma: np.ndarray, X: np.ndarray, support
) -> tuple[np.ndarray, np.ndarray, np.ndarray, np.ndarray]:
    """Project reference fits (n, S) onto an intercept plus X[:, support].

    Returns (beta_perp (k, S), intercept_perp (S,), sigma2_perp (S,),
    delta (S,)). Rank-deficient supports fall back to the minimum-norm
    least-squares solution.
    """
    n = X.shape[0]
    support = list(support)
    design = np.column_stack([np.ones(n), X[:, support]])
    coef, *_ = np.linalg.lstsq(design, fits, rcond=None)
    resid = fits - design @ coef
    sigma2 = sigma**2
    sigma2_perp = sigma2 + np.mean(resid * resid, axis=0)
    delta = 0.5 * np.log(sigma2_perp / sigma2)
    return coef[1:], coef[0], sigma2_perp, delta


def project_draw(
    beta_s: np.ndarray,
    sigma_s: float,
    X: np.ndarray,
    support,
    intercept_s: float = 0.0,
) -> tuple[np.ndarray, float, float]:
    """Project a single posterior draw onto a variable subset.

    Returns (beta_perp, sigma_perp, delta) where delta is the KL discrepancy
    between the draw's predictive and its projection, averaged over the
    empirical covariate distribution (0.5 * log of the variance ratio).
    """
    fits = (X @ np.asarray(beta_s, dtype=float) + intercept_s)[:, None]
    beta_perp, _, sigma2_perp, delta = _project_fits(
        fits, np.asarray([sigma_s], dtype=float), X, support
    )
    return beta_perp[:, 0], float(np.sqrt(sigma2_perp[0])), float(delta[0])


def project_draws(draws: PosteriorDraws, X: np.ndarray, support) -> ProjectedDraws:
    """Project every posterior draw onto a variable subset."""
    fits = _fits(draws, X)
    beta_perp, intercept_perp, sigma2_perp, delta = _project_fits(
        fits, draws.sigma, X, support
    )
    return ProjectedDraws(
        support=tuple(support),
        beta_perp=beta_perp.T,
        intercept_perp=intercept_perp,
        sigma_perp=np.sqrt(sigma2_perp),
        delta=delta,
    )


def projection_loss(draws: PosteriorDraws, X: np.ndarray, support) -> float:
    """Mean per-draw projection discrepancy over the posterior."""
    return float(np.mean(project_draws(draws, X, support).delta))


def forward_search(
    draws: PosteriorDraws, X: np.ndarray, max_size: int | None = None
) -> tuple[tuple[int, ...], np.ndarray]:
    """Greedy forward search on the posterior-mean draw.

    At each step the candidate minimizing the projection discrepancy of the
    augmented support is added. Returns the addition order and the loss at
    every size (index 0 = empty support). Ties break on the lowest index.
    """
    n, D = X.shape
    if max_size is None:
        max_size = default_max_size(n, D)
    if max_size > D:
        raise InvalidParameterError(f"max_size {max_size} exceeds D={D}")
    mean_fit = (X @ draws.beta.mean(axis=0) + draws.intercept.mean())[:, None]
    mean_sigma = np.asarray([draws.sigma.mean()])

    order: list[int] = []
    losses = np.empty(max_size + 1)
    remaining = list(range(D))
    losses[0] = float(_project_fits(mean_fit, mean_sigma, X, [])[3][0])
    for size in range(1, max_size + 1):
        cand_losses = np.array(
            [
                _project_fits(mean_fit, mean_sigma, X, order + [c])[3][0]
                for c in remaining
            ]
        )
        best = int(np.argmin(cand_losses))
        losses[size] = float(cand_losses[best])
        order.append(remaining.pop(best))
    return tuple(order), losses


def default_max_size(n: int, D: int) -> int:
    return max(1, min(D, n - 4, 30))


# --- PSIS smoothing -------------------------------------------------------


def fit_generalized_pareto(exceedances: np.ndarray) -> tuple[float, float]:
    """Profile-posterior point estimate of the generalized Pareto shape and
    scale (Zhang-Stephens), with the standard small-sample prior adjustment
    pulling the shape toward 0.5."""
    y = np.sort(np.asarray(exceedances, dtype=float))
    m = y.size
    if m < 5 or y[-1] <= 0 or np.ptp(y) == 0:
        return -np.inf, 0.0
    grid = 30 + int(np.sqrt(m))
    b = 1.0 - np.sqrt(grid / (np.arange(grid, dtype=float) + 0.5))
    b = b / (3.0 * y[(m - 2) // 4]) + 1.0 / y[-1]
    k = np.log1p(-b[:, None] * y).mean(axis=1)
    log_lik = m * (np.log(-b / k) - k - 1.0)
    weights = 1.0 / np.exp(log_lik - log_lik[:, None]).sum(axis=1)
    b_post = np.sum(b * weights)
    k_post = float(np.log1p(-b_post * y).mean())
    sigma = -k_post / b_post
    k_hat = (m * k_post + 10 * 0.5) / (m + 10)
    return float(k_hat), float(sigma)


def _gpd_quantile(u: np.ndarray, mu: float, sigma: float, k: float) -> np.ndarray:
    if abs(k) < 1e-12:
        return mu - sigma * np.log1p(-u)
    return mu + sigma / k * ((1.0 - u) ** (-k) - 1.0)


def pareto_smooth(raw: np.ndarray) -> tuple[np.ndarray, float]:
    """Replace the largest raw importance weights with expected generalized
    Pareto order statistics, truncated at the raw maximum."""
    w = np.array(raw, dtype=float)
    S = w.size
    M = int(min(math.ceil(0.2 * S), math.ceil(3.0 * math.sqrt(S))))
    if M < 5:
        return w, -np.inf
    tail_idx = np.argpartition(-w, M - 1)[:M]
    cutoff = float(np.sort(w)[S - M - 1]) if S > M else float(w.min())
    khat, sigma = fit_generalized_pareto(w[tail_idx] - cutoff)
    if not np.isfinite(khat):
        return w, khat
    ranks = np.argsort(np.argsort(w[tail_idx]))
    quantiles = _gpd_quantile((ranks + 0.5) / M, cutoff, sigma, khat)
    w[tail_idx] = np.minimum(quantiles, w.max())
    return w, khat


def psis_loo_weights(draws: PosteriorDraws, y: np.ndarray, X: np.ndarray) -> LooWeights:
    """Per-point importance weights over draws, proportional to the inverse
    reference likelihood, tail-smoothed and row-normalized."""
    if draws.n_draws < 100:
        raise InvalidParameterError("PSIS needs at least 100 draws")
    log_lik = gaussian_log_density(y[:, None], _fits(draws, X), draws.sigma[None, :])
    log_raw = -log_lik
    log_raw = log_raw - log_raw.max(axis=1, keepdims=True)
    n = y.size
    w = np.empty_like(log_raw)
    khat = np.empty(n)
    for i in range(n):
        w[i], khat[i] = pareto_smooth(np.exp(log_raw[i]))
    w /= w.sum(axis=1, keepdims=True)
    return LooWeights(w=w, khat=khat)


def gaussian_log_density(y, mu, sigma):
    return -0.5 * _LOG_2PI - np.log(sigma) - 0.5 * ((y - mu) / sigma) ** 2


# --- LOO utility and decision rule ----------------------------------------


def _pointwise_lpd(
    mu: np.ndarray, sigma: np.ndarray, y: np.ndarray, log_w: np.ndarray
) -> np.ndarray:
    """log sum_s w_is N(y_i; mu_is, sigma_s) per point, in log space."""
    log_dens = gaussian_log_density(y[:, None], mu, sigma[None, :])
    a = log_w + log_dens
    amax = a.max(axis=1, keepdims=True)
    lpd = amax[:, 0] + np.log(np.sum(np.exp(a - amax), axis=1))
    if not np.all(np.isfinite(lpd)):
        raise FloatingPointError("pointwise log predictive density underflowed")
    return lpd


def _log_weights(weights: LooWeights) -> np.ndarray:
    with np.errstate(divide="ignore"):
        return np.log(weights.w)


def reference_lpd(
    draws: PosteriorDraws, weights: LooWeights, y: np.ndarray, X: np.ndarray
) -> np.ndarray:
    """Pointwise LOO log predictive density of the reference model itself."""
    return _pointwise_lpd(_fits(draws, X), draws.sigma, y, _log_weights(weights))


def loo_utility(
    draws: PosteriorDraws,
    weights: LooWeights,
    X: np.ndarray,
    y: np.ndarray,
    support,
    exact_loo: bool = False,
) -> tuple[float, float, np.ndarray]:
    """PSIS-LOO utility of the projection onto ``support``.

    Returns (u_hat, se, pointwise lpd) where u_hat is the summed log
    predictive density under the importance-weighted projected draws. With
    ``exact_loo`` the projection is re-solved on the n-1 retained rows for
    every held-out point.
    """
    n = X.shape[0]
    log_w = _log_weights(weights)
    if exact_loo:
        fits = _fits(draws, X)
        lpd = np.empty(n)
        for i in range(n):
            keep = np.arange(n) != i
            beta_p, alpha_p, sigma2_p, _ = _project_fits(
                fits[keep], draws.sigma, X[keep], support
            )
            mu_i = alpha_p + X[i, list(support)] @ beta_p
            lpd[i] = _pointwise_lpd(
                mu_i[None, :], np.sqrt(sigma2_p), y[i : i + 1], log_w[i : i + 1]
            )[0]
    else:
        proj = project_draws(draws, X, support)
        mu = proj.intercept_perp[None, :]
        if proj.beta_perp.shape[1]:
            mu = mu + X[:, list(support)] @ proj.beta_perp.T
        else:
            mu = np.broadcast_to(mu, (n, draws.n_draws))
        lpd = _pointwise_lpd(mu, proj.sigma_perp, y, log_w)
    u_hat = float(np.sum(lpd))
    se = float(np.sqrt(n * np.var(lpd, ddof=1)))
    return u_hat, se, lpd


@dataclass
class DecisionRule:
    delta_u_frac: float = 0.10
    prob_threshold: float = 0.10
    B: int = 1000


def decide_size(
    lpd_ref: np.ndarray,
    lpd_by_size: list[np.ndarray],
    u_ref: float,
    u_null: float,
    rule: DecisionRule,
    seed=None,
) -> tuple[int, float, list]:
    """Smallest size whose utility is within the tolerated loss of the
    reference with the required probability, estimated by the Bayesian
    bootstrap over the pointwise LPD differences.

    Returns (chosen_size, delta_u, flags).
    """
    flags = []
    delta_u = rule.delta_u_frac * (u_ref - u_null)
    if delta_u < 0.0:
        delta_u = 0.0
        flags.append("reference-not-better-than-null")
    rng = np.random.default_rng(seed)
    n = lpd_ref.size
    boot = rng.dirichlet(np.ones(n), size=rule.B)  # (B, n)
    for k, lpd_k in enumerate(lpd_by_size):
        d = lpd_ref - lpd_k
        prob = float(np.mean(n * (boot @ d) <= delta_u))
        if prob >= rule.prob_threshold:
            return k, delta_u, flags
    flags.append("no-size-met-threshold")
    return len(lpd_by_size) - 1, delta_u, flags


def select_node(
    draws: PosteriorDraws,
    y: np.ndarray,
    X: np.ndarray,
    rule: DecisionRule,
    max_size: int | None = None,
    exact_loo: bool = False,
    seed=None,
) -> tuple[SelectionPath, ProjectedDraws]:
    """Full per-node selection: forward search, PSIS-LOO utilities along the
    path, decision rule, and projection of all draws onto the chosen support."""
    order, losses = forward_search(draws, X, max_size=max_size)
    weights = psis_loo_weights(draws, y, X)
    lpd_ref = reference_lpd(draws, weights, y, X)
    u_ref = float(np.sum(lpd_ref))

    sizes = len(order) + 1
    u_hat = np.empty(sizes)
    se = np.empty(sizes)
    lpd_by_size = []
    for k in range(sizes):
        u_hat[k], se[k], lpd = loo_utility(
            draws, weights, X, y, order[:k], exact_loo=exact_loo
        )
        lpd_by_size.append(lpd)
    u_null = u_hat[0]

    chosen, delta_u, flags = decide_size(
        lpd_ref, lpd_by_size, u_ref, u_null, rule, seed=seed
    )
    bad = np.flatnonzero(weights.khat > KHAT_WARN)
    if bad.size:
        flags.append(f"khat>{KHAT_WARN} at {bad.size} points")

    path = SelectionPath(
        node=draws.node,
        order=order,
        loss_by_size=losses,
        u_hat=u_hat,
        se=se,
        u_ref=u_ref,
        u_null=u_null,
        delta_u=delta_u,
        chosen_size=chosen,
        psis_khat=weights.khat,
        flags=flags,
    )
    return path, project_draws(draws, X, order[:chosen])
