import numpy as np
import pytest

from projggm import (
    HorseshoeConfig,
    fit_bayes_boot,
    fit_horseshoe,
    tau0_from_p0,
)
from projggm.exceptions import DimensionalityError, InvalidParameterError

from conftest import standardized


def noise_design(rng, n=100, d=10):
    x = standardized(rng.standard_normal((n, d)))
    return x, rng.standard_normal(n)


def test_tau0_direct():
    assert tau0_from_p0(2, 10, 1.0, 100) == pytest.approx(0.025)


def test_tau0_ratio_one():
    assert tau0_from_p0(5, 10, 1.0, 1) == pytest.approx(1.0)


def test_tau0_high_dimensional_value():
    assert tau0_from_p0(5, 149, 1.0, 50) == pytest.approx(5 / 144 / np.sqrt(50))


def test_tau0_rejects_p0_at_least_d():
    with pytest.raises(InvalidParameterError):
        tau0_from_p0(10, 10, 1.0, 50)


def test_horseshoe_shrinks_pure_noise_toward_zero():
    # on pure noise every posterior mean is pulled below the OLS estimate,
    # and most are pulled nearly all the way to zero
    for seed in range(5):
        rng = np.random.default_rng(seed)
        x, y = noise_design(rng)
        draws = fit_horseshoe(y, x, HorseshoeConfig(warmup=400, draws=400, seed=seed))
        mean = np.abs(draws.beta.mean(axis=0))
        xc = np.column_stack([np.ones(100), x])
        ols = np.abs(np.linalg.lstsq(xc, y, rcond=None)[0][1:])
        assert np.all(mean <= ols + 1e-3)
        assert np.median(mean) < 0.05


def test_horseshoe_recovers_strong_signal(rng):
    x, _ = noise_design(rng)
    y = x[:, 0] + 0.5 * rng.standard_normal(100)
    draws = fit_horseshoe(y, x, HorseshoeConfig(warmup=500, draws=500, seed=1))
    mean = draws.beta.mean(axis=0)
    assert 0.7 <= mean[0] <= 1.2
    assert np.all(np.abs(mean[1:]) < 0.1)


def test_horseshoe_deterministic(rng):
    x, y = noise_design(rng, n=40, d=5)
    cfg = HorseshoeConfig(warmup=200, draws=200, seed=77)
    a = fit_horseshoe(y, x, cfg)
    b = fit_horseshoe(y, x, HorseshoeConfig(warmup=200, draws=200, seed=77))
    np.testing.assert_array_equal(a.beta, b.beta)
    np.testing.assert_array_equal(a.sigma, b.sigma)


def test_horseshoe_dual_form_matches_shrinkage(rng):
    # D > n exercises the n x n solve path
    x = standardized(rng.standard_normal((20, 30)))
    y = x[:, 0] + 0.3 * rng.standard_normal(20)
    draws = fit_horseshoe(y, x, HorseshoeConfig(warmup=300, draws=300, seed=2))
    mean = draws.beta.mean(axis=0)
    assert np.argmax(np.abs(mean)) == 0
    assert draws.rhat is not None and np.all(np.isfinite(draws.rhat))


def test_horseshoe_frozen_scales_matches_ridge_oracle(rng):
    # with the local and global scales pinned huge, the conditional for the
    # coefficients is conjugate Gaussian and the posterior mean is the ridge
    # solution with the matching (negligible) prior precision
    x, _ = noise_design(rng, n=60, d=4)
    y = 0.8 * x[:, 1] + 0.5 * rng.standard_normal(60)
    draws = fit_horseshoe(
        y, x, HorseshoeConfig(warmup=500, draws=2000, seed=3), _freeze_scales_at=1e3
    )
    xc = np.column_stack([np.ones(60), x])
    ridge = np.linalg.solve(xc.T @ xc + np.diag([0, *([1e-12] * 4)]), xc.T @ y)[1:]
    mc_se = draws.beta.std(axis=0, ddof=1) / np.sqrt(draws.n_draws / 10)
    np.testing.assert_array_less(np.abs(draws.beta.mean(axis=0) - ridge), 2 * mc_se)


def test_horseshoe_shrinkage_ordering():
    rng = np.random.default_rng(5)
    x, y = noise_design(rng)
    tight = fit_horseshoe(y, x, HorseshoeConfig(tau0=0.01, warmup=500, draws=800, seed=8))
    loose = fit_horseshoe(y, x, HorseshoeConfig(tau0=1.0, warmup=500, draws=800, seed=8))
    assert np.all(
        np.abs(tight.beta).mean(axis=0) <= np.abs(loose.beta).mean(axis=0) + 1e-3
    )


def test_bayes_boot_interpolating_fit(rng):
    q, _ = np.linalg.qr(rng.standard_normal((20, 3)))
    b = np.array([1.0, -2.0, 0.5])
    y = q @ b
    draws = fit_bayes_boot(y, q, S=150, seed=1)
    np.testing.assert_allclose(draws.beta, np.tile(b, (150, 1)), atol=1e-6)
    assert np.all(draws.sigma < 1e-6)


def test_bayes_boot_mean_matches_ols(rng):
    x = standardized(rng.standard_normal((80, 3)))
    y = x @ np.array([0.5, 0.0, -0.3]) + rng.standard_normal(80)
    draws = fit_bayes_boot(y, x, S=4000, seed=2)
    xc = np.column_stack([np.ones(80), x])
    ols = np.linalg.lstsq(xc, y, rcond=None)[0][1:]
    # the bootstrap mean equals OLS only up to an O(1/n) finite-sample term,
    # so allow that on top of the Monte Carlo band
    mc_se = draws.beta.std(axis=0, ddof=1) / np.sqrt(4000)
    np.testing.assert_array_less(np.abs(draws.beta.mean(axis=0) - ols), 3 * mc_se + 5 / 80)


def test_bayes_boot_rejects_wide_design(rng):
    x = rng.standard_normal((5, 6))
    with pytest.raises(DimensionalityError):
        fit_bayes_boot(rng.standard_normal(5), x, S=100)


def test_posterior_draw_invariants(rng):
    x, y = noise_design(rng, n=50, d=3)
    draws = fit_bayes_boot(y, x, S=120, seed=0)
    assert draws.n_draws == 120
    assert np.all(draws.sigma > 0)
    assert np.all(np.isfinite(draws.beta))


def test_config_rejects_too_few_draws():
    with pytest.raises(InvalidParameterError):
        HorseshoeConfig(draws=50)
