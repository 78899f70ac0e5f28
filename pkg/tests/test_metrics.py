import math

import numpy as np
import pytest

from projggm import (
    edge_metrics,
    gen_ar1,
    kl_loss,
    l2_loss,
    loss_report,
    mse_pcor,
    precision_to_pcor,
    quadratic_loss,
)
from projggm.exceptions import InvalidParameterError

from conftest import random_pd


def test_kl_zero_at_truth(rng):
    omega = random_pd(5, rng)
    assert kl_loss(omega, omega) == pytest.approx(0.0, abs=1e-10)


def test_kl_scaled_identity():
    p = 6
    # tr = 2p, logdet = p log 2, minus p: p (1 - log 2)
    assert kl_loss(np.eye(p), 2 * np.eye(p)) == pytest.approx(p * (1 - np.log(2)))


def test_kl_infinite_for_non_pd():
    est = np.eye(3)
    est[0, 0] = -1.0
    assert kl_loss(np.eye(3), est) == math.inf


def test_kl_rejects_non_pd_truth():
    bad = np.eye(3)
    bad[0, 0] = -1.0
    with pytest.raises(InvalidParameterError):
        kl_loss(bad, np.eye(3))


def test_kl_high_precision_oracle():
    # oracle: 50-digit evaluation of trace and log-determinant terms
    mpmath = pytest.importorskip("mpmath")
    mpmath.mp.dps = 50
    rng = np.random.default_rng(17)
    truth = random_pd(4, rng)
    est = random_pd(4, rng)
    t = mpmath.matrix(truth.tolist())
    e = mpmath.matrix(est.tolist())
    a = mpmath.lu_solve_mat(t, e) if hasattr(mpmath, "lu_solve_mat") else t**-1 * e
    trace = sum(a[i, i] for i in range(4))
    logdet = mpmath.log(mpmath.det(a))
    expected = float(trace - logdet - 4)
    assert kl_loss(truth, est) == pytest.approx(expected, abs=1e-10)


def test_quadratic_zero_at_truth(rng):
    omega = random_pd(4, rng)
    assert quadratic_loss(omega, omega) == pytest.approx(0.0, abs=1e-10)


def test_quadratic_scaled_identity():
    # T^-1 E - I = I, matrix square has trace p
    assert quadratic_loss(np.eye(5), 2 * np.eye(5)) == pytest.approx(5.0)


def test_quadratic_uses_matrix_square():
    truth = np.eye(2)
    est = np.array([[1.0, 0.5], [0.5, 1.0]])
    # (E - I)^2 = [[.25, 0], [0, .25]], trace 0.5
    assert quadratic_loss(truth, est) == pytest.approx(0.5)


def test_l2_frobenius():
    a = np.zeros((2, 2))
    b = np.array([[3.0, 0.0], [0.0, 4.0]])
    assert l2_loss(a, b) == pytest.approx(5.0)


def test_mse_pcor_strict_upper_triangle():
    truth = np.eye(3)
    est = np.eye(3)
    est[0, 1] = est[1, 0] = 0.3
    assert mse_pcor(truth, est) == pytest.approx(0.09 / 3)


def test_losses_permutation_invariant(rng):
    truth = random_pd(5, rng)
    est = random_pd(5, rng)
    perm = rng.permutation(5)
    pt, pe = truth[np.ix_(perm, perm)], est[np.ix_(perm, perm)]
    assert kl_loss(pt, pe) == pytest.approx(kl_loss(truth, est), abs=1e-9)
    assert quadratic_loss(pt, pe) == pytest.approx(quadratic_loss(truth, est), abs=1e-9)
    assert l2_loss(pt, pe) == pytest.approx(l2_loss(truth, est), abs=1e-9)


def test_loss_report_flags_non_pd():
    est = np.eye(3)
    est[0, 0] = -1.0
    report = loss_report(np.eye(3), est, np.eye(3), np.eye(3))
    assert report.non_pd_estimate
    assert report.kl == math.inf
    assert math.isfinite(report.l2)


def test_loss_report_consistency(rng):
    model = gen_ar1(4, rho=0.5)
    est = random_pd(4, rng)
    report = loss_report(
        model.omega, est, precision_to_pcor(model.omega), precision_to_pcor(est)
    )
    assert report.kl == pytest.approx(kl_loss(model.omega, est))
    assert not report.non_pd_estimate


def test_edge_metrics_hand_counts():
    # p=10 has 45 pairs; truth has 5 edges, estimate hits 3 and adds 2
    truth = {(0, 1), (1, 2), (2, 3), (3, 4), (4, 5)}
    est = {(0, 1), (1, 2), (2, 3), (6, 7), (8, 9)}
    m = edge_metrics(truth, est, 10)
    assert (m.tp, m.fp, m.fn, m.tn) == (3, 2, 2, 38)
    assert m.sn == pytest.approx(0.6)
    assert m.sp == pytest.approx(0.95)
    assert m.f1 == pytest.approx(0.6)
    expected_mcc = (3 * 38 - 2 * 2) / math.sqrt(5 * 5 * 40 * 40)
    assert m.mcc == pytest.approx(expected_mcc)
    assert expected_mcc == pytest.approx(0.55)
    assert not m.mcc_undefined


def test_edge_metrics_perfect():
    truth = {(0, 1), (2, 3)}
    m = edge_metrics(truth, truth, 5)
    assert m.sn == 1.0 and m.sp == 1.0 and m.f1 == 1.0 and m.mcc == pytest.approx(1.0)


def test_edge_metrics_both_empty_flags_mcc():
    m = edge_metrics(set(), set(), 4)
    assert m.sp == 1.0 and m.sn == 1.0
    assert m.mcc == 0.0 and m.mcc_undefined


def test_edge_metrics_order_insensitive():
    assert edge_metrics({(1, 0)}, {(0, 1)}, 3).tp == 1


def test_specificity_fpr_identity():
    # Table-style check: 1 - SP equals the false positive rate
    truth = {(0, 1)}
    est = {(0, 1), (1, 2), (0, 2)}
    m = edge_metrics(truth, est, 4)
    fpr = m.fp / (m.fp + m.tn)
    assert 1.0 - m.sp == pytest.approx(fpr)
