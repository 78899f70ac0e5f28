"""Loss functions on precision matrices and classification metrics on edge
sets."""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .exceptions import InvalidParameterError


@dataclass
class LossReport:
    kl: float
    ql: float
    l2: float
    mse_pcor: float
    non_pd_estimate: bool = False


@dataclass
class EdgeMetrics:
    tp: int
    fp: int
    tn: int
    fn: int
    sp: float
    sn: float
    mcc: float
    f1: float
    mcc_undefined: bool = False


def _is_pd(m: np.ndarray) -> bool:
    try:
        np.linalg.cholesky(m)
        return True
    except np.linalg.LinAlgError:
        return False


def _check_pair(truth: np.ndarray, est: np.ndarray) -> None:
    if truth.shape != est.shape or truth.ndim != 2:
        raise InvalidParameterError(
            f"dimension mismatch: {truth.shape} vs {est.shape}"
        )


def kl_loss(truth: np.ndarray, est: np.ndarray) -> float:
    """tr(T^-1 E) - log det(T^-1 E) - p; +inf when the estimate is not PD."""
    truth = np.asarray(truth, dtype=float)
    est = np.asarray(est, dtype=float)
    _check_pair(truth, est)
    if not _is_pd(est):
        return math.inf
    p = truth.shape[0]
    a = np.linalg.solve(truth, est)
    sign_t, logdet_t = np.linalg.slogdet(truth)
    sign_e, logdet_e = np.linalg.slogdet(est)
    if sign_t <= 0:
        raise InvalidParameterError("truth matrix is not positive definite")
    return float(np.trace(a) - (logdet_e - logdet_t) - p)


def quadratic_loss(truth: np.ndarray, est: np.ndarray) -> float:
    """tr((T^-1 E - I)^2) with a matrix (not elementwise) square."""
    truth = np.asarray(truth, dtype=float)
    est = np.asarray(est, dtype=float)
    _check_pair(truth, est)
    if not _is_pd(est):
        return math.inf
    a = np.linalg.solve(truth, est) - np.eye(truth.shape[0])
    return float(np.trace(a @ a))


def l2_loss(truth: np.ndarray, est: np.ndarray) -> float:
    truth = np.asarray(truth, dtype=float)
    est = np.asarray(est, dtype=float)
    _check_pair(truth, est)
    return float(np.linalg.norm(truth - est, "fro"))


def mse_pcor(truth_pcor: np.ndarray, est_pcor: np.ndarray) -> float:
    """Mean squared difference over the strict upper triangle."""
    truth_pcor = np.asarray(truth_pcor, dtype=float)
    est_pcor = np.asarray(est_pcor, dtype=float)
    _check_pair(truth_pcor, est_pcor)
    iu = np.triu_indices(truth_pcor.shape[0], k=1)
    diff = truth_pcor[iu] - est_pcor[iu]
    return float(np.mean(diff**2))


def loss_report(truth_omega, est_omega, truth_pcor, est_pcor) -> LossReport:
    kl = kl_loss(truth_omega, est_omega)
    return LossReport(
        kl=kl,
        ql=quadratic_loss(truth_omega, est_omega),
        l2=l2_loss(truth_omega, est_omega),
        mse_pcor=mse_pcor(truth_pcor, est_pcor),
        non_pd_estimate=math.isinf(kl),
    )


def edge_metrics(truth_edges, est_edges, p: int) -> EdgeMetrics:
    """Confusion counts over all unordered pairs plus SP, SN, MCC and F1.
    A zero factor in the MCC denominator yields MCC = 0, flagged."""
    truth = {tuple(sorted(e)) for e in truth_edges}
    est = {tuple(sorted(e)) for e in est_edges}
    pairs = p * (p - 1) // 2
    tp = len(truth & est)
    fp = len(est - truth)
    fn = len(truth - est)
    tn = pairs - tp - fp - fn
    sp = tn / (tn + fp) if tn + fp else 1.0
    sn = tp / (tp + fn) if tp + fn else 1.0
    f1 = 2 * tp / (2 * tp + fp + fn) if 2 * tp + fp + fn else 1.0
    denom = (tp + fp) * (tp + fn) * (tn + fp) * (tn + fn)
    undefined = denom == 0
    mcc = 0.0 if undefined else (tp * tn - fp * fn) / math.sqrt(denom)
    return EdgeMetrics(
        tp=tp, fp=fp, tn=tn, fn=fn, sp=sp, sn=sn, mcc=mcc, f1=f1,
        mcc_undefined=undefined,
    )
