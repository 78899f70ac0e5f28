"""Sparse Gaussian graphical model estimation by projection predictive
covariance selection."""

__version__ = "0.1.0"

from .core import (
    DataMatrix,
    edges_from_matrix,
    log_det,
    precision_to_pcor,
    regression_identity,
    standardize,
)
from .assembly import (
    EstimatedGraph,
    PdReport,
    asymmetric_pairs,
    nearest_pd_fixed_pattern,
    or_rule_symmetrize,
    pcor_from_lambda,
    precision_from_lambda,
)
from .estimator import FitConfig, ProjectionGGM, fit_ggm, fit_single_node
from .generate import (
    TrueModel,
    gen_ar1,
    gen_ar2,
    gen_cluster,
    gen_random,
    gen_scale_free,
    generate,
    sample_mvn,
)
from .metrics import (
    EdgeMetrics,
    LossReport,
    edge_metrics,
    kl_loss,
    l2_loss,
    loss_report,
    mse_pcor,
    quadratic_loss,
)
from .posterior import (
    HorseshoeConfig,
    PosteriorDraws,
    fit_bayes_boot,
    fit_horseshoe,
    tau0_from_p0,
)
from .projection import (
    DecisionRule,
    LooWeights,
    ProjectedDraws,
    SelectionPath,
    decide_size,
    default_max_size,
    fit_generalized_pareto,
    forward_search,
    gaussian_log_density,
    loo_utility,
    pareto_smooth,
    project_draw,
    project_draws,
    projection_loss,
    psis_loo_weights,
    reference_lpd,
    select_node,
)

__all__ = [name for name in dir() if not name.startswith("_")]
