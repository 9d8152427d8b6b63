"""Flexible biomarker combination by Youden-index-targeted kernel machines."""

from .baselines import LinearCombiner, OptimizerConfig, ksm_fit, lr_fit, mmm_fit, mvn_fit, nelder_mead, swm_fit
from .dca import SolverConfig, SolverState, dca_fit, solve_convex_subproblem
from .estimator import FittedCombiner, TuningPlan, fit, load_model, save_model
from .kernels import KernelSpec, gram_matrix, kernel_eval, median_heuristic_tau2
from .loss import LossParams, dc_components, empirical_objective, l2_subgradient, psi_delta
from .metrics import best_threshold, empirical_youden, sens_spec
from .simgen import SimDesign, generate, make_rng

__version__ = "0.1.0"

__all__ = [
    "KernelSpec", "gram_matrix", "kernel_eval", "median_heuristic_tau2",
    "LossParams", "psi_delta", "dc_components", "l2_subgradient", "empirical_objective",
    "SolverConfig", "SolverState", "dca_fit", "solve_convex_subproblem",
    "FittedCombiner", "TuningPlan", "fit", "save_model", "load_model",
    "sens_spec", "empirical_youden", "best_threshold",
    "LinearCombiner", "OptimizerConfig", "nelder_mead", "mmm_fit", "swm_fit", "mvn_fit", "ksm_fit", "lr_fit",
    "SimDesign", "generate", "make_rng",
]
