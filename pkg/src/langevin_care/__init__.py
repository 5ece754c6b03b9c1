"""Drift estimation for generalised Ornstein-Uhlenbeck processes through
perturbed continuous-time algebraic Riccati equations."""

from .asymptotics import (
    CltReport,
    ErrorPath,
    LimitCovariance,
    half_line_product,
    l1_apply,
    l2_matrix,
    limit_covariance,
    mc_clt_check,
    propagated_covariance,
    tilde,
)
from .care import (
    CareCoefficients,
    CareSolution,
    PerturbationDiagnostics,
    certify_uniqueness,
    operator_constants,
    perturbation_bound,
    solve_care,
)
from .covariance import (
    LagCovariance,
    QuadratureConfig,
    empirical_gamma,
    gamma_derivative,
    lag_grid,
    theoretical_gamma,
)
from .errors import *  # noqa: F401,F403
from .estimator import (
    EstimationReport,
    build_coefficients,
    estimate_from_gamma,
    estimate_theta,
    pd_precheck,
    select_window,
)
from .matrix_core import kron_sum, mat_exp, mat_power, stability_report, unvec, vec
from .noise import NoiseComponent, NoiseSpec, Trajectory, driver_path, fbm_path, variance_fn
from .simulate import OUModel, SimConfig, lamperti, lamperti_inverse, recover_g, simulate_u

__version__ = "0.1.0"
