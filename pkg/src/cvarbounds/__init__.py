"""Certified lower bounds on prior-predictive CVaR for two-point Gaussian
decision problems, with Monte Carlo and exact-law verification."""

from .bounds import (
    BoundResult,
    Branch,
    FactorEvaluation,
    Method,
    TwoPointSpec,
    balanced_bound,
    bandit_bound,
    bound_factor,
    bound_factor_grid_min,
    estimation_bound,
    hinge_lower_bound,
    optimal_bound_constant,
    optimal_gap,
    optimal_rho,
    optimal_separation,
    two_point_bound,
)
from .divergences import (
    DivergenceKind,
    HellingerBudget,
    bandit_budget,
    estimation_budget,
    hellinger2_bernoulli,
    hellinger_le_kl_check,
    kl_bernoulli,
    kl_gaussian_unit_var,
)
from .errors import DomainError
from .experiments import (
    ConfigError,
    ExperimentConfig,
    ExperimentKind,
    ExperimentReport,
    ExperimentRow,
    OutputFormat,
    ReportIOError,
    emit_report,
    render_csv,
    render_json,
    run_experiment,
)
from .inversion import InversionResult, bernoulli_inverse, hellinger_inverse_closed
from .risk import (
    DiscreteLossDistribution,
    RiskLevel,
    SampleSet,
    cvar_dominates_mean,
    empirical_cvar,
    exact_cvar,
    hinge_mean,
)
from .sim import (
    BanditBatch,
    BanditConfig,
    EstimationBatch,
    EstimationConfig,
    Estimator,
    ExploreThenCommit,
    Policy,
    ThompsonGaussian,
    Transcript,
    UCB,
    UniformRandom,
    exact_sign_estimator_law,
    exact_uniform_bandit_law,
    mc_transcript_kl,
    normal_upper_tail,
    replicate_rng,
    run_bandit,
    run_estimation,
    simulate_bandit,
    simulate_estimation,
)

__version__ = "0.1.0"
