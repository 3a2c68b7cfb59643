"""Post-processing estimators for phase estimation and their bounds."""

from .bayes import (
    DegeneratePosteriorError,
    ParameterGrid,
    Posterior,
    bayes_estimate,
    central_abs_moment,
    marginal,
    posterior,
    posterior_2d,
    posterior_draw,
    posterior_variance,
)
from .information import (
    BoundReport,
    barankin_bound,
    bound_report,
    fisher_information,
    gaussian_abs_moment,
    gaussian_limit_xi,
    generalized_fisher,
    xi_beta,
)
from .mle import MleResult, mle_estimate, mle_repeat_statistics
from .montecarlo import ExperimentConfig, SweepResult, holevo_variance, pgh_run, run_sweep
from .statmodel import (
    DiscreteModel,
    DomainError,
    FeedbackInterferometerModel,
    NoonPhaseModel,
    Sample,
    TabulatedModel,
    TwoParamNoonModel,
    sample_outcomes,
)

__version__ = "0.1.0"
