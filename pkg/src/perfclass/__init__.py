"""Optimal binary classification when the classified behaviour responds to the classifier."""

from .classifier import (
    ACCURACY,
    COMPLIANCE,
    Constant,
    Evaluation,
    NegativeThreshold,
    ObjectiveWeights,
    PositiveThreshold,
    Step,
    acceptance_rates,
    best_response,
    classify_prob,
    evaluate,
    objective_value,
    remainder,
)
from .dist import ContinuousDist, NumericsConfig, find_root, integrate, make_dist, maximize_1d
from .model import Environment, SignalModel, make_environment, make_signal_model, validate_mlrp
from .oracle import TrialConfig, TrialReport, run_suite, simulate_population, verify_dominance, verify_step2_signs
from .solver import SolveReport, check_conditions, gap_of_threshold, match_prevalence, optimize_family, solve_optimal

__version__ = "0.1.0"
