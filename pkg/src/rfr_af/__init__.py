"""Asymptotic error, sensitivity and optimal activation functions for random features regression."""

from .asymptotics import (
    Regime,
    RegimeEvaluation,
    RegimeParams,
    chi,
    error_r1,
    error_r2,
    error_r3,
    objective,
    omega,
    sensitivity_r1,
    sensitivity_r2,
    sensitivity_r3,
)
from .errors import (
    DegenerateLeadingCoefficient,
    InterpolationThreshold,
    InvalidMoments,
    NegativeMuStar,
    NonFiniteValue,
    NumericError,
    RFRError,
    RootNotFound,
    SolveFailed,
    SolverDiverged,
    TieBreakAmbiguous,
)
from .moments import ActivationSpec, Moments, compute_moments, functional_norms, parse_af
from .optimizer import Optimum, R1Thresholds, grid_oracle, r1_thresholds, real_roots_in_interval, solve, solve_r1, solve_r2, solve_r3
from .simulator import SimConfig, SimEstimate, estimate, make_target, sample_sphere, train_rfr
from .synthesis import SynthesizedAF, erf, synthesize_l1, synthesize_l2

__version__ = "0.1.0"
