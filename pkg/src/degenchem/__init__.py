"""Accumulation-variable laboratory for radially symmetric aggregation-
diffusion dynamics with a degenerate diffusion coefficient.

The package works in the cumulative mass variable w(s, t), s = r^n, where
the dynamics become a scalar degenerate parabolic equation with a drift
whose speed depends on w itself.  It provides the radial <-> cumulative
transforms, hypothesis-checked initial data generators, a monotone
theta-scheme solver with a regularized-family mode, and the analysis layer
that assembles numerical blow-up certificates.
"""

from .domain import Params, SGrid, make_params, make_sgrid, unit_sphere_area
from .transform import (RadialProfile, WProfile, accumulate, density_from_w,
                        radial_mass, retransformed_mass, signal_gradient,
                        signal_reconstruct, total_mass)
from .initial_data import (WInitial, HypothesisReport, eps_subgrid,
                           make_concave_compatible, make_concentrated,
                           regularized_initial, scaled_second_differences,
                           validate)
from .solver import (EvolutionResult, FamilyResult, SolverConfig,
                     default_max_gradient, evolve, limit_family, step_eps)
from .analysis import (BlowupCertificate, LowerOdeResult, MomentConfig,
                       MomentConstants, Thresholds, cauchy_schwarz_sides,
                       certify_blowup, check_comparison, check_concavity,
                       check_supersolution, choose_gamma, choose_thresholds,
                       config_violations, lower_ode, make_moment_config,
                       moment, moment_constants, riccati,
                       weighted_square_moment)
from .kernels import active_backend

__version__ = "0.1.0"

__all__ = [
    "Params", "SGrid", "make_params", "make_sgrid", "unit_sphere_area",
    "RadialProfile", "WProfile", "accumulate", "density_from_w",
    "radial_mass", "retransformed_mass", "signal_gradient",
    "signal_reconstruct", "total_mass",
    "WInitial", "HypothesisReport", "eps_subgrid", "make_concave_compatible",
    "make_concentrated", "regularized_initial", "scaled_second_differences",
    "validate",
    "EvolutionResult", "FamilyResult", "SolverConfig", "default_max_gradient",
    "evolve", "limit_family", "step_eps",
    "BlowupCertificate", "LowerOdeResult", "MomentConfig", "MomentConstants",
    "Thresholds", "cauchy_schwarz_sides", "certify_blowup",
    "check_comparison", "check_concavity", "check_supersolution",
    "choose_gamma", "choose_thresholds", "config_violations", "lower_ode",
    "make_moment_config", "moment", "moment_constants", "riccati",
    "weighted_square_moment",
    "active_backend",
    "__version__",
]
