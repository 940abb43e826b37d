"""Numerical verification of L^p regularity for parabolic equations with
time-dependent, possibly partially degenerate diffusion matrices, including
the drift-removal reduction for Ornstein-Uhlenbeck type operators."""

from .coeffs import (CoefficientPath, ParabolicityCertificate, certify_parabolicity,
                     constant_path, cov_accumulate, polynomial_path, table_path,
                     table_path_from_csv)
from .errors import ParregError
from .estimates import (EstimateReport, estimate_ratio, l2_multiplier_oracle,
                        lp_norm, m1_factor, sweep_lambda)
from .gauss import GaussianMeasure, char_fn, convolve, density_at, make_gaussian, sample
from .grids import Field, GridSpec, SpectralField, make_grid, partial_fourier
from .ou import (GrowthBound, OUProblem, change_frame, check_invariance,
                 elliptic_lift, growth_constants, matrix_exp, reduce_coefficients,
                 solve_ou)
from .solver import residual, second_derivative, solve_duhamel, solve_space_oracle
from .stochastic import (MatrixPath, McReport, gamma_ab, matrix_sqrt_psd,
                         mc_law_check, mc_solve, stochastic_integral)

__version__ = "0.1.0"

__all__ = [
    "CoefficientPath", "ParabolicityCertificate", "certify_parabolicity",
    "constant_path", "cov_accumulate", "polynomial_path", "table_path",
    "table_path_from_csv", "ParregError", "EstimateReport", "estimate_ratio",
    "l2_multiplier_oracle", "lp_norm", "m1_factor", "sweep_lambda",
    "GaussianMeasure", "char_fn", "convolve", "density_at", "make_gaussian",
    "sample", "Field", "GridSpec", "SpectralField", "make_grid",
    "partial_fourier", "GrowthBound", "OUProblem", "change_frame",
    "check_invariance", "elliptic_lift", "growth_constants", "matrix_exp",
    "reduce_coefficients", "solve_ou", "residual", "second_derivative",
    "solve_duhamel", "solve_space_oracle", "MatrixPath", "McReport",
    "gamma_ab", "matrix_sqrt_psd", "mc_law_check", "mc_solve",
    "stochastic_integral",
]
