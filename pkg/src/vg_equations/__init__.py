"""
vg-equations - numerics for the Variance Gamma process
Closed-form densities, generalized Weyl operators, equation checks and samplers
"""

__version__ = "0.1.0"

from .errors import (VgError, DomainError, BoundaryError, PreconditionError, DataError,
                     RangeError, ConvergenceError, IntegrabilityError)
from .special_fn import Accuracy, ln_gamma, gamma, bessel_k, exp_integral_e1
from .quadrature import QuadConfig
from .model import (DIVERGENT, GammaParams, VgParams, FactorPair, gamma_density, gamma_laplace,
                    vg_density, vg_density_quadrature, vg_char, levy_tail, factor_params,
                    vg_density_dx)
from .operators import (Func1D, weyl_plus, weyl_minus, phillips_apply, weyl_plus_symbol,
                        weyl_minus_symbol, phillips_symbol)
from .residuals import (EquationId, Grid2D, ResidualReport, check_time_nonlocal,
                        check_drifted_nonlocal, check_space_ode, check_phillips_eq,
                        check_beghin_shift)
from .sampling import (RngHandle, SamplerOutput, Construction, sample_gamma,
                       sample_vg_timechange, sample_vg_difference, sample_jump_y,
                       sample_compound_poisson)
from .diagnostics import (KsReport, ConvergenceStudy, VgCdfTable, ks_one_sample, ks_two_sample,
                          empirical_char, vg_cdf, run_convergence_study)
from .utils import load_config, setup_logging
from .cache import CacheManager

# Main CLI function
from .cli import main

__all__ = [
    'VgError', 'DomainError', 'BoundaryError', 'PreconditionError', 'DataError',
    'RangeError', 'ConvergenceError', 'IntegrabilityError',
    'Accuracy', 'ln_gamma', 'gamma', 'bessel_k', 'exp_integral_e1',
    'QuadConfig',
    'DIVERGENT', 'GammaParams', 'VgParams', 'FactorPair', 'gamma_density', 'gamma_laplace',
    'vg_density', 'vg_density_quadrature', 'vg_char', 'levy_tail', 'factor_params',
    'vg_density_dx',
    'Func1D', 'weyl_plus', 'weyl_minus', 'phillips_apply', 'weyl_plus_symbol',
    'weyl_minus_symbol', 'phillips_symbol',
    'EquationId', 'Grid2D', 'ResidualReport', 'check_time_nonlocal', 'check_drifted_nonlocal',
    'check_space_ode', 'check_phillips_eq', 'check_beghin_shift',
    'RngHandle', 'SamplerOutput', 'Construction', 'sample_gamma', 'sample_vg_timechange',
    'sample_vg_difference', 'sample_jump_y', 'sample_compound_poisson',
    'KsReport', 'ConvergenceStudy', 'VgCdfTable', 'ks_one_sample', 'ks_two_sample',
    'empirical_char', 'vg_cdf', 'run_convergence_study',
    'load_config', 'setup_logging', 'CacheManager',
    'main',
]
