"""Source/range condition certificates for variational regularisation.

Compute certificate elements for linear inverse problems by convex
minimisation, verify them a-posteriori, turn them into exact range data and
worst-case error bounds, and learn Fourier sampling patterns that admit
sparse certificates.
"""

__version__ = "0.1.0"

from .errors import ConfigurationError, InputError, VerificationError
from .functionals import (ProxFunctional, SubgradientCheck, group_soft_threshold,
                          project_group_ball, soft_threshold, tv_value,
                          verify_l1_subgradient, verify_tv_subgradient)
from .operators import (FourierSamplingMap, GradientMap, IdentityMap, LinearMap,
                        MatrixMap, SamplingMap, SamplingMask, adjoint_gap, dft2,
                        fourier_sampling, full_mask, grad2, lowpass_mask,
                        power_norm, real_inner, sampling, vandermonde)
from .solvers import (SolveConfig, SolveReport, bregman_loss, extract_mask,
                      range_data, solve_palm, solve_range_cd, solve_source_gd,
                      source_gradient, source_objective)
from .varreg import (ErrorEstimate, VarRegProblem, bregman_distance_tv,
                     error_estimate, solve_pdhg)

__all__ = [
    "ConfigurationError", "InputError", "VerificationError",
    "ProxFunctional", "SubgradientCheck", "group_soft_threshold",
    "project_group_ball", "soft_threshold", "tv_value",
    "verify_l1_subgradient", "verify_tv_subgradient",
    "FourierSamplingMap", "GradientMap", "IdentityMap", "LinearMap",
    "MatrixMap", "SamplingMap", "SamplingMask", "adjoint_gap", "dft2",
    "fourier_sampling", "full_mask", "grad2", "lowpass_mask", "power_norm",
    "real_inner", "sampling", "vandermonde",
    "SolveConfig", "SolveReport", "bregman_loss", "extract_mask", "range_data",
    "solve_palm", "solve_range_cd", "solve_source_gd", "source_gradient",
    "source_objective",
    "ErrorEstimate", "VarRegProblem", "bregman_distance_tv", "error_estimate",
    "solve_pdhg",
    "__version__",
]
