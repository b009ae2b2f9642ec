"""Linear processes with truncated power-law filters and tapered Pareto innovations.

Exact partial-sum variances, limit constants and Gaussian limit laws, plus
seeded Monte Carlo experiments that check the limit theorems at finite n.
"""

from .coefficients import (CoefficientProfile, d_coefficients, delta_for_case, exact_variance,
                           joint_weights, lyapunov_fraction, max_window_sums, v1_v2)
from .errors import (CapacityError, ConfigurationError, DegenerateError, DomainError,
                     EmptyWindowError, NumericalError, TaperflowError)
from .filters import (FilterSpec, build_filter, case_id, case_parts, classify_filter_taper,
                      classify_innovation_taper, filter_sum, lambda_of)
from .innovations import (InnovationModel, ParetoSpec, TaperedParetoSpec, centered_abs_moment,
                          moment_ratio, moment_zeta, pareto_cdf, sample_tapered_pareto,
                          tapered_pareto_cdf, tapered_pareto_density)
from .limit_theory import (LimitLaw, c4_limit_check, covariance_kernel, hurst, i_series,
                           limit_constant, limit_law, normalizer_sq, scaling_probe, w_function)

__version__ = "0.1.0"
