"""Simulation, integration and regularity analysis of stochastic measures."""

__version__ = "0.1.0"

from .besov import (BesovLevelSums, BesovParams, MembershipReport, Verdict, besov_norm_estimate,
                    besov_report, dyadic_level_sums, lp_modulus, lp_norm, membership_diagnostic)
from .errors import DomainError, InvalidModelError, QuadratureError, ResourceLimitError, SMError
from .fourier import (ConvergenceReport, FourierCoefficients, block_energies, coefficients_by_parts,
                      coefficients_direct, convergence_report, delayed_mean_partial_sum, detrend_total,
                      partial_sum)
from .integrate import (IntegrandSpec, catalogue_integrand, integrate, integrate_grid, integrate_lebesgue,
                        integrate_rademacher, integrate_step_function)
from .models import (FieldSample, LebesgueMeasure, ModelKind, PathSample, RademacherRealization,
                     SMModelSpec, realize, sample_field, sample_path)
from .quadrature import QuadratureConfig
from .rng import RngStream
from .verify import (VerificationReport, cubic_increment_check, exp_moment_constant, holder_bound_check,
                     paley_zygmund_check, sum_squares_check)
