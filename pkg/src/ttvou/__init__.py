"""Travel-time variability valuation from quantile models.

Risk measures (travel-time budget, mean-excess travel time), the values of
reliability, unreliability and variability with their ratios, derivative
and Monte Carlo verifiers, and route scenario tables.
"""
__version__ = "0.1.0"

from .errors import NumericalError, TTVouError, ValidationError
from .quantile_models import (BurrXII, Degenerate, Empirical, Interpolation, Lognormal, UniformTest,
                              empirical_from_samples, fit_burr, fit_lognormal_mle,
                              lognormal_from_moments, summary_stats)
from .risk_measures import (Criterion, SchedulingPreferences, departure_mean, departure_mett,
                            expected_utility, mean_excess_travel_time, optimal_departure,
                            reliability_premium, risk_measures, travel_time_budget)
from .scenarios import Scenario, compare_routes, trip_cost, tradeoff_table
from .valuation import (kappa_and_ell, reliability_ratio, valid_condition, valuate,
                        value_of_reliability, value_of_unreliability, value_of_variability,
                        variability_ratio)
from .verifier import (curvature_condition, check_derivative_signs, condition_sweep,
                       monte_carlo_audit)
