"""Almost stochastic dominance through the W2 geometry of quantile functions."""
__version__ = "0.1.0"

from .empirical import (StepQuantile, empirical_quantile, evaluate,
                        integrate_piecewise)
from .inference import (TestResult, VarianceEstimate, bootstrap_sigma, decide,
                        delta_sigma, one_sample_sigma, plug_in_sigma,
                        test_almost_dominance, u_function)
from .kernels import BACKEND
from .models import (NormalParams, contour_grid, epsilon_analytic,
                     epsilon_normal, fit_normal_ml, normal_cdf,
                     normal_quantile)
from .order_distance import (IndexReport, OptimalOrderedPair, epsilon_index,
                             is_stochastically_dominated, l1_comparator_index,
                             minimal_trim_for_order, optimal_ordered_pair,
                             trimmed_order_distance, w2)
from .simlab import (SimConfig, SimReport, normal_sampler, run_coverage_study,
                     run_rejection_study)
from .trimming import (envelope_contains, lower_trim_quantile,
                       trimmed_cdf_value, upper_trim_quantile)
