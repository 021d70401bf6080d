"""Goodness-of-fit tests for conditional discrete response models.

The tests compare a nonrandomized probability integral transform of the
observed responses with the uniform law, through univariate and lag-1
biparameter empirical processes, with critical values from a parametric
bootstrap.
"""

from .bootstrap import BootstrapResult, StatPlan, WarpResult, compute_statistics, parametric_bootstrap, warp_mc
from .estimate import FitOptions, FitResult, fisher_info, fit_mle, info, loglik, score
from .model import (
    ConditionalLaw,
    ObservationSeries,
    OrderedChoiceSpec,
    PoissonSpec,
    lambda_path,
    mixture_law,
    ordered_cdf,
    poisson_cdf,
    quantile,
    simulate,
)
from .process import MarkedProcess, R1Process, R2Process, S1Process, S2Process, r1m_eval, r2m_eval, s1_eval, s2_eval, z_marked
from .stat import TestStatistic, cvm, cvm_1d, cvm_2d, ks, ks_1d, ks_2d
from .transform import NoiseMatrix, PitPair, TransformSeries, delta_f, discrepancy_d, gamma, m_random, nonrandomized, randomized_pit

__version__ = "0.1.0"
