"""Wasserstein metrics on point patterns and Poisson process approximation bounds."""

from .ground import DiscreteAtoms, GroundSpace, Torus, UnitCube, check_diameter, d0
from .matching import min_bottleneck_assignment, min_sum_assignment, min_sum_injection
from .metrics import INF, d1_prime, d1p
from .processes import (
    ContinuousIntensity,
    DiscreteIntensity,
    HardCoreModel,
    TwoRunsModel,
    sample_hard_core,
    sample_immigration_death,
    sample_poisson,
    sample_two_runs,
    sample_two_runs_palm,
)
from .statistics import make_kernel, make_statistic, nn_avg, ustat_avg, ustat_centered
from .stein import (
    BoundReport,
    SteinConstants,
    c1,
    c2,
    gamma1,
    gamma2,
    hard_core_bound,
    theorem_bound,
    two_runs_bound,
)
from .transport import FiniteSupportDistribution, SampleSet, dual_lower_bound, empirical_d2p, finite_support_d2p

__version__ = "0.1.0"
