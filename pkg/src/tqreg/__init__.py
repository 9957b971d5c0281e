"""Exact and heuristic solvers for truncated quadratic regularization.

The objective is ``||A x - y||^2 + sum_j Q(x[j+1] - x[j])`` with
``Q(u) = alpha * min(u**2, beta)``, or the direct form
``||T u - y||^2 + sum_j Q(u_j)``.  The package also builds the SUBSET-SUM
gadget showing that minimizing it is NP-hard, and an l0 counterpart.
"""

from .core import (
    DimensionError,
    Form,
    Generalized,
    HardThreshold,
    InvalidRegularizerError,
    L0Indicator,
    ProblemInstance,
    RegularizationParams,
    SolveResult,
    TruncatedQuadratic,
    UnsupportedRegularizerError,
    classify_breaks,
    eval_regularizer,
    evaluate_objective,
)
from .diffop import DifferenceOperator, apply_D, apply_D_pinv, lift_direct_to_difference, map_minimizer
from .reduction import (
    Answer,
    Certificate,
    Decision,
    ReductionArtifact,
    SubsetSumInstance,
    brute_force_subset_sum,
    build_reduction,
    decide_subset_sum,
    extract_certificate,
    indicator_point,
    round_to_indicator,
)
from .solvers import (
    GuardError,
    SolverConfig,
    solve_dp,
    solve_dp_identity,
    solve_exact_oracle,
    solve_fixed_breaks,
    solve_local_icm,
)
from .sparsity import L0Params, build_generalized_reduction, eval_l0_objective, solve_l0_oracle

__version__ = "0.1.0"
