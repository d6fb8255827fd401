"""Explicit upper bounds for |zeta(1/2 + it)| and the machinery to check them."""

from .errors import (
    DomainError,
    HypothesisError,
    InfeasibleError,
    PrecisionError,
    RefusalError,
    ZetaBoundError,
)
from .expsum import (
    ComplexSum,
    PhaseSpec,
    eval_exp_sum,
    kusmin_landau_bound,
    weyl_difference_bound,
)
from .derivative_tests import (
    second_derivative_test_bound,
    subdivision_audit,
    third_derivative_test_bound,
)
from .pipeline import (
    CoefficientTuple,
    RegionParams,
    compute_coefficients,
    compute_large_coefficients,
    compute_medium_coefficients,
    crossing_check,
    theorem_bound,
)
from .precision import get_dps, set_dps, workdps
from .zeta import reference_zeta, rs_main_sum, rs_zeta_upper, rsl_bound

__all__ = [
    "CoefficientTuple",
    "ComplexSum",
    "DomainError",
    "HypothesisError",
    "InfeasibleError",
    "PhaseSpec",
    "PrecisionError",
    "RefusalError",
    "RegionParams",
    "ZetaBoundError",
    "compute_coefficients",
    "compute_large_coefficients",
    "compute_medium_coefficients",
    "crossing_check",
    "eval_exp_sum",
    "get_dps",
    "kusmin_landau_bound",
    "reference_zeta",
    "rs_main_sum",
    "rs_zeta_upper",
    "rsl_bound",
    "second_derivative_test_bound",
    "set_dps",
    "subdivision_audit",
    "theorem_bound",
    "third_derivative_test_bound",
    "weyl_difference_bound",
    "workdps",
]
