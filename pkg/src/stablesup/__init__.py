"""Distributions of a stable process and its running maximum.

Cumulative distributions of X_T, of the running supremum sup_{t<=T} X_t,
their joint law, and damped exchange-type expectations, computed through
Wiener-Hopf factor integrals on exponentially spaced deformed rays with
Laplace inversion on a sinh-deformed Bromwich contour or by Gaver-type
extrapolation.
"""

from .charexp import (
    ConeSpec,
    DerivedConstants,
    Regime,
    StableParams,
    admissible_cone,
    classify,
    derived,
    psi,
    psi0,
    sinh_bromwich_allowed,
)
from .distributions import (
    EvalRequest,
    Method,
    PayoffTransform,
    cpdf_sup,
    cpdf_sup_transform,
    cpdf_x,
    exchange_expectation,
    exchange_payoff_transform,
    general_expectation,
    indicator_payoff_transform,
    joint_cpdf,
    joint_v1_transform,
)
from .errors import (
    BranchCutError,
    ContourError,
    PlanError,
    RegimeError,
    StableSupError,
    ToleranceError,
)

__all__ = [
    "StableParams",
    "DerivedConstants",
    "Regime",
    "ConeSpec",
    "classify",
    "derived",
    "psi",
    "psi0",
    "admissible_cone",
    "sinh_bromwich_allowed",
    "Method",
    "EvalRequest",
    "PayoffTransform",
    "cpdf_x",
    "cpdf_sup",
    "cpdf_sup_transform",
    "joint_v1_transform",
    "joint_cpdf",
    "exchange_expectation",
    "general_expectation",
    "exchange_payoff_transform",
    "indicator_payoff_transform",
    "StableSupError",
    "RegimeError",
    "ContourError",
    "BranchCutError",
    "PlanError",
    "ToleranceError",
]

__version__ = "0.1.0"
