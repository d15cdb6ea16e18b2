"""
Matrix h-connections

Frobenius form, completion of the (0,1)-part from the flatness relation,
trace-free μ̂₁, curvature, gauges (general and Drinfeld–Sokolov to conformal),
the Schwarzian and coordinate-change checks.
"""

from .conformal import (
    AssociatedGauge,
    ConformalGaugeSpec,
    UNormalization,
    associated_gauge,
    conformal_A1,
    ds_to_conformal,
    higher_order_t_table,
)
from .coords import (
    JetCalculus,
    check_jet,
    identity_jet,
    schwarzian,
    substitute_jet,
    transform_lowest_order,
    transform_operator,
)
from .curvature import (
    apply_rules,
    check_flat,
    conjugate,
    constraint_rules,
    curvature,
    gauge_apply,
    rank_one_residuals,
    require_rank_one,
)
from .fcoef import FcoefEquation, fcoef_equations, variation_symbol
from .frobenius import (
    MatrixConn,
    a2_columns,
    build_frobenius,
    complete_A2,
    complete_connection,
    solve_mu1,
    solved_system,
)
from .matrix import Matrix, identity, minors2, trace, unipotent_inverse

__all__ = [
    "AssociatedGauge",
    "ConformalGaugeSpec",
    "FcoefEquation",
    "JetCalculus",
    "Matrix",
    "MatrixConn",
    "UNormalization",
    "a2_columns",
    "apply_rules",
    "associated_gauge",
    "build_frobenius",
    "check_flat",
    "check_jet",
    "complete_A2",
    "complete_connection",
    "conformal_A1",
    "conjugate",
    "constraint_rules",
    "curvature",
    "ds_to_conformal",
    "fcoef_equations",
    "gauge_apply",
    "higher_order_t_table",
    "identity",
    "identity_jet",
    "minors2",
    "rank_one_residuals",
    "require_rank_one",
    "schwarzian",
    "solve_mu1",
    "solved_system",
    "substitute_jet",
    "trace",
    "transform_lowest_order",
    "transform_operator",
    "unipotent_inverse",
    "variation_symbol",
]
