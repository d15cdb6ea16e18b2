"""Curvature and gauge action for MatrixConn."""

import logging
from typing import List, Tuple

from ..diffalg import DerivativeRules, DerivedGen, DiffPoly, gen_id, h
from ..diffop import Convention, flatness_constraints
from ..errors import ContractViolation
from .frobenius import MatrixConn, Table, solved_system
from .matrix import (
    Matrix,
    bracket,
    identity,
    mat_add,
    mat_map,
    mat_mul,
    mat_scale,
    mat_sub,
    minors2,
    support,
)

logger = logging.getLogger(__name__)


def curvature(c: MatrixConn) -> Matrix:
    """F = h(∂A₂ − ∂̄A₁) + [A₁, A₂], the dz∧dz̄ coefficient."""
    dA2 = mat_map(c.A2, lambda x: x.d())
    dbA1 = mat_map(c.A1, lambda x: x.dbar())
    linear = mat_scale(mat_sub(dA2, dbA1), h(1) * c.h_sign)
    F = mat_add(linear, bracket(c.A1, c.A2))
    logger.debug("curvature n=%d support %s", c.n, support(F))
    return F


def rank_one_residuals(F: Matrix) -> List[DiffPoly]:
    """Nonzero 2×2 minors of F (empty when rank F ≤ 1)."""
    return [m for m in minors2(F) if m]


def apply_rules(F: Matrix, rules: DerivativeRules) -> Matrix:
    """Normalize every entry with the given rewrite rules."""
    return mat_map(F, rules.normalize)


def constraint_rules(n: int, t_hat: Table, mu_hat: Table) -> DerivativeRules:
    """
    The flatness constraints as rewrite rules ∂̄t_k ↦ …, one per constraint.

    Each t̂_k must be a single generator; the constraints are taken from the
    cyclic-vector system, which shares the sign of h with MatrixConn(h_sign=1).
    """
    sys = solved_system(n, t_hat, mu_hat, Convention.CYCLIC_VECTOR)
    rules = DerivativeRules()
    for power, constraint in enumerate(flatness_constraints(sys)):
        leader = DerivedGen(gen_id(t_hat[n - power]), 0, 1)
        coeff, rest = constraint.coefficient_of(leader)
        if not coeff.is_monomial():
            raise ContractViolation(f"constraint {power} is not solvable for its leader")
        rules.add(leader, (-rest).divide_monomial(coeff))
    return rules


def gauge_apply(c: MatrixConn, g: Matrix, g_inv: Matrix) -> MatrixConn:
    """
    A ↦ g⁻¹Ag + h g⁻¹ dg in both components.

    Raises:
        ValueError: g·g⁻¹ is not the identity
    """
    n = c.n
    if mat_mul(g, g_inv) != identity(n) or mat_mul(g_inv, g) != identity(n):
        raise ValueError("gauge inverse check failed")
    hh = h(1) * c.h_sign

    def transform(A: Matrix, dg: Matrix) -> Matrix:
        conj = mat_mul(mat_mul(g_inv, A), g)
        return mat_add(conj, mat_scale(mat_mul(g_inv, dg), hh))

    A1 = transform(c.A1, mat_map(g, lambda x: x.d()))
    A2 = transform(c.A2, mat_map(g, lambda x: x.dbar()))
    return MatrixConn(n=n, A1=A1, A2=A2, h_sign=c.h_sign)


def conjugate(F: Matrix, g: Matrix, g_inv: Matrix) -> Matrix:
    return mat_mul(mat_mul(g_inv, F), g)


def check_flat(c: MatrixConn) -> Tuple[bool, Matrix]:
    """(F == 0, F)."""
    F = curvature(c)
    ok = all(not x for row in F for x in row)
    if not ok:
        logger.info("connection n=%d is not flat on %s", c.n, support(F))
    return ok, F


def require_rank_one(c: MatrixConn) -> Matrix:
    """Curvature, raising when a 2×2 minor survives."""
    F = curvature(c)
    bad = rank_one_residuals(F)
    if bad:
        raise ContractViolation("curvature has rank above one", residual=bad[0])
    return F
