"""
Scalar flat-section systems D₁ψ = D₂ψ = 0, their left ideal and the flatness
constraints.

Two sign conventions for the same connection are supported:

  flat_section:   D₁ = (h∂)ⁿ + Σ (−1)^{k−1} t̂_k (h∂)^{n−k},
                  D₂ = −h∂̄ + Σ (−1)^k μ̂_k (h∂)^{k−1}
  cyclic_vector:  D₁ = (h∂)ⁿ − Σ t̂_k (h∂)^{n−k},
                  D₂ = −h∂̄ + Σ μ̂_k (h∂)^{k−1}
"""

import logging
from enum import Enum
from typing import Dict, List, Optional

from pydantic import BaseModel, ConfigDict, Field

from ..diffalg import DiffPoly, h, mu, poly_sum, t
from ..errors import ContractViolation
from .ops import OpPoly, commutator, op_mul

logger = logging.getLogger(__name__)


class Convention(str, Enum):
    FLAT_SECTION = "flat_section"
    CYCLIC_VECTOR = "cyclic_vector"


def t_sign(convention: Convention, k: int) -> int:
    """Sign of t̂_k in P̂ = (h∂)ⁿ − D₁."""
    return (-1) ** k if convention == Convention.FLAT_SECTION else 1


def mu_sign(convention: Convention, k: int) -> int:
    """Sign of μ̂_k in Q̂ = h∂̄ + D₂."""
    return (-1) ** k if convention == Convention.FLAT_SECTION else 1


class SystemSpec(BaseModel):
    """The pair (D₁, D₂) together with the tables it was built from."""

    model_config = ConfigDict(frozen=True, arbitrary_types_allowed=True)

    n: int = Field(ge=2, description="Rank")
    convention: Convention = Field(default=Convention.FLAT_SECTION, description="Sign convention")
    t_hat: Dict[int, DiffPoly] = Field(description="t̂_k, k = 2..n")
    mu_hat: Dict[int, DiffPoly] = Field(description="μ̂_k, k = 1..n")
    D1: OpPoly = Field(description="(h∂)ⁿ + lower terms")
    D2: OpPoly = Field(description="−h∂̄ + Q̂")

    @property
    def P_hat(self) -> OpPoly:
        """(h∂)ⁿ − D₁, the replacement for (h∂)ⁿ."""
        return OpPoly.D(self.n) - self.D1

    @property
    def Q_hat(self) -> OpPoly:
        """h∂̄ + D₂, the replacement for h∂̄."""
        return OpPoly.Dbar() + self.D2

    @classmethod
    def generic(cls, n: int, convention: Convention = Convention.FLAT_SECTION) -> "SystemSpec":
        """h-free system with t̂_k = t_k and μ̂_k = μ_k (μ₁ free)."""
        return system_from_tables(
            n,
            {k: t(k) for k in range(2, n + 1)},
            {k: mu(k) for k in range(1, n + 1)},
            convention,
        )


def default_tables(n: int, order: int, shifted: bool = True) -> Dict[str, Dict[int, DiffPoly]]:
    """
    h-series tables of generators.

    shifted:   t̂_k = Σ_{i=0}^{order−1} h^{i+1} t_k^{(i)}
    unshifted: t̂_k = Σ_{i=0}^{order} h^i t_k^{(i)}
    μ̂_k = Σ_{i=0}^{order} h^i μ_k^{(i)} for k ≥ 2.
    """
    if order < 0:
        raise ValueError("order must be non-negative")
    if shifted:
        t_hat = {
            k: poly_sum(h(i + 1) * t(k, i) for i in range(max(order, 1))) for k in range(2, n + 1)
        }
    else:
        t_hat = {k: poly_sum(h(i) * t(k, i) for i in range(order + 1)) for k in range(2, n + 1)}
    mu_hat = {k: poly_sum(h(i) * mu(k, i) for i in range(order + 1)) for k in range(2, n + 1)}
    return {"t": t_hat, "mu": mu_hat}


def system_from_tables(
    n: int,
    t_hat: Dict[int, DiffPoly],
    mu_hat: Dict[int, DiffPoly],
    convention: Convention = Convention.FLAT_SECTION,
) -> SystemSpec:
    """
    Assemble D₁, D₂ from coefficient tables.

    Args:
        n: Rank
        t_hat: t̂_k for k = 2..n (missing entries are zero)
        mu_hat: μ̂_k for k = 1..n (μ̂₁ may be a symbol or already solved)
        convention: Sign convention

    Returns:
        SystemSpec
    """
    convention = Convention(convention)
    D1 = OpPoly.D(n) - OpPoly.from_d_coefficients(
        {n - k: t_hat.get(k, DiffPoly.zero()) * t_sign(convention, k) for k in range(2, n + 1)}
    )
    D2 = -OpPoly.Dbar() + OpPoly.from_d_coefficients(
        {k - 1: mu_hat.get(k, DiffPoly.zero()) * mu_sign(convention, k) for k in range(1, n + 1)}
    )
    return SystemSpec(
        n=n,
        convention=convention,
        t_hat={k: t_hat.get(k, DiffPoly.zero()) for k in range(2, n + 1)},
        mu_hat={k: mu_hat.get(k, DiffPoly.zero()) for k in range(1, n + 1)},
        D1=D1,
        D2=D2,
    )


def reduce_left_ideal(x: OpPoly, sys: SystemSpec, max_steps: int = 100000) -> OpPoly:
    """
    Normal form modulo the left ideal ⟨D₁, D₂⟩.

    Terms with h∂̄ are reduced first (rightmost h∂̄ ↦ Q̂), then (h∂)^m for
    m ≥ n (rightmost (h∂)ⁿ ↦ P̂). The (dbarDeg, dDeg) measure decreases.
    """
    n = sys.n
    P_hat, Q_hat = sys.P_hat, sys.Q_hat
    terms: Dict[tuple, DiffPoly] = dict(x.items())
    steps = 0
    while True:
        pending = [deg for deg in terms if deg[1] >= 1 or deg[0] >= n]
        if not pending:
            break
        a, b = max(pending, key=lambda deg: (deg[1], deg[0]))
        c = terms.pop((a, b))
        if b >= 1:
            rest = op_mul(OpPoly({(a, b - 1): c}), Q_hat)
        else:
            rest = op_mul(OpPoly({(a - n, 0): c}), P_hat)
        for deg, v in rest.items():
            nv = terms[deg] + v if deg in terms else v
            if nv:
                terms[deg] = nv
            else:
                terms.pop(deg, None)
        steps += 1
        if steps > max_steps:
            raise ContractViolation("left-ideal reduction did not terminate")
    return OpPoly(terms)


def flatness_constraints(sys: SystemSpec) -> List[DiffPoly]:
    """
    Coefficients of (h∂)^k, k = 0..n−2, of [D₁, D₂] reduced modulo the ideal.

    Raises:
        ContractViolation: the (h∂)^{n−1} coefficient does not vanish (μ̂₁ wrong)
    """
    reduced = reduce_left_ideal(commutator(sys.D1, sys.D2), sys)
    top = reduced.coeff(sys.n - 1)
    if top:
        raise ContractViolation("nonzero (h d)^(n-1) coefficient; is mu1 eliminated?", residual=top)
    constraints = [reduced.coeff(k) for k in range(sys.n - 1)]
    logger.debug("flatness n=%d: %d constraints", sys.n, len(constraints))
    return constraints


def at_h_one(x: DiffPoly) -> DiffPoly:
    """Forget the h-grading (evaluate h = 1)."""
    return poly_sum(x.h_parts().values())


def coefficient_deltas(dP: OpPoly, dQ: OpPoly, sys: SystemSpec, grade: Optional[int] = None):
    """
    (δt̂_k for k = 2..n, δμ̂_k for k = 1..n) from variations of P̂ and Q̂,
    optionally restricted to one h-grade.
    """
    n = sys.n

    def pick(c: DiffPoly) -> DiffPoly:
        return c if grade is None else c.h_part(grade)

    dt = [pick(dP.coeff(n - k)) * t_sign(sys.convention, k) for k in range(2, n + 1)]
    dmu = [pick(dQ.coeff(k - 1)) * mu_sign(sys.convention, k) for k in range(1, n + 1)]
    return dt, dmu
