"""
Experimental: equations for the variation of the reparametrization
coefficients f_k^{(l)} under a Hamiltonian flow.

With t̂ = higher_order_t_table(n, order), the operator variation δt̂_k must be
reproduced by varying t_j (at the rate read off the h¹ grade of δt̂_j) and the
f_k^{(l)}. Grade l of that requirement is affine in δf_k^{(l)} with coefficient
−t_k; the remaining unknowns δf_j^{(l')} come from lower k or lower l, so the
equations are triangular. Only n = 2, 3 and l = 2, 3 are supported.
"""

import logging
from typing import Dict, List, NamedTuple, Optional

from ..diffalg import DerivedGen, DiffPoly, GeneratorId, fcoef, gen_id, generic, mu, t
from ..diffop import Convention, coefficient_deltas, hamiltonian_variation, lift_hamiltonian
from ..errors import ContractViolation
from ..phase import PhasePoly, hamiltonian
from .conformal import higher_order_t_table
from .frobenius import solved_system

logger = logging.getLogger(__name__)

SUPPORTED_RANKS = (2, 3)
SUPPORTED_GRADES = (2, 3)


class FcoefEquation(NamedTuple):
    """coefficient · δf_k^{(l)} = rhs."""

    k: int
    l: int  # noqa: E741
    coefficient: DiffPoly
    rhs: DiffPoly
    unknowns: List[str]


def variation_symbol(k: int, l: int) -> DiffPoly:  # noqa: E741
    """The unknown δf_k^{(l)}."""
    return generic(f"df{k}_{l}")


def fcoef_equations(
    n: int, order: int = 3, H: Optional[PhasePoly] = None
) -> List[FcoefEquation]:
    """
    Triangular equations for δf_k^{(l)}, k = 2..n, l = 2..order.

    Args:
        n: Rank (2 or 3)
        order: Highest grade (2 or 3)
        H: Hamiltonian (default Σ v_k p^{k−1})

    Returns:
        Equations ordered by (k, l)

    Raises:
        ValueError: n or order outside the supported range
        ContractViolation: a grade is not affine in its unknown
    """
    if n not in SUPPORTED_RANKS:
        raise ValueError(f"f-coefficient equations need n in {SUPPORTED_RANKS}")
    if order not in SUPPORTED_GRADES:
        raise ValueError(f"order must be one of {SUPPORTED_GRADES}")
    H = H if H is not None else hamiltonian(n)
    t_hat = higher_order_t_table(n, order)
    sys = solved_system(n, t_hat, {k: mu(k) for k in range(2, n + 1)}, Convention.CYCLIC_VECTOR)
    dP, dQ = hamiltonian_variation(lift_hamiltonian(H), sys)
    op_dt, _ = coefficient_deltas(dP, dQ, sys)
    op_dt_by_k = {k: op_dt[k - 2] for k in range(2, n + 1)}

    variations: Dict[GeneratorId, DiffPoly] = {
        gen_id(t(k)): op_dt_by_k[k].h_part(1) for k in range(2, n + 1)
    }
    for k in range(2, n + 1):
        for l in range(2, order + 1):  # noqa: E741
            variations[gen_id(fcoef(k, l))] = variation_symbol(k, l)

    unknown_labels = {
        gen_id(variation_symbol(k, l)).label
        for k in range(2, n + 1)
        for l in range(2, order + 1)  # noqa: E741
    }
    equations: List[FcoefEquation] = []
    for k in range(2, n + 1):
        mismatch = op_dt_by_k[k] - t_hat[k].linearize(variations)
        for l in range(2, order + 1):  # noqa: E741
            grade = mismatch.h_part(l)
            target = DerivedGen(gen_id(variation_symbol(k, l)))
            try:
                coeff, rest = grade.coefficient_of(target)
            except ValueError as exc:
                raise ContractViolation(f"grade {l} of t{k} is not affine: {exc}") from exc
            others = sorted(
                dg.base.label for dg in rest.generators() if dg.base.label in unknown_labels
            )
            equations.append(FcoefEquation(k, l, coeff, -rest, sorted(set(others))))
            logger.debug("f-coefficient equation k=%d l=%d with %d unknowns", k, l, len(others))
    logger.info("experimental f-coefficient system for n=%d: %d equations", n, len(equations))
    return equations
