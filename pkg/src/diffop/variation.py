"""
Principal symbols and Hamiltonian variations of the operator system, with the
semiclassical comparison against the Poisson-bracket variation.
"""

import logging
from typing import List, Tuple

from ..diffalg import DiffPoly
from ..errors import ContractViolation, LocalizationError
from ..phase import PhasePoly, SpectralIdeal, phase_to_text, poisson_bracket
from ..reports import SemiclassicalReport
from .ops import OpPoly, commutator
from .system import SystemSpec, coefficient_deltas, mu_sign, reduce_left_ideal, t_sign

logger = logging.getLogger(__name__)


def principal_symbol(x: OpPoly) -> PhasePoly:
    """(h∂)^a (h∂̄)^b ↦ p^a p̄^b, coefficients unchanged."""
    return PhasePoly(dict(x.items()))


def lift_hamiltonian(H: PhasePoly) -> OpPoly:
    """p ↦ h∂ with coefficients on the left."""
    if H.pbar_degree > 0:
        raise ValueError("Hamiltonian must not contain pbar")
    return OpPoly(dict(H.items()))


def _divide_h(x: OpPoly, what: str) -> OpPoly:
    try:
        return x.divide_h()
    except LocalizationError as exc:
        raise ContractViolation(f"{what} is not divisible by h: {x}", residual=x) from exc


def hamiltonian_variation(H: OpPoly, sys: SystemSpec) -> Tuple[OpPoly, OpPoly]:
    """
    δP̂ = (1/h) [Ĥ, −D₁] and δQ̂ = (1/h) [Ĥ, D₂], reduced modulo the left ideal.

    Args:
        H: v₁ + v₂(h∂) + … + v_n(h∂)^{n−1}
        sys: The operator system

    Returns:
        (δP̂, δQ̂), both in normal form

    Raises:
        ValueError: H contains h∂̄ or has (h∂)-degree ≥ n
        ContractViolation: a reduced commutator is not divisible by h
    """
    if H.dbar_degree > 0:
        raise ValueError("Hamiltonian must not contain Dbar")
    if H.d_degree >= sys.n:
        raise ValueError(f"Hamiltonian must have D-degree below {sys.n}")
    dP = _divide_h(reduce_left_ideal(commutator(H, -sys.D1), sys), "[H, -D1]")
    dQ = _divide_h(reduce_left_ideal(commutator(H, sys.D2), sys), "[H, D2]")
    return dP, dQ


def symbol_ideal(sys: SystemSpec) -> SpectralIdeal:
    """The commutative ideal of the h⁰ principal symbols of P̂ and Q̂."""
    P = principal_symbol(sys.P_hat).map_coefficients(lambda c: c.h_part(0))
    Q = principal_symbol(sys.Q_hat).map_coefficients(lambda c: c.h_part(0))
    return SpectralIdeal(sys.n, P, Q)


def phase_variation(H: PhasePoly, sys: SystemSpec) -> Tuple[List[DiffPoly], List[DiffPoly]]:
    """Poisson-bracket deltas (δt_k, δμ_k) on the symbol ideal of sys."""
    ideal = symbol_ideal(sys)
    f, g = ideal.generators
    dP = ideal.reduce(poisson_bracket(H, f))
    dQ = ideal.reduce(poisson_bracket(H, g))
    n = sys.n
    dt = [dP.coeff(n - k) * t_sign(sys.convention, k) for k in range(2, n + 1)]
    dmu = [dQ.coeff(k - 1) * mu_sign(sys.convention, k) for k in range(1, n + 1)]
    return dt, dmu


def semiclassical_compare(H: PhasePoly, sys: SystemSpec) -> SemiclassicalReport:
    """
    Check that the h⁰ grade of the operator variation equals the Poisson variation.

    Failure is reported, not raised.
    """
    op_dP, op_dQ = hamiltonian_variation(lift_hamiltonian(H), sys)
    op_dt, op_dmu = coefficient_deltas(op_dP, op_dQ, sys, grade=0)
    ph_dt, ph_dmu = phase_variation(H, sys)
    ph_dt = [c.h_part(0) for c in ph_dt]
    ph_dmu = [c.h_part(0) for c in ph_dmu]
    residuals = [a - b for a, b in zip(op_dt + op_dmu, ph_dt + ph_dmu) if a != b]
    passed = not residuals
    logger.info("semiclassical n=%d H=%s: %s", sys.n, phase_to_text(H), passed)
    return SemiclassicalReport(
        passed=passed,
        n=sys.n,
        hamiltonian=phase_to_text(H),
        phase_delta_t=ph_dt,
        phase_delta_mu=ph_dmu,
        op_delta_t=op_dt,
        op_delta_mu=op_dmu,
        residuals=residuals,
    )
