"""
Conditions (𝒞) on the pairs (t_k, μ_k): the literal formula, the route through
the Poisson bracket of the spectral ideal, and Hamiltonian variations of (P, Q).
"""

import logging
from typing import List, NamedTuple, Tuple

from ..diffalg import DerivedGen, DiffPoly, GenKind, gen_id, h, ham, mu, t
from ..errors import ContractViolation
from .ideal import SpectralIdealSpec, SpectralVariant, spectral_ideal
from .polys import PhasePoly, poisson_bracket

logger = logging.getLogger(__name__)


def condition_C(n: int, k: int) -> DiffPoly:
    """
    (−∂̄ + μ₂∂ + k∂μ₂)t_k + Σ_{l=1}^{n−k} ((l+k)∂μ_{l+2} + (l+1)μ_{l+2}∂) t_{k+l}.
    """
    tk = t(k)
    out = -tk.dbar() + mu(2) * tk.d() + k * mu(2).d() * tk
    for l in range(1, n - k + 1):  # noqa: E741
        tkl = t(k + l)
        out = out + (l + k) * mu(l + 2).d() * tkl + (l + 1) * mu(l + 2) * tkl.d()
    return out


def conditions_C(n: int) -> List[DiffPoly]:
    """Conditions (𝒞), indexed k = 2..n."""
    if n < 2:
        raise ValueError("rank must be at least 2")
    return [condition_C(n, k) for k in range(2, n + 1)]


def strip_unit(expr: DiffPoly, k: int) -> Tuple[DiffPoly, DiffPoly]:
    """
    Divide expr by the monomial that makes the coefficient of ∂̄t_k equal to −1.

    Returns:
        (normalized expression, removed unit)
    """
    anchor = DerivedGen(gen_id(t(k)), 0, 1)
    coeff, _ = expr.coefficient_of(anchor)
    if not coeff.is_monomial():
        raise ContractViolation(f"coefficient of dbar t{k} is not a unit", residual=coeff)
    unit = -coeff
    return expr.divide_monomial(unit), unit


class BracketRoute(NamedTuple):
    conditions: List[DiffPoly]
    units: List[DiffPoly]
    dropped_top: DiffPoly


def _signed(x: DiffPoly, n: int) -> DiffPoly:
    """t_k ↦ (−1)^{k−1} t_k, μ_k ↦ (−1)^k μ_k."""
    for k in range(2, n + 1):
        if k % 2:
            x = x.substitute(gen_id(mu(k)), -mu(k))
        else:
            x = x.substitute(gen_id(t(k)), -t(k))
    return x


def bracket_route(
    n: int, variant: SpectralVariant = SpectralVariant.SIGNED, sign: int = 1
) -> BracketRoute:
    """
    {−pⁿ + P, −p̄ + Q} reduced modulo I and modulo t², one condition per p^{n−k}.

    Args:
        n: Rank
        variant: SIGNED (h-weighted, alternating signs) or PLAIN (μ₁ from its formula)
        sign: Bracket orientation

    Returns:
        BracketRoute with unit-normalized conditions, the stripped units and the
        coefficient of p^{n−1}, which carries no condition
    """
    spec = SpectralIdealSpec(n=n, variant=variant)
    ideal = spectral_ideal(spec)
    f, g = ideal.generators
    reduced = ideal.reduce(poisson_bracket(f, g, sign))
    coeffs = [c.mod_t_squared() for c in reduced.p_coefficients(n)]
    if variant == SpectralVariant.SIGNED:
        coeffs = [_signed(c, n) for c in coeffs]
    conditions, units = [], []
    for k in range(2, n + 1):
        cond, unit = strip_unit(coeffs[n - k], k)
        conditions.append(cond)
        units.append(unit)
    top = coeffs[n - 1]
    logger.debug("bracket route n=%d: top coefficient has %d terms", n, len(top))
    return BracketRoute(conditions, units, top)


def conditions_via_bracket(n: int) -> List[DiffPoly]:
    """Conditions (𝒞) recovered from the Poisson bracket, k = 2..n."""
    return bracket_route(n).conditions


def hamiltonian(n: int) -> PhasePoly:
    """Generic H = v₁ + v₂p + … + v_np^{n−1}."""
    return PhasePoly.from_p_coefficients({k - 1: ham(k) for k in range(1, n + 1)})


def vary_hamiltonian(
    H: PhasePoly, spec: SpectralIdealSpec, sign: int = 1
) -> Tuple[PhasePoly, PhasePoly]:
    """
    δP = {H, −pⁿ + P} mod I and δQ = {H, −p̄ + Q} mod I.

    Raises:
        ValueError: H contains p̄ or has p-degree ≥ n
    """
    if H.pbar_degree > 0:
        raise ValueError("Hamiltonian must not contain pbar")
    if H.p_degree >= spec.n:
        raise ValueError(f"Hamiltonian must have p-degree below {spec.n}")
    ideal = spectral_ideal(spec)
    f, g = ideal.generators
    dP = ideal.reduce(poisson_bracket(H, f, sign))
    dQ = ideal.reduce(poisson_bracket(H, g, sign))
    return dP, dQ


def variation_coefficients(
    dP: PhasePoly, dQ: PhasePoly, spec: SpectralIdealSpec
) -> Tuple[List[DiffPoly], List[DiffPoly]]:
    """
    Read (δt_k for k = 2..n, δμ_k for k = 1..n) off a variation of (P, Q).

    In the SIGNED variant the h-weight and signs of P, Q are divided out.
    """
    n = spec.n
    if spec.variant == SpectralVariant.PLAIN:
        dt = [dP.coeff(n - k) for k in range(2, n + 1)]
        dmu = [dQ.coeff(k - 1) for k in range(1, n + 1)]
        return dt, dmu
    dt = [dP.coeff(n - k).divide_monomial(h(1)) * (-1) ** k for k in range(2, n + 1)]
    dmu = [dQ.coeff(k - 1) * (-1) ** k for k in range(1, n + 1)]
    return dt, dmu


def mu_free(x: DiffPoly) -> DiffPoly:
    """Set every μ_k to zero."""
    return x.map_terms(lambda m: all(g.base.kind != GenKind.MU for g, _ in m.factors))
