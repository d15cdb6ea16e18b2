"""
Integer-power WKB, s = s₀ + h s₁ + h² s₂ + …

Kept for comparison with the rational expansion: the Schrödinger recursion, the
mixed n = 3 condition produced by an unshifted t̂, and the obstruction t = 0
that a shifted t̂ forces on the integer ansatz.
"""

import logging
from fractions import Fraction
from math import isqrt
from typing import List, Mapping, Optional, Sequence, Union

from ..connection import solved_system
from ..diffalg import (
    DerivativeRules,
    DerivedGen,
    DiffPoly,
    GenKind,
    GeneratorId,
    RootAdjunction,
    gen_id,
    generic,
    get_registry,
    h,
    make_gen,
    mu,
    poly_sum,
    t,
)
from ..diffop import Convention, default_tables
from ..errors import ContractViolation, LocalizationError, NonGenericError
from .ansatz import flat_section_equations, phase_symbol

logger = logging.getLogger(__name__)

TSeries = Union[Sequence[DiffPoly], Mapping[int, DiffPoly]]


def sqrt_symbol() -> DiffPoly:
    """σ, a formal square root of t."""
    return make_gen(GenKind.GENERIC, (), weight=(1, 0), name="sigma", invertible=True)


def _rational_sqrt(q: Fraction) -> Optional[Fraction]:
    if q < 0:
        return None
    a, b = isqrt(q.numerator), isqrt(q.denominator)
    if a * a == q.numerator and b * b == q.denominator:
        return Fraction(a, b)
    return None


def classic_recursion(t_series: TSeries, depth: int, branch: int = 1) -> List[DiffPoly]:
    """
    ∂s_i for D = h²∂² − t̂ with t̂ = Σ h^i t^{(i)}.

    ∂s₀ = ±σ with σ² = t^{(0)}, then
    2∂s₀∂s_i + Σ_{k=1}^{i−1} ∂s_k∂s_{i−k} + ∂²s_{i−1} − t^{(i)} = 0.

    Args:
        t_series: t^{(i)} by order i (list or mapping)
        depth: Last order i to solve
        branch: Sign of ∂s₀

    Returns:
        [∂s₀, …, ∂s_depth]

    Raises:
        ValueError: depth < 0 or branch not ±1
        NonGenericError: t^{(0)} vanishes
        LocalizationError: t^{(0)} is not an invertible monomial; for t_n the
            caller declares the rank first (`reset_registry(n)`)
    """
    if depth < 0:
        raise ValueError("depth must be non-negative")
    if branch not in (1, -1):
        raise ValueError("branch must be +1 or -1")
    items = t_series.items() if isinstance(t_series, Mapping) else enumerate(t_series)
    series = {i: DiffPoly.coerce(v) for i, v in items}
    t0 = series.get(0, DiffPoly.zero())
    if t0.is_zero():
        raise NonGenericError("the constant term of t-hat has to be non-zero")

    rules = DerivativeRules()
    root = _rational_sqrt(t0.constant_value()) if t0.is_constant() else None
    if root is not None:
        ds0 = DiffPoly.const(root * branch)
    else:
        if not t0.is_monomial():
            raise LocalizationError("sqrt(t) needs t to be a single invertible monomial")
        registry = get_registry()
        for dg in t0.generators():
            registry.check_inverse(dg)
        sigma = sqrt_symbol()
        rules.add_root(RootAdjunction(gen_id(sigma), 2, t0))
        ds0 = sigma.scale(branch)

    inv = rules.normalize(ds0.scale(2).inverse())
    out = [ds0]
    for i in range(1, depth + 1):
        cross = poly_sum(out[k] * out[i - k] for k in range(1, i))
        rhs = series.get(i, DiffPoly.zero()) - cross - out[i - 1].d()
        out.append(rules.normalize(rhs * inv))
        logger.debug("classic WKB order %d: %d terms", i, len(out[-1]))
    return out


def _zero_jets(x: DiffPoly, base: GeneratorId) -> DiffPoly:
    """Set every derivative of a phase symbol to zero (the symbol is constant)."""
    return x.replace_factors(
        lambda dg: DiffPoly.zero() if dg.base == base and (dg.a or dg.b) else None
    )


def integer_ansatz_shifted_n2() -> DiffPoly:
    """
    Integer ansatz for n = 2 with t̂ = ht + h²t^{(1)}.

    Grade h⁰ forces ∂s₀ = ∂̄s₀ = 0; grade h¹ is then free of s and reads −t.

    Returns:
        The obstruction t (the ansatz requires t = 0)
    """
    tables = default_tables(2, 2)
    sys = solved_system(2, tables["t"], tables["mu"], Convention.FLAT_SECTION)
    s0, s1 = phase_symbol(0), phase_symbol(1)
    E1, E2 = flat_section_equations(sys, 1, s0 + h(1) * s1)
    base0 = gen_id(s0)
    if E1.grade(0) != DiffPoly.of(DerivedGen(base0, 1, 0), 2):
        raise ContractViolation(
            "grade 0 of the first equation is not (ds0)^2", residual=E1.grade(0)
        )
    second = E2.grade(0).replace_factors(
        lambda dg: DiffPoly.zero() if dg.base == base0 and dg.a else None
    )
    if second != -DiffPoly.of(DerivedGen(base0, 0, 1)):
        raise ContractViolation("grade 0 of the second equation is not -dbar s0", residual=second)
    obstruction = _zero_jets(E1.grade(1), base0)
    if obstruction.mentions(gen_id(s1)):
        raise ContractViolation("grade 1 still depends on s1", residual=obstruction)
    logger.info("integer ansatz with shifted t: obstruction %s", obstruction)
    return -obstruction


def _reduce_monic(x: DiffPoly, var: DerivedGen, P: DiffPoly, degree: int) -> DiffPoly:
    """Remainder of x modulo the monic polynomial P of the given degree in var."""
    tail = DiffPoly.of(var, degree) - P
    for _ in range(64):
        high = x.map_terms(lambda m: m.exponent_of(var) >= degree)
        if not high:
            return x
        low = x - high
        parts = []
        for m, c in high.items():
            e = m.exponent_of(var)
            parts.append(DiffPoly({m.without(var): c}) * DiffPoly.of(var, e - degree) * tail)
        x = low + poly_sum(parts)
    raise ContractViolation("polynomial remainder did not terminate", residual=x)


def unshifted_compat_n3() -> DiffPoly:
    """
    Compatibility of the h⁰ grade for n = 3 with t̂_k = t_k + O(h).

    With x = ∂s₀ the system reads P(x) = x³ − t₂x + t₃ = 0 and ∂̄s₀ = Q(x). The
    cross derivative ∂̄x − ∂Q(x), multiplied by P'(x) and reduced modulo P, mixes
    two conditions and keeps a term quadratic in t₂.

    Returns:
        The condition, normalized so that ∂̄t₃ has coefficient 1; x appears as ds0
    """
    sys = solved_system(3, {2: t(2), 3: t(3)}, {2: mu(2), 3: mu(3)}, Convention.FLAT_SECTION)
    s0 = phase_symbol(0)
    base0 = gen_id(s0)
    E1, E2 = flat_section_equations(sys, 0, s0)
    x = generic("ds0")
    xg = DerivedGen(gen_id(x))

    def to_x(e: DiffPoly) -> DiffPoly:
        return e.replace_factors(
            lambda dg: x if dg.base == base0 and (dg.a, dg.b) == (1, 0) else None
        )

    P = to_x(E1.grade(0))
    try:
        coeff, Q = E2.grade(0).coefficient_of(DerivedGen(base0, 0, 1))
    except ValueError as exc:
        raise ContractViolation(f"second equation is not affine in dbar s0: {exc}") from exc
    if coeff != -1:
        raise ContractViolation("dbar s0 does not enter with coefficient -1", residual=coeff)
    Q = to_x(Q)
    if P.mentions(base0) or Q.mentions(base0):
        raise ContractViolation("higher jets of s0 at grade 0")

    Px, P_dbar = P.dbar().coefficient_of(xg.dbar())
    _, P_d = P.d().coefficient_of(xg.d())
    Qx, Q_d = Q.d().coefficient_of(xg.d())
    compat = _reduce_monic(-P_dbar - Px * Q_d + Qx * P_d, xg, P, 3)
    lead, _ = compat.coefficient_of(DerivedGen(gen_id(t(3)), 0, 1))
    if not lead.is_constant() or lead.is_zero():
        raise ContractViolation("coefficient of dbar t3 is not a nonzero constant", residual=lead)
    result = compat.scale(1 / lead.constant_value())
    logger.info("unshifted n=3 compatibility: %d terms", len(result))
    return result
