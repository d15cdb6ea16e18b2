"""
Holomorphic coordinate changes z ↦ w(z) acting on the scalar operator D₁.

The jet w_i = ∂ⁱw is symbolic (w₁ invertible). In the new coordinate the
operator is written in D = h∂_w, which acts on coefficients through the
derivation δ = w₁⁻¹∂; h∂_z = w₁·D.
"""

import logging
from fractions import Fraction
from math import comb
from typing import Dict, Optional

from ..diffalg import DerivativeRules, DerivedGen, DiffPoly, gen_id, h, jet
from ..diffop import default_tables
from ..errors import ContractViolation, NonGenericError
from ..reports import TransformReport
from .frobenius import Table

logger = logging.getLogger(__name__)

DPoly = Dict[int, DiffPoly]


def schwarzian(
    w1: Optional[DiffPoly] = None,
    w2: Optional[DiffPoly] = None,
    w3: Optional[DiffPoly] = None,
) -> DiffPoly:
    """
    S = w₃/w₁ − (3/2)(w₂/w₁)².

    Missing jet entries default to the symbolic jet generators.

    Raises:
        NonGenericError: w₁ is zero
    """
    w1 = jet(1) if w1 is None else DiffPoly.coerce(w1)
    w2 = jet(2) if w2 is None else DiffPoly.coerce(w2)
    w3 = jet(3) if w3 is None else DiffPoly.coerce(w3)
    if w1.is_zero():
        raise NonGenericError("w1 vanishes; the coordinate change is not invertible")
    inv = w1.inverse()
    return w3 * inv - Fraction(3, 2) * w2 * w2 * inv * inv


class JetCalculus:
    """Operators in D = h∂_w with coefficients in z, for a symbolic jet of w."""

    def __init__(self, depth: int):
        self.depth = depth
        self.rules = DerivativeRules()
        for i in range(1, depth + 1):
            wi = gen_id(jet(i))
            self.rules.add(DerivedGen(wi, 1, 0), jet(i + 1))
            self.rules.add(DerivedGen(wi, 0, 1), DiffPoly.zero())
        self.w1_inv = jet(1).inverse()

    def delta(self, c: DiffPoly) -> DiffPoly:
        """∂_w on coefficients."""
        return self.w1_inv * self.rules.normalize(c.d())

    def mul(self, x: DPoly, y: DPoly) -> DPoly:
        """Product with D·c = c·D + h·δ(c)."""
        out: DPoly = {}
        for a, cx in x.items():
            for b, cy in y.items():
                deriv = cy
                for i in range(a + 1):
                    if i:
                        deriv = self.delta(deriv)
                    if not deriv:
                        break
                    term = (cx * deriv).shift_h(i).scale(comb(a, i))
                    deg = a - i + b
                    out[deg] = out[deg] + term if deg in out else term
        return {k: v for k, v in out.items() if v}

    def power(self, x: DPoly, m: int) -> DPoly:
        out: DPoly = {0: DiffPoly.const(1)}
        for _ in range(m):
            out = self.mul(out, x)
        return out


def transform_operator(n: int, t_hat: Table, depth: Optional[int] = None) -> Table:
    """
    t̂_k in the w coordinate.

    D₁ = (h∂_z)ⁿ + Σ (−1)^{k−1} t̂_k (h∂_z)^{n−k} is rewritten in D, divided by
    w₁ⁿ on the left and conjugated by D ↦ D + G with G = −a/n, where a is the
    coefficient of D^{n−1}. t̂_k(w) is (−1)^{k−1} times the coefficient of D^{n−k}.
    """
    calc = JetCalculus(depth if depth is not None else 2 * n + 2)
    chain = {1: jet(1)}
    op: DPoly = calc.power(chain, n)
    for k in range(2, n + 1):
        coeff = DiffPoly.coerce(t_hat.get(k, DiffPoly.zero())).scale((-1) ** (k - 1))
        if not coeff:
            continue
        for deg, c in calc.power(chain, n - k).items():
            term = coeff * c
            op[deg] = op[deg] + term if deg in op else term
    scale = calc.w1_inv**n
    op = {deg: scale * c for deg, c in op.items()}
    if op.get(n) != 1:
        raise ContractViolation("leading coefficient did not normalize to 1")
    a = op.get(n - 1, DiffPoly.zero())
    shifted: DPoly = {1: DiffPoly.const(1), 0: a.scale(Fraction(-1, n))}
    conj: DPoly = {}
    for deg, c in op.items():
        for e, v in calc.mul({0: c}, calc.power(shifted, deg)).items():
            conj[e] = conj[e] + v if e in conj else v
    if conj.get(n - 1):
        raise ContractViolation("D^(n-1) term survived the conjugation", residual=conj[n - 1])
    return {k: conj.get(n - k, DiffPoly.zero()).scale((-1) ** (k - 1)) for k in range(2, n + 1)}


def check_jet(values: Dict[int, DiffPoly]) -> None:
    """
    Validate a concrete jet before it replaces the symbolic one.

    Raises:
        ValueError: w₁ is missing
        NonGenericError: w₁ is zero
        LocalizationError: w₁ is not an invertible monomial
    """
    if 1 not in values:
        raise ValueError("the jet must supply w1")
    w1 = DiffPoly.coerce(values[1])
    if w1.is_zero():
        raise NonGenericError("w1 vanishes; the coordinate change is not invertible")
    w1.inverse()


def substitute_jet(x: DiffPoly, values: Dict[int, DiffPoly]) -> DiffPoly:
    """Evaluate jet generators; values[1], when given, must be an invertible monomial."""
    if 1 in values:
        check_jet(values)
    for i, v in sorted(values.items()):
        x = x.substitute(gen_id(jet(i)), DiffPoly.coerce(v))
    return x


def identity_jet(depth: int) -> Dict[int, DiffPoly]:
    """The jet of w = z."""
    return {i: DiffPoly.const(1 if i == 1 else 0) for i in range(1, depth + 2)}


def transform_lowest_order(
    n: int,
    k: int,
    t_hat: Optional[Table] = None,
    jet_values: Optional[Dict[int, DiffPoly]] = None,
) -> TransformReport:
    """
    Check that the h¹ grade of t̂_k transforms as a (k, 0) tensor; for n = 2 also
    check t̂(w) = w₁⁻²(t̂(z) + ½h²S).

    Args:
        n: Rank
        k: Coefficient index, 2 ≤ k ≤ n
        t_hat: t̂ table in z (default: shifted two-term h-series)
        jet_values: Concrete jet w_i to evaluate at; omitted entries stay symbolic

    Returns:
        TransformReport

    Raises:
        ValueError: k out of range, or jet_values without w₁
        NonGenericError: w₁ is zero
        LocalizationError: w₁ is not an invertible monomial
    """
    if not 2 <= k <= n:
        raise ValueError(f"k must lie in 2..{n}")
    if jet_values is not None:
        check_jet(jet_values)
    if t_hat is None:
        t_hat = default_tables(n, 2)["t"]
    new = transform_operator(n, t_hat)
    w1_inv = jet(1).inverse()

    def evaluate(x: DiffPoly) -> DiffPoly:
        return x if jet_values is None else substitute_jet(x, jet_values)

    lowest = evaluate(new[k].h_part(1))
    expected = evaluate((w1_inv**k) * DiffPoly.coerce(t_hat.get(k, DiffPoly.zero())).h_part(1))
    passed = lowest == expected
    residual = None
    if n == 2:
        rule = w1_inv * w1_inv * (t_hat[2] + Fraction(1, 2) * h(2) * schwarzian())
        residual = evaluate(new[2] - rule)
        passed = passed and residual.is_zero()
    logger.info("coordinate change n=%d k=%d: %s", n, k, passed)
    return TransformReport(
        passed=passed,
        n=n,
        k=k,
        lowest_grade=lowest,
        expected=expected,
        full_rule_checked=n == 2,
        full_rule_residual=residual,
    )
