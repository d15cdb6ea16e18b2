"""
Exponential ansatz ψ = exp(s/h).

Conjugation by e^{s/h} turns h∂ into h∂ + ∂s and h∂̄ into h∂̄ + ∂̄s; applied to
the constant 1 an operator becomes a polynomial in the jets of s. The phase may
be an h-series in several symbols, e.g. Σ h^{j/n} s_j.
"""

import logging
from fractions import Fraction
from typing import Dict, Optional, Tuple

from pydantic import BaseModel, ConfigDict, Field

from ..diffalg import DiffPoly, generic, h, poly_sum
from ..diffalg.poly import Scalar
from ..diffop import OpPoly, SystemSpec

logger = logging.getLogger(__name__)


def phase_symbol(i: Optional[int] = None) -> DiffPoly:
    """s for the integer ansatz, s_i for the coefficient of a fixed h-power."""
    return generic("s" if i is None else f"s{i}")


def rational_phase(n: int, top: int, start: int = 1) -> DiffPoly:
    """Σ_{j=start}^{top} h^{j/n} s_j."""
    return poly_sum(h(Fraction(j, n)) * phase_symbol(j) for j in range(start, top + 1))


class AnsatzExpansion(BaseModel):
    """e^{−s/h}·D·e^{s/h} applied to 1, as a polynomial in the jets of s."""

    model_config = ConfigDict(frozen=True, arbitrary_types_allowed=True)

    source: OpPoly = Field(description="Operator that was conjugated")
    phase: DiffPoly = Field(description="The phase s")
    truncation: Optional[Fraction] = Field(default=None, description="Largest kept h-exponent")
    equation: DiffPoly = Field(description="Resulting phase-function equation")

    def grade(self, q: Scalar) -> DiffPoly:
        """Coefficient of h^q."""
        return self.equation.h_part(q)


def exp_ansatz(
    D: OpPoly, truncation: Optional[Scalar] = None, phase: Optional[DiffPoly] = None
) -> AnsatzExpansion:
    """
    Conjugate D by e^{s/h} and apply it to 1.

    With W_{0,0} = 1, W_{0,b+1} = ∂̄s·W_{0,b} + h∂̄W_{0,b} and
    W_{a+1,b} = ∂s·W_{a,b} + h∂W_{a,b}, the result is Σ c_{a,b} W_{a,b}.

    Args:
        D: Operator with coefficients on the left
        truncation: Drop h-exponents above this value (None keeps everything)
        phase: The phase s (default: a single symbol s)

    Returns:
        AnsatzExpansion
    """
    phase = phase_symbol() if phase is None else DiffPoly.coerce(phase)
    cut = None if truncation is None else Fraction(truncation)
    S, Sbar = phase.d(), phase.dbar()

    def cap(x: DiffPoly) -> DiffPoly:
        return x.truncate_h(cut) if cut is not None else x

    W: Dict[Tuple[int, int], DiffPoly] = {(0, 0): DiffPoly.const(1)}

    def value(a: int, b: int) -> DiffPoly:
        if (a, b) in W:
            return W[(a, b)]
        if a == 0:
            prev = value(0, b - 1)
            out = cap(Sbar * prev + prev.dbar().shift_h(1))
        else:
            prev = value(a - 1, b)
            out = cap(S * prev + prev.d().shift_h(1))
        W[(a, b)] = out
        return out

    equation = poly_sum(cap(c * value(a, b)) for (a, b), c in D.items())
    logger.debug("ansatz truncated at %s: %d terms", cut, len(equation))
    return AnsatzExpansion(source=D, phase=phase, truncation=cut, equation=equation)


def flat_section_equations(
    sys: SystemSpec, truncation: Optional[Scalar] = None, phase: Optional[DiffPoly] = None
) -> Tuple[AnsatzExpansion, AnsatzExpansion]:
    """The ansatz applied to D₁ and D₂ of a system."""
    return exp_ansatz(sys.D1, truncation, phase), exp_ansatz(sys.D2, truncation, phase)
