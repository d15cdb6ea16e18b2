"""
Spectral ideals I = ⟨−pⁿ + P(p), −p̄ + Q(p)⟩ and reduction modulo I.
"""

import logging
from enum import Enum
from fractions import Fraction
from typing import Dict, List, Literal, Tuple

from pydantic import BaseModel, ConfigDict, Field

from ..diffalg import DiffPoly, h, mu, poly_sum, t
from ..errors import ContractViolation
from .polys import PhasePoly

logger = logging.getLogger(__name__)


class SpectralVariant(str, Enum):
    """Shape of P and Q."""

    PLAIN = "plain"  # P = t₂p^{n-2} + … + t_n, Q = μ₁ + μ₂p + … + μ_np^{n-1}
    SIGNED = "signed"  # P = Σ (−1)^k h t_k p^{n-k}, Q = Σ (−1)^k μ_k p^{k-1}


class Mu1Mode(str, Enum):
    FORMULA = "formula"
    SYMBOL = "symbol"


class SpectralIdealSpec(BaseModel):
    """Value object selecting a spectral ideal."""

    model_config = ConfigDict(frozen=True)

    n: int = Field(ge=2, description="Rank")
    variant: SpectralVariant = Field(default=SpectralVariant.PLAIN, description="Shape of P, Q")
    mu1_mode: Mu1Mode = Field(default=Mu1Mode.FORMULA, description="How μ₁ enters Q (PLAIN)")


class SpectralIdeal:
    """
    The ideal ⟨−pⁿ + P, −p̄ + Q⟩ for p̄-free P, Q of p-degree < n.

    Built either from a SpectralIdealSpec or directly from principal symbols.
    """

    def __init__(self, n: int, P: PhasePoly, Q: PhasePoly):
        if P.pbar_degree > 0 or Q.pbar_degree > 0:
            raise ValueError("P and Q must not contain p̄")
        if P.p_degree >= n or Q.p_degree >= n:
            raise ValueError("P and Q must have p-degree below n")
        self.n = n
        self.P = P
        self.Q = Q

    @property
    def generators(self) -> Tuple[PhasePoly, PhasePoly]:
        return -PhasePoly.p(self.n) + self.P, -PhasePoly.pbar() + self.Q

    def _reduce_p(self, coeffs: Dict[int, DiffPoly]) -> Dict[int, DiffPoly]:
        n = self.n
        P = [self.P.coeff(i) for i in range(n)]
        top = max(coeffs, default=-1)
        for m in range(top, n - 1, -1):
            c = coeffs.pop(m, None)
            if not c:
                continue
            for i, pc in enumerate(P):
                if pc:
                    k = m - n + i
                    coeffs[k] = coeffs[k] + c * pc if k in coeffs else c * pc
        return {k: v for k, v in coeffs.items() if v}

    def reduce(
        self, f: PhasePoly, order: Literal["pbar_first", "p_first"] = "pbar_first"
    ) -> PhasePoly:
        """
        Normal form modulo I: p̄ → Q, then pⁿ → P until the p-degree is below n.

        `p_first` rewrites high p-powers before eliminating p̄; both orders give
        the same normal form.
        """
        if order == "p_first":
            f = self._reduce_p_only(f)
        Q_powers: List[PhasePoly] = [PhasePoly.const(1)]
        coeffs: Dict[int, DiffPoly] = {}
        for (i, j), c in f.items():
            while len(Q_powers) <= j:
                nxt = Q_powers[-1] * self.Q
                Q_powers.append(self._reduce_p_only(nxt))
            for (qi, _), qc in (Q_powers[j] * PhasePoly.p(i)).items():
                prod = c * qc
                coeffs[qi] = coeffs[qi] + prod if qi in coeffs else prod
        out = PhasePoly.from_p_coefficients(self._reduce_p(coeffs))
        if out.pbar_degree > 0:
            raise ContractViolation("p̄ survived reduction", residual=out)
        return out

    def _reduce_p_only(self, f: PhasePoly) -> PhasePoly:
        by_pbar: Dict[int, Dict[int, DiffPoly]] = {}
        for (i, j), c in f.items():
            by_pbar.setdefault(j, {})[i] = c
        out = PhasePoly()
        for j, coeffs in by_pbar.items():
            out = out + PhasePoly.from_p_coefficients(self._reduce_p(coeffs)) * PhasePoly.pbar(j)
        return out


def mu1_formula(n: int) -> DiffPoly:
    """μ₁ = −Σ_{k=2}^{n-1} (k/n) t_k μ_{k+1} (applied modulo t²)."""
    return -poly_sum(t(k) * mu(k + 1) * Fraction(k, n) for k in range(2, n))


def spectral_polynomials(spec: SpectralIdealSpec) -> Tuple[PhasePoly, PhasePoly]:
    """(P, Q) for the requested variant."""
    n = spec.n
    if spec.variant == SpectralVariant.PLAIN:
        P = PhasePoly.from_p_coefficients({n - k: t(k) for k in range(2, n + 1)})
        mu1 = mu1_formula(n) if spec.mu1_mode == Mu1Mode.FORMULA else mu(1)
        Q = PhasePoly.from_p_coefficients({0: mu1, **{k - 1: mu(k) for k in range(2, n + 1)}})
        return P, Q
    P = PhasePoly.from_p_coefficients(
        {n - k: h(1) * t(k) * (-1) ** k for k in range(2, n + 1)}
    )
    Q = PhasePoly.from_p_coefficients({k - 1: mu(k) * (-1) ** k for k in range(2, n + 1)})
    return P, Q


def spectral_ideal(spec: SpectralIdealSpec) -> SpectralIdeal:
    P, Q = spectral_polynomials(spec)
    return SpectralIdeal(spec.n, P, Q)


def reduce_mod_I(f: PhasePoly, spec: SpectralIdealSpec) -> PhasePoly:
    return spectral_ideal(spec).reduce(f)
