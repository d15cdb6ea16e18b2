"""
Drinfeld–Sokolov to conformal gauge, the higher-order t̂ table it induces, and
the gauge matrix associated with a Hamiltonian.
"""

import logging
from fractions import Fraction
from enum import Enum
from typing import Dict, List, NamedTuple, Optional

from pydantic import BaseModel, ConfigDict, Field, model_validator

from ..diffalg import DiffPoly, fcoef, h, poly_sum, proj, t
from ..errors import ContractViolation
from ..phase import PhasePoly
from ..reports import ConformalGaugeReport
from .frobenius import MatrixConn, Table, a2_columns, build_frobenius
from .matrix import Matrix, identity, zeros

logger = logging.getLogger(__name__)

Rational = List[List[Fraction]]


def _rmul(a: Rational, b: Rational) -> Rational:
    n = len(a)
    return [
        [sum((a[i][k] * b[k][j] for k in range(n)), Fraction(0)) for j in range(n)]
        for i in range(n)
    ]


def _rsub(a: Rational, b: Rational) -> Rational:
    return [[x - y for x, y in zip(ra, rb)] for ra, rb in zip(a, b)]


class UNormalization(str, Enum):
    """What u_{k+1} measures on the k-th superdiagonal of the conformal form."""

    MEAN = "mean"  # N_k · Σ_i (J₊ᵏ)_{i,i+k} = n − k
    TRACE = "trace"  # N_k · Σ_i (J₊ᵏ)_{i,i+k} = 1


def _sum_target(n: int, k: int, normalization: UNormalization) -> int:
    return n - k if normalization == UNormalization.MEAN else 1


class ConformalGaugeSpec(BaseModel):
    """
    Principal sl₂ data: J₋ = Σ e_{i+1,i}, J₊ = Σ i(n−i) e_{i,i+1} and the
    normalizations N_k.

    With MEAN, u_{k+1} is the mean of the n − k entries of the k-th
    superdiagonal (n = 3: u₂ = ½t̂₂, u₃ = t̂₃ − ½h∂t̂₂). With TRACE it is their
    sum, so t̂_k enters u_k with coefficient 1 for every n.
    """

    model_config = ConfigDict(frozen=True, arbitrary_types_allowed=True)

    n: int = Field(ge=2, description="Rank")
    j_minus: List[List[Fraction]] = Field(description="Lowering element")
    j_plus: List[List[Fraction]] = Field(description="Raising element")
    normalizations: Dict[int, Fraction] = Field(description="N_k, k = 1..n-1")
    normalization: UNormalization = Field(
        default=UNormalization.MEAN, description="Sum identity the N_k satisfy"
    )

    @classmethod
    def principal(
        cls, n: int, normalization: UNormalization = UNormalization.MEAN
    ) -> "ConformalGaugeSpec":
        normalization = UNormalization(normalization)
        zero = [[Fraction(0)] * n for _ in range(n)]
        jm = [row[:] for row in zero]
        jp = [row[:] for row in zero]
        for i in range(n - 1):
            jm[i + 1][i] = Fraction(1)
            jp[i][i + 1] = Fraction((i + 1) * (n - i - 1))
        norms: Dict[int, Fraction] = {}
        power = jp
        for k in range(1, n):
            total = sum((power[i][i + k] for i in range(n - k)), Fraction(0))
            norms[k] = Fraction(_sum_target(n, k, normalization)) / total
            power = _rmul(power, jp)
        return cls(
            n=n, j_minus=jm, j_plus=jp, normalizations=norms, normalization=normalization
        )

    @model_validator(mode="after")
    def validate_sl2(self) -> "ConformalGaugeSpec":
        H = self.cartan
        for X, sign in ((self.j_plus, 2), (self.j_minus, -2)):
            lhs = _rsub(_rmul(H, X), _rmul(X, H))
            if lhs != [[sign * x for x in row] for row in X]:
                raise ValueError("J+ and J- do not span an sl2 triple")
        for k, N in self.normalizations.items():
            total = sum((self.plus_power(k)[i][i + k] for i in range(self.n - k)), Fraction(0))
            if N * total != self.sum_target(k):
                raise ValueError(f"N_{k} does not satisfy the {self.normalization.value} identity")
        return self

    @property
    def cartan(self) -> Rational:
        """H = [J₊, J₋]."""
        return _rsub(_rmul(self.j_plus, self.j_minus), _rmul(self.j_minus, self.j_plus))

    def sum_target(self, k: int) -> int:
        """Right-hand side of N_k · Σ_i (J₊ᵏ)_{i,i+k}."""
        return _sum_target(self.n, k, self.normalization)

    def plus_power(self, k: int) -> Rational:
        out = [[Fraction(int(i == j)) for j in range(self.n)] for i in range(self.n)]
        for _ in range(k):
            out = _rmul(out, self.j_plus)
        return out


def _check_companion(A1: Matrix) -> None:
    n = len(A1)
    for i in range(n):
        for j in range(n):
            x = A1[i][j]
            if j == i - 1:
                ok = x == 1
            elif j == n - 1 and i < n - 1:
                ok = True
            else:
                ok = x.is_zero()
            if not ok:
                raise ValueError(f"A1 is not in companion form at ({i}, {j})")


def ds_to_conformal(
    c: MatrixConn, spec: Optional[ConformalGaugeSpec] = None
) -> ConformalGaugeReport:
    """
    Upper-unipotent g with g⁻¹A₁g + h g⁻¹∂g = J₋ + Σ_k N_k u_{k+1} J₊ᵏ.

    Solved degree by degree along the principal grading: at degree d the
    entries (i, i+d) give y_i − y_{i−1} + R_i = 0 for y_i = g_{i,i+d+1}; the
    sum over i fixes u_{d+1} and the partial sums fix y.

    Raises:
        ValueError: A₁ is not a companion matrix
    """
    n = c.n
    spec = spec or ConformalGaugeSpec.principal(n)
    if spec.n != n:
        raise ValueError(f"gauge spec is for n={spec.n}, connection has n={n}")
    _check_companion(c.A1)
    hh = h(1) * c.h_sign
    g = identity(n)
    U = zeros(n)
    u: Dict[int, DiffPoly] = {}
    entries: Dict[int, DiffPoly] = {}
    for d in range(n):
        size = n - d
        R = []
        for i in range(size):
            j = i + d
            r = poly_sum(g[i][m] * U[m][j] for m in range(i + 1, j))
            r = r - hh * g[i][j].d()
            if j == n - 1:
                r = r - c.A1[i][n - 1]
            R.append(r)
        if d:
            value = -poly_sum(R).scale(Fraction(1, spec.sum_target(d)))
            u[d + 1] = value
            coeff = spec.normalizations[d] * value
            entries[d + 1] = coeff
            power = spec.plus_power(d)
            for i in range(size):
                U[i][i + d] = coeff.scale(power[i][i + d])
                R[i] = R[i] + U[i][i + d]
        elif poly_sum(R):
            raise ContractViolation("connection is not trace free", residual=poly_sum(R))
        y = DiffPoly.zero()
        for i in range(size - 1):
            y = y - R[i]
            g[i][i + d + 1] = y
        if y - R[size - 1]:
            raise ContractViolation(f"degree {d} equations are inconsistent")
        logger.debug("conformal gauge degree %d solved", d)
    return ConformalGaugeReport(
        passed=True,
        n=n,
        u=u,
        entries=entries,
        normalizations={k: str(v) for k, v in spec.normalizations.items()},
        u_normalization=spec.normalization.value,
        gauge=g,
    )


def conformal_A1(
    report: ConformalGaugeReport, spec: Optional[ConformalGaugeSpec] = None
) -> Matrix:
    """J₋ + Σ N_k u_{k+1} J₊ᵏ as a DiffPoly matrix."""
    n = report.n
    spec = spec or ConformalGaugeSpec.principal(n)
    out = zeros(n)
    for i in range(1, n):
        out[i][i - 1] = DiffPoly.const(1)
    for k, coeff in report.entries.items():
        d = k - 1
        power = spec.plus_power(d)
        for i in range(n - d):
            out[i][i + d] = out[i][i + d] + coeff.scale(power[i][i + d])
    return out


def higher_order_t_table(n: int, order: int, h_sign: int = 1) -> Table:
    """
    t̂_k such that the TRACE-normalized conformal gauge gives u_k = f_k(h) t_k for
    k ≥ 3, and t̂₂ = f₂(h) t₂ + n(n²−1)/12 · h² · proj, truncated at h^order.

    f_k(h) = h + Σ_{l=2}^{order} f_k^{(l)} h^l with free coefficients.
    """
    if order < 1:
        raise ValueError("order must be at least 1")

    def f(k: int) -> DiffPoly:
        return h(1) + poly_sum(fcoef(k, l) * h(l) for l in range(2, order + 1))

    spec = ConformalGaugeSpec.principal(n, UNormalization.TRACE)
    uniformizing = Fraction(n * (n * n - 1), 12) * h(2) * proj()
    table: Table = {2: (f(2) * t(2) + uniformizing).truncate_h(order)}
    for k in range(3, n + 1):
        A1 = build_frobenius(n, table)
        report = ds_to_conformal(MatrixConn(n=n, A1=A1, A2=zeros(n), h_sign=h_sign), spec)
        lower = report.u[k]
        table[k] = (f(k) * t(k) - lower).truncate_h(order)
    return table


class AssociatedGauge(NamedTuple):
    """X = h^h_power · matrix."""

    matrix: Matrix
    h_power: int


def associated_gauge(H: PhasePoly, c: MatrixConn) -> AssociatedGauge:
    """
    Gauge matrix of Ĥ = Σ v_k (h∂)^{k−1}: A₂ of c with μ̂_k ↦ v_k/h.

    The 1/h is returned as h_power = −1 so the entries stay polynomial.
    """
    if H.pbar_degree > 0:
        raise ValueError("Hamiltonian must not contain pbar")
    if H.p_degree >= c.n:
        raise ValueError(f"Hamiltonian must have p-degree below {c.n}")
    v = {k: H.coeff(k - 1) for k in range(1, c.n + 1)}
    return AssociatedGauge(a2_columns(c.n, c.t_hat, v, c.h_sign), -1)
