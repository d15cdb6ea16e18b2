"""
Frobenius-form h-connections h d + A₁ dz + A₂ dz̄.

A₁ is the companion matrix of ∇ⁿv = Σ_k t̂_k ∇^{n−k}v in the basis
(v, ∇v, …, ∇^{n−1}v); A₂ is completed from ∇̄v = Σ_j μ̂_j ∇^{j−1}v and the
flatness relation ∇̄∇ᵏv = ∇ᵏ∇̄v.
"""

import logging
from fractions import Fraction
from typing import Dict, List, Literal

from pydantic import BaseModel, ConfigDict, Field, model_validator

from ..diffalg import DiffPoly, derived, gen_id, mu
from ..diffop import Convention, SystemSpec, system_from_tables
from ..errors import ContractViolation
from ..reports import Poly
from .matrix import Matrix, trace, transpose, zeros

logger = logging.getLogger(__name__)

Table = Dict[int, DiffPoly]
Orientation = Literal["last_column", "transposed"]


class MatrixConn(BaseModel):
    """The pair (A₁, A₂) of an h-connection in the local chart."""

    model_config = ConfigDict(frozen=True, arbitrary_types_allowed=True)

    n: int = Field(ge=2, description="Rank")
    A1: List[List[Poly]] = Field(description="(1,0)-part, row-major")
    A2: List[List[Poly]] = Field(description="(0,1)-part, row-major")
    h_sign: Literal[1, -1] = Field(
        default=1, description="Sign in the Leibniz rule ∇(f·w) = ±h(∂f)w + f∇w"
    )

    @model_validator(mode="after")
    def validate_shape(self) -> "MatrixConn":
        for name in ("A1", "A2"):
            m = getattr(self, name)
            if len(m) != self.n or any(len(row) != self.n for row in m):
                raise ValueError(f"{name} must be {self.n}x{self.n}")
        return self

    @property
    def t_hat(self) -> Table:
        """t̂_k read back from the last column of A₁."""
        return {k: self.A1[self.n - k][self.n - 1] for k in range(2, self.n + 1)}


def build_frobenius(n: int, t_hat: Table, orientation: Orientation = "last_column") -> Matrix:
    """
    Companion matrix: ones on the subdiagonal, (t̂_n, …, t̂₂, 0)ᵀ in the last column.

    orientation="transposed" returns the transpose (ones on the superdiagonal,
    t̂ in the last row).
    """
    if n < 2:
        raise ValueError("n must be at least 2")
    A = zeros(n)
    for i in range(1, n):
        A[i][i - 1] = DiffPoly.const(1)
    for k in range(2, n + 1):
        A[n - k][n - 1] = DiffPoly.coerce(t_hat.get(k, DiffPoly.zero()))
    return transpose(A) if orientation == "transposed" else A


def _nabla(vec: Dict[int, DiffPoly], n: int, t_hat: Table, h_sign: int) -> Dict[int, DiffPoly]:
    """∇ of Σ c_i ∇^i v, reducing ∇ⁿv through the companion relation."""
    out: Dict[int, DiffPoly] = {}

    def put(i: int, x: DiffPoly) -> None:
        if x:
            nx = out[i] + x if i in out else x
            if nx:
                out[i] = nx
            else:
                out.pop(i, None)

    for i, c in vec.items():
        put(i, c.d().shift_h(1).scale(h_sign))
        if i + 1 < n:
            put(i + 1, c)
        else:
            for k in range(2, n + 1):
                t_k = t_hat.get(k)
                if t_k:
                    put(n - k, c * t_k)
    return out


def a2_columns(n: int, t_hat: Table, mu_hat: Table, h_sign: int) -> Matrix:
    column = {j - 1: mu_hat[j] for j in range(1, n + 1) if mu_hat.get(j)}
    A2 = zeros(n)
    for k in range(n):
        if k:
            column = _nabla(column, n, t_hat, h_sign)
        for i, c in column.items():
            A2[i][k] = c
    return A2


def complete_A2(n: int, t_hat: Table, mu_hat: Table, h_sign: int = 1) -> MatrixConn:
    """
    Build (A₁, A₂) from the coefficient tables.

    Column k+1 of A₂ is the coefficient vector of ∇ᵏ(Σ_j μ̂_j ∇^{j−1}v). A missing
    μ̂₁ is taken as zero; pass the symbol mu(1) or the output of solve_mu1.

    Args:
        n: Rank
        t_hat: t̂_k for k = 2..n
        mu_hat: μ̂_k for k = 1..n
        h_sign: Sign of h in the Leibniz rule

    Returns:
        MatrixConn
    """
    t_hat = {k: DiffPoly.coerce(v) for k, v in t_hat.items()}
    mu_hat = {k: DiffPoly.coerce(v) for k, v in mu_hat.items()}
    return MatrixConn(
        n=n,
        A1=build_frobenius(n, t_hat),
        A2=a2_columns(n, t_hat, mu_hat, h_sign),
        h_sign=h_sign,
    )


def solve_mu1(n: int, t_hat: Table, mu_hat: Table, h_sign: int = 1) -> DiffPoly:
    """
    μ̂₁ from trace(A₂) = 0.

    Raises:
        ContractViolation: the trace is not affine in μ̂₁ with coefficient n
    """
    m1 = mu(1)
    table = {k: DiffPoly.coerce(v) for k, v in mu_hat.items() if k != 1}
    table[1] = m1
    tr = trace(a2_columns(n, {k: DiffPoly.coerce(v) for k, v in t_hat.items()}, table, h_sign))
    try:
        coeff, rest = tr.coefficient_of(derived(m1))
    except ValueError as exc:
        raise ContractViolation(f"trace(A2) is not affine in mu1: {exc}", residual=tr) from exc
    if rest.mentions(gen_id(m1)):
        raise ContractViolation("trace(A2) depends on derivatives of mu1", residual=rest)
    if coeff != n:
        raise ContractViolation(f"mu1 coefficient in trace(A2) is {coeff}, not {n}", residual=coeff)
    value = rest.scale(Fraction(-1, n))
    logger.debug("mu1 solved for n=%d (h_sign=%d)", n, h_sign)
    return value


def complete_connection(n: int, t_hat: Table, mu_hat: Table, h_sign: int = 1) -> MatrixConn:
    """complete_A2 with μ̂₁ eliminated by solve_mu1."""
    table = dict(mu_hat)
    table[1] = solve_mu1(n, t_hat, mu_hat, h_sign)
    return complete_A2(n, t_hat, table, h_sign)


def solved_system(
    n: int,
    t_hat: Table,
    mu_hat: Table,
    convention: Convention = Convention.FLAT_SECTION,
) -> SystemSpec:
    """
    Scalar system with μ̂₁ taken from the trace-free connection.

    The cyclic-vector system is the connection itself; the flat-section system
    sees it with h ↦ −h.
    """
    convention = Convention(convention)
    h_sign = -1 if convention == Convention.FLAT_SECTION else 1
    table = dict(mu_hat)
    table[1] = solve_mu1(n, t_hat, mu_hat, h_sign)
    return system_from_tables(n, t_hat, table, convention)
