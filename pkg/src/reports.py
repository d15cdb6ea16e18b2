"""
Verification reports

Value objects returned by the cross-checks (route agreement, semiclassical
comparison, coordinate changes, WKB levels, conformal gauge, numeric scaling).
They are frozen; DiffPoly fields stay live objects in Python and serialize to
the diffalg wire format in JSON mode.
"""

from typing import Annotated, Dict, List, Literal, Optional

from pydantic import BaseModel, ConfigDict, Field, PlainSerializer

from .diffalg import DiffPoly
from .diffalg.codec import to_json_obj

SCHEMA_VERSION = 1

Poly = Annotated[DiffPoly, PlainSerializer(to_json_obj, return_type=list, when_used="json")]


class Report(BaseModel):
    """Base for all reports."""

    model_config = ConfigDict(frozen=True, arbitrary_types_allowed=True)

    schema_version: int = Field(default=SCHEMA_VERSION, description="JSON schema version")
    passed: bool = Field(description="Whether the check succeeded")


class RouteReport(Report):
    """Agreement of the conditions computed by independent routes."""

    n: int = Field(ge=2, description="Rank")
    formula: List[Poly] = Field(description="conditions_C(n), k = 2..n")
    bracket: List[Poly] = Field(default_factory=list, description="Bracket route, k = 2..n")
    wkb: List[Poly] = Field(default_factory=list, description="Rational WKB route, k = 2..n")
    units: List[Poly] = Field(
        default_factory=list, description="Unit factor stripped from each bracket coefficient"
    )
    dropped_top: Optional[Poly] = Field(
        default=None, description="Bracket coefficient of p^(n-1), not part of the conditions"
    )
    mismatches: List[int] = Field(default_factory=list, description="Indices k that disagree")


class SemiclassicalReport(Report):
    """h⁰ grade of the operator variation against the Poisson variation."""

    n: int = Field(ge=2, description="Rank")
    hamiltonian: str = Field(description="Hamiltonian in the phase dialect")
    phase_delta_t: List[Poly] = Field(description="δt_k from the bracket, k = 2..n")
    phase_delta_mu: List[Poly] = Field(description="δμ_k from the bracket, k = 1..n")
    op_delta_t: List[Poly] = Field(description="h⁰ grade of δt̂_k, k = 2..n")
    op_delta_mu: List[Poly] = Field(description="h⁰ grade of δμ̂_k, k = 1..n")
    residuals: List[Poly] = Field(default_factory=list, description="Nonzero differences")


class TransformReport(Report):
    """Lowest-grade tensor behaviour of t̂_k under a coordinate change."""

    n: int = Field(ge=2, description="Rank")
    k: int = Field(ge=2, description="Index of the checked coefficient")
    lowest_grade: Poly = Field(description="h¹ grade of the transformed t̂_k")
    expected: Poly = Field(description="w₁^(-k) t_k")
    full_rule_checked: bool = Field(default=False, description="n=2 Schwarzian rule verified")
    full_rule_residual: Optional[Poly] = Field(
        default=None, description="Difference from the Schwarzian rule (n=2)"
    )


class LevelRecord(BaseModel):
    """One level h^(j/n) of the rational WKB recursion."""

    model_config = ConfigDict(frozen=True, arbitrary_types_allowed=True)

    level: int = Field(ge=0, description="j in h^(j/n)")
    kind: Literal["eikonal", "condition", "consistency", "mu"] = Field(
        description="What the level produced"
    )
    sigma: Optional[Poly] = Field(default=None, description="∂s at this level")
    tau: Optional[Poly] = Field(default=None, description="∂̄s at this level")
    condition: Optional[Poly] = Field(default=None, description="Emitted condition (unit removed)")
    unit: Optional[Poly] = Field(default=None, description="Factor removed from the condition")
    solved: Optional[str] = Field(default=None, description="Label of the solved leader")
    value: Optional[Poly] = Field(default=None, description="Value of the solved leader")
    residual: Optional[Poly] = Field(default=None, description="Consistency residual")


class ConformalGaugeReport(Report):
    """Drinfeld–Sokolov to conformal gauge."""

    n: int = Field(ge=2, description="Rank")
    u: Dict[int, Poly] = Field(description="u_k, k = 2..n")
    entries: Dict[int, Poly] = Field(description="Coefficient N_(k-1) u_k placed on J₊^(k-1)")
    normalizations: Dict[int, str] = Field(description="N_k as exact rationals")
    u_normalization: str = Field(default="mean", description="Sum identity of the N_k")
    gauge: List[List[Poly]] = Field(description="Upper unipotent gauge matrix")


class ResidualReport(Report):
    """Scaling of the curvature of a truncated connection with h."""

    n: int = Field(ge=2, description="Rank")
    order: int = Field(ge=0, description="Last solved WKB level K")
    h_values: List[float] = Field(description="h grid")
    norms: List[float] = Field(description="max |F| over the patch for each h")
    slope: Optional[float] = Field(default=None, description="Least-squares slope of log|F|")
    predicted_slope: Optional[int] = Field(
        default=None, description="Lowest nonzero h grade of the symbolic curvature"
    )
    operational_bound: float = Field(description="K/n + 1, the minimal acceptable slope")
    tolerance: float = Field(description="Allowed deviation of the slope")
    skipped: bool = Field(default=False, description="Fit skipped because F vanishes")
    rule_residuals: Dict[str, float] = Field(
        default_factory=dict, description="max |lhs − rhs| of each checked rewrite rule"
    )
    note: str = Field(default="", description="Why the fit was skipped or how to read it")
