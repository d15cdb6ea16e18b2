"""
Rational WKB: ψ = exp(s/h) with s = s₀ + Σ_{j≥1} h^{j/n} s_j.

Level j takes grade h^{(n+j−1)/n} of the first equation and grade h^{j/n} of the
second. Level 1 fixes λ = ∂s_1 by λⁿ = c, where c is read off the first equation
((−1)ⁿt_n for the flat-section system). Every later level is affine in ∂s_j with
coefficient nλ^{n−1}. The cross derivative ∂̄∂s_j − ∂∂̄s_j is λ^{j mod n} times a
λ-free expression: for j < n it is the condition on (t_{n+1−j}, μ); for
j = αn + β with β > 0 it determines ∂μ_{β+1}^{(α)}; for β = 0 it must vanish.

Solved conditions and μ-derivatives are installed as rewrite rules on their
leaders (∂̄t_k, ∂μ_k^{(α)}) so that later levels are reduced by them.
"""

import logging
from fractions import Fraction
from typing import Any, Callable, Dict, List, Optional, Tuple

from pydantic import BaseModel, ConfigDict, Field, PrivateAttr

from ..connection import solved_system
from ..diffalg import (
    DerivativeRules,
    DerivedGen,
    DiffPoly,
    GeneratorId,
    RootAdjunction,
    gen_id,
    get_registry,
    lam,
    mu,
    t,
)
from ..diffop import Convention, SystemSpec, default_tables
from ..errors import ContractViolation, NonGenericError
from ..phase import condition_C
from ..reports import LevelRecord, Poly
from .ansatz import (
    AnsatzExpansion,
    exp_ansatz,
    flat_section_equations,
    phase_symbol,
    rational_phase,
)

logger = logging.getLogger(__name__)


def generic_system(n: int, levels: Optional[int] = None) -> SystemSpec:
    """
    Flat-section system with shifted generic tables, deep enough for `levels`.

    t̂_k = Σ h^{i+1} t_k^{(i)}, μ̂_k = Σ h^i μ_k^{(i)} up to order levels // n + 1,
    μ̂₁ from the trace-free connection.
    """
    levels = n - 1 if levels is None else levels
    tables = default_tables(n, max(levels // n + 1, 1))
    return solved_system(n, tables["t"], tables["mu"], Convention.FLAT_SECTION)


def _single_generator(x: DiffPoly) -> Optional[GeneratorId]:
    """The generator of ±c·g, or None."""
    if not x.is_monomial():
        return None
    (m, _), = x.items()
    if len(m.factors) != 1 or m.factors[0][1] != 1:
        return None
    dg = m.factors[0][0]
    return dg.base if not (dg.a or dg.b) else None


class WKBState(BaseModel):
    """Levels processed by the rational expansion, in order."""

    model_config = ConfigDict(frozen=True, arbitrary_types_allowed=True)

    n: int = Field(ge=2, description="Rank")
    max_level: int = Field(ge=0, description="Last processed level j (grade h^(j/n))")
    levels: List[LevelRecord] = Field(description="One record per level, starting at 0")
    lambda_power: Optional[Poly] = Field(default=None, description="c in λⁿ = c")
    emitted: List[Poly] = Field(default_factory=list, description="Conditions, level order")
    units: List[Poly] = Field(default_factory=list, description="Factor removed per condition")
    solved_mu: Dict[str, Poly] = Field(
        default_factory=dict, description="∂μ_k^(α) by generator label"
    )
    s0_constant: bool = Field(default=True, description="Grade h⁰ forces s₀ constant")
    tn_localized: bool = Field(default=False, description="A negative power of t_n was formed")

    _engine: Any = PrivateAttr(default=None)

    @property
    def eikonal(self) -> Dict[int, Tuple[DiffPoly, DiffPoly]]:
        """(∂s_j, ∂̄s_j) by level."""
        return {
            r.level: (r.sigma, r.tau)
            for r in self.levels
            if r.sigma is not None and r.tau is not None
        }

    @property
    def conditions(self) -> Dict[int, DiffPoly]:
        """Emitted conditions by index k = n + 1 − j."""
        return {
            self.n + 1 - r.level: r.condition
            for r in self.levels
            if r.kind == "condition" and r.condition is not None
        }

    @property
    def consistent(self) -> bool:
        return all(r.residual is None or r.residual.is_zero() for r in self.levels)

    def mu_solution(self, k: int, alpha: int) -> DiffPoly:
        """Solved value of ∂μ_k^{(α)}."""
        return self.solved_mu[gen_id(mu(k, alpha)).label]

    @property
    def rules(self) -> DerivativeRules:
        if self._engine is None:
            raise ContractViolation("state carries no rewrite rules")
        return self._engine.rules.copy()


class RationalWKB:
    """Level-by-level solver; one instance per system."""

    def __init__(self, sys: SystemSpec, check: bool = True):
        self.sys = sys
        self.n = sys.n
        self.check = check
        self.rules = DerivativeRules()
        self.root: Optional[RootAdjunction] = None
        self.sigma: Dict[int, DiffPoly] = {}
        self.tau: Dict[int, DiffPoly] = {}
        self.records: List[LevelRecord] = []
        self.emitted: List[Tuple[DiffPoly, DiffPoly]] = []
        self.solved_mu: Dict[str, DiffPoly] = {}
        self.level = 0
        self._top = 0
        self._E1: Optional[AnsatzExpansion] = None
        self._E2: Optional[AnsatzExpansion] = None
        self._index: Dict[GeneratorId, int] = {}
        self._expected = self._formula_conditions() if check else None
        self._level_zero()

    def copy(self) -> "RationalWKB":
        clone = RationalWKB.__new__(RationalWKB)
        clone.__dict__.update(self.__dict__)
        clone.rules = self.rules.copy()
        clone.sigma = dict(self.sigma)
        clone.tau = dict(self.tau)
        clone.records = list(self.records)
        clone.emitted = list(self.emitted)
        clone.solved_mu = dict(self.solved_mu)
        clone._index = dict(self._index)
        return clone

    # -- setup -------------------------------------------------------------

    def _formula_conditions(self) -> Optional[Dict[int, DiffPoly]]:
        """conditions_C(n) when the system has the generic flat-section shape."""
        sys = self.sys
        if sys.convention != Convention.FLAT_SECTION:
            return None
        for k in range(2, self.n + 1):
            if sys.t_hat[k].h_part(1) != t(k) or sys.mu_hat[k].h_part(0) != mu(k):
                return None
        return {k: condition_C(self.n, k) for k in range(2, self.n + 1)}

    def _level_zero(self) -> None:
        for k, v in self.sys.t_hat.items():
            if v.h_part(0):
                raise ValueError(f"t-hat_{k} has an h^0 term; the rational ansatz needs O(h)")
        s0 = phase_symbol(0)
        base = gen_id(s0)
        E1, E2 = flat_section_equations(self.sys, 0, s0)
        if E1.grade(0) != DiffPoly.of(DerivedGen(base, 1, 0), self.n):
            raise ContractViolation("grade 0 of the first equation is not (ds0)^n")
        second = E2.grade(0).replace_factors(
            lambda dg: DiffPoly.zero() if dg.base == base and dg.a else None
        )
        if second != -DiffPoly.of(DerivedGen(base, 0, 1)):
            raise ContractViolation("mu1-hat has an h^0 term; s0 is not constant", residual=second)
        zero = DiffPoly.zero()
        self.records.append(LevelRecord(level=0, kind="eikonal", sigma=zero, tau=zero))
        logger.debug("level 0: s0 constant")

    def _expand(self, top: int) -> None:
        if top <= self._top:
            return
        n = self.n
        phase = rational_phase(n, top)
        self._E1 = exp_ansatz(self.sys.D1, Fraction(n + top - 1, n), phase)
        self._E2 = exp_ansatz(self.sys.D2, Fraction(top, n), phase)
        self._index = {gen_id(phase_symbol(j)): j for j in range(1, top + 1)}
        self._top = top
        logger.debug("ansatz expanded through level %d", top)

    # -- substitution ------------------------------------------------------

    def _jet_value(self, i: int, dg: DerivedGen) -> DiffPoly:
        if dg.a:
            return self.sigma[i].derive(dg.a - 1, dg.b)
        return self.tau[i].derive(0, dg.b - 1)

    def _substitute(self, x: DiffPoly, known: Callable[[int, DerivedGen], bool]) -> DiffPoly:
        def replace(dg: DerivedGen) -> Optional[DiffPoly]:
            i = self._index.get(dg.base)
            if i is None:
                return None
            if known(i, dg):
                return self._jet_value(i, dg)
            return None

        return self.rules.normalize(x.replace_factors(replace))

    def _phase_free(self, x: DiffPoly, what: str) -> None:
        left = [dg for dg in x.generators() if dg.base in self._index]
        if left:
            raise ContractViolation(f"{what} still depends on {left[0].base.label}", residual=x)

    def _normalize(self, x: DiffPoly) -> DiffPoly:
        return self.rules.normalize(x)

    # -- levels ------------------------------------------------------------

    def run(self, target: int) -> None:
        """Process levels up to target."""
        self._expand(target)
        while self.level < target:
            self._process(self.level + 1)

    def _process(self, j: int) -> None:
        n = self.n
        assert self._E1 is not None and self._E2 is not None
        if j == 1:
            self._install_lambda()
        else:
            self._solve_sigma(j)
        self._solve_tau(j)
        compat = self._normalize(self.sigma[j].dbar() - self.tau[j].d())
        if j < n:
            self._emit_condition(j, compat)
        else:
            alpha, beta = divmod(j, n)
            if beta == 0:
                self._consistency(j, compat)
            else:
                self._solve_mu(j, alpha, beta, compat)
        self.level = j

    def _install_lambda(self) -> None:
        assert self._E1 is not None
        n = self.n
        x = DerivedGen(gen_id(phase_symbol(1)), 1, 0)
        grade = self._E1.grade(1)
        free = grade.replace_factors(lambda dg: DiffPoly.zero() if dg == x else None)
        if grade != DiffPoly.of(x, n) + free:
            raise ContractViolation(
                "grade 1 of the first equation is not (ds1)^n - c", residual=grade
            )
        value = -free
        if value.is_zero():
            raise NonGenericError("t_n has no h^1 term; lambda is undefined")
        if not value.is_monomial():
            raise ContractViolation("lambda^n must equal a single monomial", residual=value)
        get_registry().declare_rank(n)
        self.root = RootAdjunction(gen_id(lam()), n, value)
        self.rules.add_root(self.root)
        self.sigma[1] = lam()
        logger.debug("level 1: lambda^%d = %s", n, value)

    def _solve_sigma(self, j: int) -> None:
        assert self._E1 is not None
        n = self.n
        grade = self._substitute(self._E1.grade(Fraction(n + j - 1, n)), lambda i, dg: i < j)
        x = DerivedGen(gen_id(phase_symbol(j)), 1, 0)
        try:
            coeff, rest = grade.coefficient_of(x)
        except ValueError as exc:
            raise ContractViolation(f"level {j} is not affine in ds{j}: {exc}") from exc
        expected = self._normalize(lam() ** (n - 1) * n)
        if coeff != expected:
            raise ContractViolation(f"coefficient of ds{j} is not n*lambda^(n-1)", residual=coeff)
        self._phase_free(rest, f"level {j} of the first equation")
        self.sigma[j] = self._normalize(-rest.divide_monomial(coeff))

    def _solve_tau(self, j: int) -> None:
        assert self._E2 is not None
        grade = self._substitute(
            self._E2.grade(Fraction(j, self.n)), lambda i, dg: i < j or (i == j and dg.a > 0)
        )
        y = DerivedGen(gen_id(phase_symbol(j)), 0, 1)
        try:
            coeff, rest = grade.coefficient_of(y)
        except ValueError as exc:
            raise ContractViolation(f"level {j} is not affine in dbar s{j}: {exc}") from exc
        if coeff != -1:
            raise ContractViolation(f"dbar s{j} does not enter with coefficient -1", residual=coeff)
        self._phase_free(rest, f"level {j} of the second equation")
        self.tau[j] = rest

    def _lambda_unit(self, x: DiffPoly, j: int) -> DiffPoly:
        key = DerivedGen(gen_id(lam()))
        powers = {m.exponent_of(key) for m, _ in x.items()}
        if len(powers) > 1:
            raise ContractViolation(f"level {j} mixes powers of lambda", residual=x)
        return lam() ** powers.pop() if powers else DiffPoly.const(1)

    def _emit_condition(self, j: int, compat: DiffPoly) -> None:
        k = self.n + 1 - j
        base = _single_generator(self.sys.t_hat[k].h_part(1))
        leader = DerivedGen(base, 0, 1) if base is not None else None
        coeff = DiffPoly.zero()
        if leader is not None:
            try:
                coeff, _ = compat.coefficient_of(leader)
            except ValueError as exc:
                raise ContractViolation(f"condition {k} is not affine: {exc}") from exc
        if coeff:
            if not coeff.is_monomial():
                raise ContractViolation(f"coefficient of dbar t{k} is not a unit", residual=coeff)
            unit = -coeff
        else:
            unit = self._lambda_unit(compat, j)
        condition = self._normalize(compat.divide_monomial(unit)) if compat else compat
        if condition.mentions(gen_id(lam())):
            raise ContractViolation(
                f"lambda residue in the level {j} condition", residual=condition
            )
        if self._expected is not None and condition != self._expected[k]:
            raise ContractViolation(
                f"level {j} condition differs from the formula for k={k}",
                residual=condition - self._expected[k],
            )
        solved, value = None, None
        if coeff and leader is not None:
            value = self._normalize(condition + DiffPoly.of(leader))
            self.rules.add(leader, value)
            solved = f"d[0,1]({leader.base.label})"
        self.emitted.append((condition, unit))
        self.records.append(
            LevelRecord(
                level=j,
                kind="condition",
                sigma=self.sigma[j],
                tau=self.tau[j],
                condition=condition,
                unit=unit,
                solved=solved,
                value=value,
            )
        )
        logger.debug("level %d: condition for k=%d with %d terms", j, k, len(condition))

    def _consistency(self, j: int, compat: DiffPoly) -> None:
        if compat:
            logger.warning("level %d: consistency residual with %d terms", j, len(compat))
        self.records.append(
            LevelRecord(
                level=j, kind="consistency", sigma=self.sigma[j], tau=self.tau[j], residual=compat
            )
        )

    def _solve_mu(self, j: int, alpha: int, beta: int, compat: DiffPoly) -> None:
        k = beta + 1
        base = _single_generator(self.sys.mu_hat[k].h_part(alpha))
        if base is None:
            raise ValueError(f"mu-hat_{k} has no generator at order h^{alpha}; extend the table")
        leader = DerivedGen(base, 1, 0)
        try:
            coeff, rest = compat.coefficient_of(leader)
        except ValueError as exc:
            raise ContractViolation(f"level {j} is not affine in d {base.label}: {exc}") from exc
        if coeff.is_zero():
            raise NonGenericError(
                f"coefficient of d {base.label} vanishes at level {j}; "
                "the constant term of t-hat has to be non-zero"
            )
        if not coeff.is_monomial():
            raise ContractViolation(f"coefficient of d {base.label} is not a unit", residual=coeff)
        value = self._normalize(-rest.divide_monomial(coeff))
        if value.mentions(gen_id(lam())):
            raise ContractViolation(f"lambda residue in d {base.label}", residual=value)
        self.rules.add(leader, value)
        self.solved_mu[base.label] = value
        self.records.append(
            LevelRecord(
                level=j,
                kind="mu",
                sigma=self.sigma[j],
                tau=self.tau[j],
                unit=coeff,
                solved=f"d[1,0]({base.label})",
                value=value,
            )
        )
        logger.debug("level %d: solved d %s (%d terms)", j, base.label, len(value))

    # -- results -----------------------------------------------------------

    def remainders(self) -> Tuple[DiffPoly, DiffPoly]:
        """
        Both ansatz equations one level deeper, with all solved data substituted
        and the next phase coefficient set to zero.
        """
        n, top = self.n, self.level + 1
        phase = rational_phase(n, top)
        E1 = exp_ansatz(self.sys.D1, Fraction(n + top - 1, n), phase)
        E2 = exp_ansatz(self.sys.D2, Fraction(top, n), phase)
        nxt = gen_id(phase_symbol(top))
        index = {gen_id(phase_symbol(i)): i for i in range(1, top)}

        def replace(dg: DerivedGen) -> Optional[DiffPoly]:
            if dg.base == nxt:
                return DiffPoly.zero()
            i = index.get(dg.base)
            return self._jet_value(i, dg) if i is not None else None

        return (
            self._normalize(E1.equation.replace_factors(replace)),
            self._normalize(E2.equation.replace_factors(replace)),
        )

    def snapshot(self) -> WKBState:
        state = WKBState(
            n=self.n,
            max_level=self.level,
            levels=list(self.records),
            lambda_power=self.root.value if self.root is not None else None,
            emitted=[c for c, _ in self.emitted],
            units=[u for _, u in self.emitted],
            solved_mu=dict(self.solved_mu),
            tn_localized=get_registry().tn_localization_used,
        )
        state._engine = self
        return state


def rational_expand(sys: SystemSpec, max_level: int, check: bool = True) -> WKBState:
    """
    Run the rational expansion through max_level.

    Args:
        sys: Flat-section (or cyclic) system with t̂_k = O(h)
        max_level: Last level j
        check: Compare emitted conditions with conditions_C(n) when the system
            has the generic flat-section shape

    Returns:
        WKBState

    Raises:
        ValueError: t̂ has an h⁰ term or max_level < 1
        ContractViolation: λ residue, malformed grade or mismatch with the formula
        LocalizationError: t_n-localization is disabled
    """
    if max_level < 1:
        raise ValueError("max_level must be at least 1")
    engine = RationalWKB(sys, check)
    engine.run(max_level)
    logger.info(
        "rational WKB n=%d through level %d: %d conditions", sys.n, max_level, len(engine.emitted)
    )
    return engine.snapshot()


def solve_mu_higher(state: WKBState, target_level: int) -> WKBState:
    """
    Continue a state through target_level, solving ∂μ_{β+1}^{(α)} at each level
    j = αn + β with β > 0 and recording consistency residuals at β = 0.

    The input state is left untouched.

    Raises:
        ValueError: target_level < n, or a μ̂ table is too short
        NonGenericError: the coefficient of the μ-leader vanishes
    """
    if target_level < state.n:
        raise ValueError(f"mu orders start at level {state.n}")
    if state._engine is None:
        raise ContractViolation("state was not produced by rational_expand")
    engine = state._engine.copy()
    engine.run(target_level)
    logger.info("rational WKB n=%d continued to level %d", state.n, target_level)
    return engine.snapshot()


def remainders(state: WKBState) -> Tuple[DiffPoly, DiffPoly]:
    """Leftover of both ansatz equations after substituting the solved levels."""
    if state._engine is None:
        raise ContractViolation("state was not produced by rational_expand")
    return state._engine.remainders()
