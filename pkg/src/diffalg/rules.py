"""
Rewrite rules on differential polynomials.

DerivativeRules maps a derived generator (and everything derived from it) to a
replacement value; RootAdjunction adjoins a formal root r with r^m = c and keeps
exponents of r in 0..m-1. Both are used by the WKB engines, where λ, the
solved μ-leaders and the solved ∂̄t_k become rules.
"""

import logging
from fractions import Fraction
from typing import Dict, Iterable, List, Optional, Set

from ..errors import ContractViolation, LocalizationError
from .generators import DerivedGen, GeneratorId, get_registry
from .poly import DiffPoly, Monomial, poly_sum

logger = logging.getLogger(__name__)

MAX_ROUNDS = 64


class RootAdjunction:
    """
    Formal root r with r^degree = value.

    value must be a single monomial; negative powers of r are folded into
    negative powers of value, which therefore has to be invertible.
    """

    def __init__(self, root: GeneratorId, degree: int, value: DiffPoly):
        if degree < 1:
            raise ValueError("root degree must be positive")
        if not value.is_monomial():
            raise ValueError("root value must be a single monomial")
        self.root = root
        self.degree = degree
        self.value = value
        self._key = DerivedGen(root)

    def reduce(self, x: DiffPoly) -> DiffPoly:
        """Bring every exponent of r into 0..degree-1."""
        if not x.mentions(self.root):
            return x
        parts: List[DiffPoly] = []
        powers: Dict[int, DiffPoly] = {}
        for m, c in x.items():
            e = m.exponent_of(self._key)
            q, r = divmod(e, self.degree)
            if q == 0:
                parts.append(DiffPoly({m: c}))
                continue
            if q not in powers:
                powers[q] = self.value**q
            rest = Monomial(tuple((g, k) for g, k in m.factors if g != self._key), m.h)
            part = DiffPoly({rest: c}) * powers[q]
            if r:
                part = part * DiffPoly.of(self._key, r)
            parts.append(part)
        return poly_sum(parts)

    def derivative_rules(self) -> Dict[DerivedGen, DiffPoly]:
        """∂r = r·∂c/(m c) and ∂̄r = r·∂̄c/(m c)."""
        r = DiffPoly.of(self._key)
        inv = self.value.inverse()
        scale = Fraction(1, self.degree)
        return {
            self._key.d(): (r * self.value.d() * inv).scale(scale),
            self._key.dbar(): (r * self.value.dbar() * inv).scale(scale),
        }


class DerivativeRules:
    """
    Terminating rewrite system on derived generators.

    A rule key (g, a, b) ↦ v also rewrites (g, a', b') for a' ≥ a, b' ≥ b as the
    matching derivative of v. Values are normalized lazily and memoized.
    """

    def __init__(self, roots: Iterable[RootAdjunction] = ()):
        self._rules: Dict[DerivedGen, DiffPoly] = {}
        self._by_base: Dict[GeneratorId, List[DerivedGen]] = {}
        self._roots: List[RootAdjunction] = list(roots)
        self._memo: Dict[DerivedGen, DiffPoly] = {}
        self._active: Set[DerivedGen] = set()
        for root in self._roots:
            for key, value in root.derivative_rules().items():
                self.add(key, value)

    def __len__(self) -> int:
        return len(self._rules)

    def __contains__(self, key: DerivedGen) -> bool:
        return key in self._rules

    @property
    def rules(self) -> Dict[DerivedGen, DiffPoly]:
        return dict(self._rules)

    @property
    def roots(self) -> List[RootAdjunction]:
        return list(self._roots)

    def copy(self) -> "DerivativeRules":
        """Independent rule set with the same rules and roots."""
        clone = DerivativeRules()
        clone._rules = dict(self._rules)
        clone._by_base = {base: list(keys) for base, keys in self._by_base.items()}
        clone._roots = list(self._roots)
        return clone

    def add(self, key: DerivedGen, value: DiffPoly) -> None:
        """Install key ↦ value; earlier memoized results are dropped."""
        if key in self._rules:
            raise ContractViolation(f"rule for {key.base.label}[{key.a},{key.b}] already set")
        if key.a == 0 and key.b == 0 and get_registry().is_invertible(key):
            if not value.is_monomial():
                raise LocalizationError(
                    f"invertible {key.base.label} cannot be rewritten to a sum"
                )
        self._rules[key] = value
        self._by_base.setdefault(key.base, []).append(key)
        self._memo.clear()
        logger.debug("rule %s[%d,%d] installed", key.base.label, key.a, key.b)

    def add_root(self, root: RootAdjunction) -> None:
        self._roots.append(root)
        for key, value in root.derivative_rules().items():
            self.add(key, value)

    def _match(self, dg: DerivedGen) -> Optional[DerivedGen]:
        keys = self._by_base.get(dg.base)
        if not keys:
            return None
        best: Optional[DerivedGen] = None
        for key in keys:
            if dg.a >= key.a and dg.b >= key.b:
                if best is None or (key.a + key.b, key) > (best.a + best.b, best):
                    best = key
        return best

    def _value(self, dg: DerivedGen) -> Optional[DiffPoly]:
        if dg in self._memo:
            return self._memo[dg]
        key = self._match(dg)
        if key is None:
            return None
        if dg in self._active:
            raise ContractViolation(f"cyclic rewrite through {dg.base.label}")
        self._active.add(dg)
        try:
            if dg == key:
                raw = self._rules[key]
            elif dg.b > key.b:
                parent = self._value(DerivedGen(dg.base, dg.a, dg.b - 1))
                assert parent is not None
                raw = parent.dbar()
            else:
                parent = self._value(DerivedGen(dg.base, dg.a - 1, dg.b))
                assert parent is not None
                raw = parent.d()
            value = self.normalize(raw)
        finally:
            self._active.discard(dg)
        self._memo[dg] = value
        return value

    def reduce_roots(self, x: DiffPoly) -> DiffPoly:
        for root in self._roots:
            x = root.reduce(x)
        return x

    def normalize(self, x: DiffPoly) -> DiffPoly:
        """Apply the rules and root reductions until nothing changes."""
        for _ in range(MAX_ROUNDS):
            y = self.reduce_roots(x.replace_factors(self._value))
            if y == x:
                return y
            x = y
        raise ContractViolation("rewrite rules did not terminate", residual=x)
