"""
Differential operators Σ c_{a,b} (h∂)^a (h∂̄)^b with coefficients on the left.
"""

from functools import lru_cache
from math import comb
from typing import Dict, Iterator, Mapping, Optional, Tuple, Union

from ..diffalg import DiffPoly
from ..diffalg.poly import Scalar

Degree = Tuple[int, int]


class OpPoly:
    """Normal-ordered element of the Weyl-type algebra over DiffPoly; immutable."""

    __slots__ = ("_terms",)

    def __init__(self, terms: Optional[Mapping[Degree, Union[DiffPoly, Scalar]]] = None):
        clean: Dict[Degree, DiffPoly] = {}
        for deg, c in (terms or {}).items():
            if deg[0] < 0 or deg[1] < 0:
                raise ValueError(f"negative operator degree {deg}")
            c = DiffPoly.coerce(c)
            if c:
                clean[deg] = c
        self._terms = clean

    @classmethod
    def D(cls, power: int = 1) -> "OpPoly":
        """(h∂)^power."""
        return cls({(power, 0): 1})

    @classmethod
    def Dbar(cls, power: int = 1) -> "OpPoly":
        """(h∂̄)^power."""
        return cls({(0, power): 1})

    @classmethod
    def const(cls, c: Union[DiffPoly, Scalar]) -> "OpPoly":
        return cls({(0, 0): c})

    @classmethod
    def coerce(cls, x: Union["OpPoly", DiffPoly, Scalar]) -> "OpPoly":
        return x if isinstance(x, OpPoly) else cls.const(x)

    @classmethod
    def from_d_coefficients(cls, coeffs: Mapping[int, DiffPoly]) -> "OpPoly":
        return cls({(a, 0): c for a, c in coeffs.items()})

    def items(self) -> Iterator[Tuple[Degree, DiffPoly]]:
        return iter(sorted(self._terms.items()))

    def coeff(self, a: int, b: int = 0) -> DiffPoly:
        return self._terms.get((a, b), DiffPoly.zero())

    @property
    def d_degree(self) -> int:
        return max((a for a, _ in self._terms), default=-1)

    @property
    def dbar_degree(self) -> int:
        return max((b for _, b in self._terms), default=-1)

    def is_zero(self) -> bool:
        return not self._terms

    def __bool__(self) -> bool:
        return bool(self._terms)

    def __eq__(self, other: object) -> bool:
        if not isinstance(other, OpPoly):
            try:
                other = OpPoly.const(DiffPoly.coerce(other))  # type: ignore[arg-type]
            except TypeError:
                return NotImplemented
        return self._terms == other._terms

    def __hash__(self) -> int:
        return hash(frozenset(self._terms.items()))

    def __repr__(self) -> str:
        return f"OpPoly({self})"

    def __str__(self) -> str:
        from ..diffalg import to_text

        if not self._terms:
            return "0"
        parts = []
        for (a, b), c in self.items():
            ops = []
            if a:
                ops.append("D" if a == 1 else f"D^{a}")
            if b:
                ops.append("Dbar" if b == 1 else f"Dbar^{b}")
            parts.append("*".join([f"({to_text(c)})"] + ops))
        return " + ".join(parts)

    def __add__(self, other: Union["OpPoly", DiffPoly, Scalar]) -> "OpPoly":
        other = OpPoly.coerce(other)
        acc = dict(self._terms)
        for deg, c in other._terms.items():
            acc[deg] = acc[deg] + c if deg in acc else c
        return OpPoly(acc)

    __radd__ = __add__

    def __neg__(self) -> "OpPoly":
        return OpPoly({deg: -c for deg, c in self._terms.items()})

    def __sub__(self, other: Union["OpPoly", DiffPoly, Scalar]) -> "OpPoly":
        return self + (-OpPoly.coerce(other))

    def __rsub__(self, other: Union[DiffPoly, Scalar]) -> "OpPoly":
        return OpPoly.coerce(other) + (-self)

    def __mul__(self, other: Union["OpPoly", DiffPoly, Scalar]) -> "OpPoly":
        if not isinstance(other, OpPoly):
            try:
                other = OpPoly.const(DiffPoly.coerce(other))  # type: ignore[arg-type]
            except TypeError:
                return NotImplemented
        return op_mul(self, other)

    def __rmul__(self, other: Union[DiffPoly, Scalar]) -> "OpPoly":
        c = DiffPoly.coerce(other)
        return OpPoly({deg: c * v for deg, v in self._terms.items()})

    def __pow__(self, k: int) -> "OpPoly":
        out = OpPoly.const(1)
        for _ in range(k):
            out = out * self
        return out

    def map_coefficients(self, fn) -> "OpPoly":
        return OpPoly({deg: fn(c) for deg, c in self._terms.items()})

    def divide_h(self) -> "OpPoly":
        """Multiply every coefficient by h⁻¹ (LocalizationError if impossible)."""
        return self.map_coefficients(lambda c: c.shift_h(-1))


@lru_cache(maxsize=None)
def _binomials(a: int, b: int) -> Tuple[Tuple[int, int, int], ...]:
    return tuple((i, j, comb(a, i) * comb(b, j)) for i in range(a + 1) for j in range(b + 1))


def move_right(a: int, b: int, c: DiffPoly) -> Dict[Degree, DiffPoly]:
    """(h∂)^a (h∂̄)^b · c = Σ C(a,i) C(b,j) h^{i+j} (∂^i ∂̄^j c) (h∂)^{a−i} (h∂̄)^{b−j}."""
    out: Dict[Degree, DiffPoly] = {}
    derivs: Dict[Tuple[int, int], DiffPoly] = {(0, 0): c}
    for i, j, binom in _binomials(a, b):
        if (i, j) not in derivs:
            derivs[(i, j)] = derivs[(i, j - 1)].dbar() if j else derivs[(i - 1, j)].d()
        dc = derivs[(i, j)]
        if dc:
            out[(a - i, b - j)] = dc.shift_h(i + j).scale(binom)
    return out


def op_mul(x: OpPoly, y: OpPoly) -> OpPoly:
    """Associative product, normal-ordered by (h∂)c = c(h∂) + h(∂c)."""
    acc: Dict[Degree, DiffPoly] = {}
    for (a1, b1), c1 in x.items():
        for (a2, b2), c2 in y.items():
            for (a, b), moved in move_right(a1, b1, c2).items():
                deg = (a + a2, b + b2)
                term = c1 * moved
                acc[deg] = acc[deg] + term if deg in acc else term
    return OpPoly({k: v for k, v in acc.items() if v})


def commutator(x: OpPoly, y: OpPoly) -> OpPoly:
    return op_mul(x, y) - op_mul(y, x)
