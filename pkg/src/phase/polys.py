"""
Fiber polynomials in p, p̄ with DiffPoly coefficients, and the Poisson bracket
of the cotangent bundle in the coordinates (z, z̄, p, p̄).
"""

from typing import Callable, Dict, Iterator, List, Mapping, Optional, Tuple, Union

from ..diffalg import DiffPoly
from ..diffalg.poly import Scalar

Degree = Tuple[int, int]


class PhasePoly:
    """Σ c_{i,j} p^i p̄^j with c_{i,j} ∈ DiffPoly; immutable."""

    __slots__ = ("_terms",)

    def __init__(self, terms: Optional[Mapping[Degree, Union[DiffPoly, Scalar]]] = None):
        clean: Dict[Degree, DiffPoly] = {}
        for deg, c in (terms or {}).items():
            if deg[0] < 0 or deg[1] < 0:
                raise ValueError(f"negative fiber degree {deg}")
            c = DiffPoly.coerce(c)
            if c:
                clean[deg] = clean[deg] + c if deg in clean else c
        self._terms = {k: v for k, v in clean.items() if v}

    @classmethod
    def p(cls, power: int = 1) -> "PhasePoly":
        return cls({(power, 0): 1})

    @classmethod
    def pbar(cls, power: int = 1) -> "PhasePoly":
        return cls({(0, power): 1})

    @classmethod
    def const(cls, c: Union[DiffPoly, Scalar]) -> "PhasePoly":
        return cls({(0, 0): c})

    @classmethod
    def from_p_coefficients(cls, coeffs: Mapping[int, DiffPoly]) -> "PhasePoly":
        """{i: c_i} ↦ Σ c_i p^i."""
        return cls({(i, 0): c for i, c in coeffs.items()})

    @classmethod
    def coerce(cls, x: Union["PhasePoly", DiffPoly, Scalar]) -> "PhasePoly":
        return x if isinstance(x, PhasePoly) else cls.const(x)

    # -- inspection --------------------------------------------------------

    def items(self) -> Iterator[Tuple[Degree, DiffPoly]]:
        return iter(sorted(self._terms.items()))

    def coeff(self, i: int, j: int = 0) -> DiffPoly:
        return self._terms.get((i, j), DiffPoly.zero())

    def p_coefficients(self, n: int) -> List[DiffPoly]:
        """[c_0, …, c_{n-1}] of a p̄-free polynomial."""
        return [self.coeff(i) for i in range(n)]

    @property
    def p_degree(self) -> int:
        return max((i for i, _ in self._terms), default=-1)

    @property
    def pbar_degree(self) -> int:
        return max((j for _, j in self._terms), default=-1)

    def is_zero(self) -> bool:
        return not self._terms

    def __bool__(self) -> bool:
        return bool(self._terms)

    def __eq__(self, other: object) -> bool:
        if not isinstance(other, PhasePoly):
            try:
                other = PhasePoly.coerce(DiffPoly.coerce(other))  # type: ignore[arg-type]
            except TypeError:
                return NotImplemented
        if not isinstance(other, PhasePoly):
            return NotImplemented
        return self._terms == other._terms

    def __hash__(self) -> int:
        return hash(frozenset(self._terms.items()))

    def __repr__(self) -> str:
        return f"PhasePoly({self})"

    def __str__(self) -> str:
        from .render import phase_to_text

        return phase_to_text(self)

    # -- arithmetic --------------------------------------------------------

    def __add__(self, other: Union["PhasePoly", DiffPoly, Scalar]) -> "PhasePoly":
        other = PhasePoly.coerce(other)
        acc = dict(self._terms)
        for deg, c in other._terms.items():
            acc[deg] = acc[deg] + c if deg in acc else c
        return PhasePoly(acc)

    __radd__ = __add__

    def __neg__(self) -> "PhasePoly":
        return PhasePoly({deg: -c for deg, c in self._terms.items()})

    def __sub__(self, other: Union["PhasePoly", DiffPoly, Scalar]) -> "PhasePoly":
        return self + (-PhasePoly.coerce(other))

    def __rsub__(self, other: Union[DiffPoly, Scalar]) -> "PhasePoly":
        return PhasePoly.coerce(other) + (-self)

    def __mul__(self, other: Union["PhasePoly", DiffPoly, Scalar]) -> "PhasePoly":
        if not isinstance(other, PhasePoly):
            try:
                c = DiffPoly.coerce(other)
            except TypeError:
                return NotImplemented
            return PhasePoly({deg: v * c for deg, v in self._terms.items()})
        acc: Dict[Degree, DiffPoly] = {}
        for (i1, j1), c1 in self._terms.items():
            for (i2, j2), c2 in other._terms.items():
                deg = (i1 + i2, j1 + j2)
                prod = c1 * c2
                acc[deg] = acc[deg] + prod if deg in acc else prod
        return PhasePoly(acc)

    def __rmul__(self, other: Union[DiffPoly, Scalar]) -> "PhasePoly":
        return self * other

    def __pow__(self, k: int) -> "PhasePoly":
        if k < 0:
            raise ValueError("fiber variables are not invertible")
        out = PhasePoly.const(1)
        for _ in range(k):
            out = out * self
        return out

    def map_coefficients(self, fn: Callable[[DiffPoly], DiffPoly]) -> "PhasePoly":
        return PhasePoly({deg: fn(c) for deg, c in self._terms.items()})

    # -- partial derivatives -----------------------------------------------

    def d_z(self) -> "PhasePoly":
        return self.map_coefficients(DiffPoly.d)

    def d_zbar(self) -> "PhasePoly":
        return self.map_coefficients(DiffPoly.dbar)

    def d_p(self) -> "PhasePoly":
        return PhasePoly({(i - 1, j): c.scale(i) for (i, j), c in self._terms.items() if i})

    def d_pbar(self) -> "PhasePoly":
        return PhasePoly({(i, j - 1): c.scale(j) for (i, j), c in self._terms.items() if j})


def poisson_bracket(f: PhasePoly, g: PhasePoly, sign: int = 1) -> PhasePoly:
    """
    {f, g} = f_p ∂g − ∂f g_p + f_p̄ ∂̄g − ∂̄f g_p̄.

    Args:
        f: First argument
        g: Second argument
        sign: Orientation of the symplectic form (+1 or -1)

    Returns:
        The bracket as a PhasePoly
    """
    out = f.d_p() * g.d_z() - f.d_z() * g.d_p() + f.d_pbar() * g.d_zbar() - f.d_zbar() * g.d_pbar()
    return out if sign == 1 else -out
