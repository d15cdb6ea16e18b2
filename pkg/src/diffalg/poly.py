"""
Differential polynomials with exact rational coefficients.

A DiffPoly is a normalized map Monomial → Fraction. Monomials carry a sorted
tuple of (DerivedGen, exponent) factors and a rational power of h. Values are
immutable; every operation returns a new normalized DiffPoly.
"""

from fractions import Fraction
from types import MappingProxyType
from typing import (
    Callable,
    Dict,
    Iterable,
    Iterator,
    List,
    Mapping,
    NamedTuple,
    Optional,
    Set,
    Tuple,
    Union,
)

from ..errors import LocalizationError
from .generators import DerivedGen, GeneratorId, GenKind, get_registry

Scalar = Union[int, Fraction]
Factors = Tuple[Tuple[DerivedGen, int], ...]

ZERO_H = Fraction(0)


class Monomial(NamedTuple):
    """Product of derived generators times h^h."""

    factors: Factors = ()
    h: Fraction = ZERO_H

    def t_degree(self) -> int:
        """Total exponent over T-kind derived generators."""
        return sum(e for g, e in self.factors if g.base.kind == GenKind.T)

    def exponent_of(self, dg: DerivedGen) -> int:
        for g, e in self.factors:
            if g == dg:
                return e
        return 0

    def without(self, dg: DerivedGen) -> "Monomial":
        return Monomial(tuple((g, e) for g, e in self.factors if g != dg), self.h)


ONE_MONOMIAL = Monomial()


def _merge(f1: Factors, f2: Factors) -> Factors:
    if not f1:
        return f2
    if not f2:
        return f1
    acc: Dict[DerivedGen, int] = dict(f1)
    negative = False
    for g, e in f2:
        ne = acc.get(g, 0) + e
        if ne:
            acc[g] = ne
            negative = negative or ne < 0
        else:
            del acc[g]
    if negative:
        registry = get_registry()
        for g, e in acc.items():
            if e < 0:
                registry.check_inverse(g)
    return tuple(sorted(acc.items()))


def mul_monomials(m1: Monomial, m2: Monomial) -> Monomial:
    return Monomial(_merge(m1.factors, m2.factors), m1.h + m2.h)


def _as_fraction(c: Scalar) -> Fraction:
    return c if isinstance(c, Fraction) else Fraction(c)


class DiffPoly:
    """Element of the localized differential polynomial ring over ℚ[h^{1/n}]."""

    __slots__ = ("_terms", "_hash")

    def __init__(self, terms: Optional[Mapping[Monomial, Scalar]] = None):
        clean: Dict[Monomial, Fraction] = {}
        if terms:
            for m, c in terms.items():
                if c:
                    clean[m] = _as_fraction(c)
        self._terms = clean
        self._hash: Optional[int] = None

    @classmethod
    def _wrap(cls, terms: Dict[Monomial, Fraction]) -> "DiffPoly":
        obj = cls.__new__(cls)
        obj._terms = terms
        obj._hash = None
        return obj

    # -- constructors ------------------------------------------------------

    @classmethod
    def zero(cls) -> "DiffPoly":
        return cls._wrap({})

    @classmethod
    def const(cls, c: Scalar) -> "DiffPoly":
        return cls._wrap({ONE_MONOMIAL: _as_fraction(c)} if c else {})

    @classmethod
    def h(cls, exponent: Scalar = 1, coeff: Scalar = 1) -> "DiffPoly":
        """coeff · h^exponent."""
        q = _as_fraction(exponent)
        if q < 0:
            raise LocalizationError("h is not invertible")
        return cls._wrap({Monomial((), q): _as_fraction(coeff)} if coeff else {})

    @classmethod
    def of(cls, dg: Union[DerivedGen, GeneratorId], exponent: int = 1) -> "DiffPoly":
        """Single derived generator to a power."""
        if isinstance(dg, GeneratorId):
            dg = DerivedGen(dg)
        if exponent == 0:
            return cls.const(1)
        if exponent < 0:
            get_registry().check_inverse(dg)
        return cls._wrap({Monomial(((dg, exponent),), ZERO_H): Fraction(1)})

    @classmethod
    def coerce(cls, x: Union["DiffPoly", Scalar]) -> "DiffPoly":
        if isinstance(x, DiffPoly):
            return x
        if isinstance(x, (int, Fraction)):
            return cls.const(x)
        raise TypeError(f"cannot use {type(x).__name__} as a DiffPoly")

    # -- inspection --------------------------------------------------------

    @property
    def terms(self) -> Mapping[Monomial, Fraction]:
        return MappingProxyType(self._terms)

    def items(self) -> Iterator[Tuple[Monomial, Fraction]]:
        return iter(self._terms.items())

    def sorted_terms(self) -> List[Tuple[Monomial, Fraction]]:
        """Canonical order: h-exponent, then factors."""
        return sorted(self._terms.items(), key=lambda mc: (mc[0].h, mc[0].factors))

    def __len__(self) -> int:
        return len(self._terms)

    def __bool__(self) -> bool:
        return bool(self._terms)

    def is_zero(self) -> bool:
        return not self._terms

    def is_constant(self) -> bool:
        return all(m == ONE_MONOMIAL for m in self._terms)

    def constant_value(self) -> Fraction:
        return self._terms.get(ONE_MONOMIAL, Fraction(0))

    def is_monomial(self) -> bool:
        return len(self._terms) == 1

    def generators(self) -> Set[DerivedGen]:
        return {g for m in self._terms for g, _ in m.factors}

    def base_generators(self) -> Set[GeneratorId]:
        return {g.base for g in self.generators()}

    def mentions(self, gen: GeneratorId) -> bool:
        return any(g.base == gen for m in self._terms for g, _ in m.factors)

    def h_exponents(self) -> List[Fraction]:
        return sorted({m.h for m in self._terms})

    def min_h(self) -> Optional[Fraction]:
        return min((m.h for m in self._terms), default=None)

    # -- ring operations ---------------------------------------------------

    def __add__(self, other: Union["DiffPoly", Scalar]) -> "DiffPoly":
        if not isinstance(other, (DiffPoly, int, Fraction)):
            return NotImplemented
        other = DiffPoly.coerce(other)
        if not other._terms:
            return self
        if not self._terms:
            return other
        acc = dict(self._terms)
        for m, c in other._terms.items():
            nc = acc.get(m, 0) + c
            if nc:
                acc[m] = nc
            else:
                del acc[m]
        return DiffPoly._wrap(acc)

    __radd__ = __add__

    def __neg__(self) -> "DiffPoly":
        return DiffPoly._wrap({m: -c for m, c in self._terms.items()})

    def __sub__(self, other: Union["DiffPoly", Scalar]) -> "DiffPoly":
        if not isinstance(other, (DiffPoly, int, Fraction)):
            return NotImplemented
        return self + (-DiffPoly.coerce(other))

    def __rsub__(self, other: Scalar) -> "DiffPoly":
        return DiffPoly.coerce(other) + (-self)

    def scale(self, c: Scalar) -> "DiffPoly":
        c = _as_fraction(c)
        if not c:
            return DiffPoly.zero()
        return DiffPoly._wrap({m: v * c for m, v in self._terms.items()})

    def __mul__(self, other: Union["DiffPoly", Scalar]) -> "DiffPoly":
        if isinstance(other, (int, Fraction)):
            return self.scale(other)
        if not isinstance(other, DiffPoly):
            return NotImplemented
        if not self._terms or not other._terms:
            return DiffPoly.zero()
        acc: Dict[Monomial, Fraction] = {}
        for m1, c1 in self._terms.items():
            for m2, c2 in other._terms.items():
                m = mul_monomials(m1, m2)
                nc = acc.get(m, 0) + c1 * c2
                if nc:
                    acc[m] = nc
                else:
                    del acc[m]
        return DiffPoly._wrap(acc)

    def __rmul__(self, other: Scalar) -> "DiffPoly":
        return self.scale(other)

    def __pow__(self, k: int) -> "DiffPoly":
        if k < 0:
            return self.inverse() ** (-k)
        result = DiffPoly.const(1)
        base = self
        while k:
            if k & 1:
                result = result * base
            k >>= 1
            if k:
                base = base * base
        return result

    def inverse(self) -> "DiffPoly":
        """Inverse of a single monomial with invertible factors."""
        if len(self._terms) != 1:
            raise LocalizationError("only single monomials can be inverted")
        (m, c), = self._terms.items()
        if m.h:
            raise LocalizationError("h is not invertible")
        registry = get_registry()
        for g, _ in m.factors:
            registry.check_inverse(g)
        inv = Monomial(tuple((g, -e) for g, e in m.factors), ZERO_H)
        return DiffPoly._wrap({inv: 1 / c})

    def __truediv__(self, other: Union["DiffPoly", Scalar]) -> "DiffPoly":
        if isinstance(other, (int, Fraction)):
            return self.scale(Fraction(1) / _as_fraction(other))
        return self * other.inverse()

    def divide_monomial(self, unit: "DiffPoly") -> "DiffPoly":
        """Exact division by c·h^a·M with M an invertible monomial."""
        if len(unit._terms) != 1:
            raise LocalizationError("divisor must be a single monomial")
        (m, c), = unit._terms.items()
        rest = DiffPoly._wrap({Monomial(m.factors, ZERO_H): c})
        return self.shift_h(-m.h) * rest.inverse()

    def __eq__(self, other: object) -> bool:
        if isinstance(other, (int, Fraction)):
            other = DiffPoly.const(other)
        if not isinstance(other, DiffPoly):
            return NotImplemented
        return self._terms == other._terms

    def __hash__(self) -> int:
        if self._hash is None:
            self._hash = hash(frozenset(self._terms.items()))
        return self._hash

    def __repr__(self) -> str:
        from .codec import to_text

        return f"DiffPoly({to_text(self)})"

    def __str__(self) -> str:
        from .codec import to_text

        return to_text(self)

    # -- derivations -------------------------------------------------------

    def _derive(self, step: Callable[[DerivedGen], DerivedGen]) -> "DiffPoly":
        acc: Dict[Monomial, Fraction] = {}
        for m, c in self._terms.items():
            for idx, (g, e) in enumerate(m.factors):
                rest = m.factors[:idx] + m.factors[idx + 1 :]
                if e != 1:
                    rest = _merge(rest, ((g, e - 1),))
                nm = Monomial(_merge(rest, ((step(g), 1),)), m.h)
                nc = acc.get(nm, 0) + c * e
                if nc:
                    acc[nm] = nc
                else:
                    del acc[nm]
        return DiffPoly._wrap(acc)

    def d(self) -> "DiffPoly":
        """Holomorphic derivation ∂ (h is a constant)."""
        return self._derive(DerivedGen.d)

    def dbar(self) -> "DiffPoly":
        """Antiholomorphic derivation ∂̄."""
        return self._derive(DerivedGen.dbar)

    def derive(self, a: int = 0, b: int = 0) -> "DiffPoly":
        out = self
        for _ in range(a):
            out = out.d()
        for _ in range(b):
            out = out.dbar()
        return out

    # -- substitution ------------------------------------------------------

    def substitute(self, target: GeneratorId, value: "DiffPoly") -> "DiffPoly":
        """
        Replace every ∂^a∂̄^b target by ∂^a∂̄^b value.

        Negative powers of target require value to be an invertible monomial.
        """
        value = DiffPoly.coerce(value)
        if not self.mentions(target):
            return self
        cache: Dict[Tuple[int, int], DiffPoly] = {(0, 0): value}

        def derived(a: int, b: int) -> DiffPoly:
            key = (a, b)
            if key not in cache:
                if b > 0:
                    cache[key] = derived(a, b - 1).dbar()
                else:
                    cache[key] = derived(a - 1, b).d()
            return cache[key]

        def replace(dg: DerivedGen) -> Optional[DiffPoly]:
            return derived(dg.a, dg.b) if dg.base == target else None

        return self.replace_factors(replace)

    def replace_factors(self, replace: Callable[[DerivedGen], Optional["DiffPoly"]]) -> "DiffPoly":
        """
        Rebuild the polynomial, swapping derived generators for which `replace`
        returns a value (exponents are applied to the replacement).
        """
        result: Dict[Monomial, Fraction] = {}
        powers: Dict[Tuple[DerivedGen, int], DiffPoly] = {}
        for m, c in self._terms.items():
            keep: List[Tuple[DerivedGen, int]] = []
            swapped: List[DiffPoly] = []
            for g, e in m.factors:
                val = replace(g)
                if val is None:
                    keep.append((g, e))
                    continue
                key = (g, e)
                if key not in powers:
                    if e < 0 and not val.is_monomial():
                        raise LocalizationError(
                            f"cannot invert the value substituted for {g.base.label}"
                        )
                    powers[key] = val ** e
                swapped.append(powers[key])
            if not swapped:
                nc = result.get(m, 0) + c
                if nc:
                    result[m] = nc
                else:
                    del result[m]
                continue
            part = DiffPoly._wrap({Monomial(tuple(keep), m.h): c})
            for val in swapped:
                part = part * val
                if not part:
                    break
            for pm, pc in part._terms.items():
                nc = result.get(pm, 0) + pc
                if nc:
                    result[pm] = nc
                else:
                    del result[pm]
        return DiffPoly._wrap(result)

    # -- gradings ----------------------------------------------------------

    def h_parts(self) -> Dict[Fraction, "DiffPoly"]:
        """Split by h-exponent: {q: coefficient of h^q}."""
        parts: Dict[Fraction, Dict[Monomial, Fraction]] = {}
        for m, c in self._terms.items():
            parts.setdefault(m.h, {})[Monomial(m.factors, ZERO_H)] = c
        return {q: DiffPoly._wrap(t) for q, t in sorted(parts.items())}

    def h_part(self, q: Scalar) -> "DiffPoly":
        """Coefficient of h^q (as an h-free polynomial)."""
        q = _as_fraction(q)
        return DiffPoly._wrap(
            {Monomial(m.factors, ZERO_H): c for m, c in self._terms.items() if m.h == q}
        )

    def shift_h(self, q: Scalar) -> "DiffPoly":
        """Multiply by h^q (q may be negative if every term allows it)."""
        q = _as_fraction(q)
        out: Dict[Monomial, Fraction] = {}
        for m, c in self._terms.items():
            nh = m.h + q
            if nh < 0:
                raise LocalizationError(f"h-exponent {nh} would become negative")
            out[Monomial(m.factors, nh)] = c
        return DiffPoly._wrap(out)

    def truncate_h(self, max_exp: Optional[Scalar]) -> "DiffPoly":
        """Drop terms with h-exponent above max_exp (None means no bound)."""
        if max_exp is None:
            return self
        q = _as_fraction(max_exp)
        if q < 0:
            raise ValueError("maxExp must be non-negative")
        return DiffPoly._wrap({m: c for m, c in self._terms.items() if m.h <= q})

    def truncate_t_degree(self, max_deg: int) -> "DiffPoly":
        """Drop monomials of total t-degree above max_deg."""
        if max_deg < 0:
            raise ValueError("maxDeg must be non-negative")
        return DiffPoly._wrap({m: c for m, c in self._terms.items() if m.t_degree() <= max_deg})

    def mod_t_squared(self) -> "DiffPoly":
        return self.truncate_t_degree(1)

    def degree_in(self, gen: Union[GeneratorId, DerivedGen]) -> int:
        """Maximal exponent of gen (a GeneratorId counts all its derivatives)."""
        best = 0
        for m in self._terms:
            if isinstance(gen, DerivedGen):
                total = m.exponent_of(gen)
            else:
                total = sum(e for g, e in m.factors if g.base == gen)
            best = max(best, total)
        return best

    def coefficient_of(self, dg: Union[DerivedGen, GeneratorId]) -> Tuple["DiffPoly", "DiffPoly"]:
        """
        Affine decomposition x = coeff · dg + rest, rest free of dg.

        Raises ValueError when dg occurs with an exponent other than 0 or 1.
        """
        if isinstance(dg, GeneratorId):
            dg = DerivedGen(dg)
        coeff: Dict[Monomial, Fraction] = {}
        rest: Dict[Monomial, Fraction] = {}
        for m, c in self._terms.items():
            e = m.exponent_of(dg)
            if e == 0:
                rest[m] = c
            elif e == 1:
                coeff[m.without(dg)] = c
            else:
                raise ValueError(f"{dg.base.label} occurs with exponent {e}")
        return DiffPoly._wrap(coeff), DiffPoly._wrap(rest)

    def map_terms(self, keep: Callable[[Monomial], bool]) -> "DiffPoly":
        return DiffPoly._wrap({m: c for m, c in self._terms.items() if keep(m)})

    def partial(self, dg: DerivedGen) -> "DiffPoly":
        """Partial derivative in dg, all other derived generators held fixed."""
        parts = []
        for m, c in self._terms.items():
            e = m.exponent_of(dg)
            if not e:
                continue
            part = DiffPoly._wrap({m.without(dg): c * e})
            if e != 1:
                part = part * DiffPoly.of(dg, e - 1)
            parts.append(part)
        return poly_sum(parts)

    def linearize(self, variations: Mapping[GeneratorId, "DiffPoly"]) -> "DiffPoly":
        """First-order variation: Σ ∂x/∂(∂^a∂̄^b g) · ∂^a∂̄^b δg."""
        parts = []
        for dg in sorted(self.generators()):
            if dg.base in variations:
                parts.append(self.partial(dg) * variations[dg.base].derive(dg.a, dg.b))
        return poly_sum(parts)


def gen(dg: Union[DerivedGen, GeneratorId], exponent: int = 1) -> DiffPoly:
    return DiffPoly.of(dg, exponent)


def poly_sum(items: Iterable[DiffPoly]) -> DiffPoly:
    acc: Dict[Monomial, Fraction] = {}
    for p in items:
        for m, c in p.items():
            nc = acc.get(m, 0) + c
            if nc:
                acc[m] = nc
            else:
                del acc[m]
    return DiffPoly._wrap(acc)


def add(x: DiffPoly, y: DiffPoly) -> DiffPoly:
    return x + y


def mul(x: DiffPoly, y: DiffPoly) -> DiffPoly:
    return x * y


def d(x: DiffPoly) -> DiffPoly:
    return x.d()


def dbar(x: DiffPoly) -> DiffPoly:
    return x.dbar()


def substitute(x: DiffPoly, target: GeneratorId, value: DiffPoly) -> DiffPoly:
    return x.substitute(target, value)


def h_parts(x: DiffPoly) -> Dict[Fraction, DiffPoly]:
    return x.h_parts()


def truncate_h(x: DiffPoly, max_exp: Optional[Scalar]) -> DiffPoly:
    return x.truncate_h(max_exp)


def truncate_t_degree(x: DiffPoly, max_deg: int) -> DiffPoly:
    return x.truncate_t_degree(max_deg)
