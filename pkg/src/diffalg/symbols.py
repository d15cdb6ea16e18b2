"""Constructors for generator polynomials."""

from typing import Optional, Tuple

from .generators import DerivedGen, GeneratorId, GenKind, get_registry
from .poly import DiffPoly


def make_gen(
    kind: GenKind,
    indices: Tuple[int, ...] = (),
    weight: Optional[Tuple[int, int]] = None,
    name: str = "",
    invertible: bool = False,
) -> DiffPoly:
    """
    Register a generator and return it as a degree-1 polynomial.

    Args:
        kind: Generator kind
        indices: Kind-specific indices, e.g. (k, i) for t_k^{(i)}
        weight: Tensor type; defaults to the kind's natural weight
        name: Symbol name for GENERIC generators
        invertible: Allow negative powers (GENERIC only)

    Returns:
        The polynomial consisting of the single generator
    """
    if kind == GenKind.GENERIC and not name:
        raise ValueError("generic generators need a name")
    gen = GeneratorId(kind, tuple(indices), name)
    get_registry().register(gen, weight, invertible)
    return DiffPoly.of(DerivedGen(gen))


def t(k: int, i: int = 0) -> DiffPoly:
    return make_gen(GenKind.T, (k, i))


def mu(k: int, i: int = 0) -> DiffPoly:
    return make_gen(GenKind.MU, (k, i))


def lam() -> DiffPoly:
    return make_gen(GenKind.LAMBDA)


def jet(i: int) -> DiffPoly:
    return make_gen(GenKind.JET, (i,))


def ham(k: int) -> DiffPoly:
    return make_gen(GenKind.HAM, (k,))


def fcoef(k: int, l: int) -> DiffPoly:  # noqa: E741
    return make_gen(GenKind.FCOEF, (k, l))


def proj() -> DiffPoly:
    return make_gen(GenKind.PROJ)


def generic(name: str, invertible: bool = False) -> DiffPoly:
    return make_gen(GenKind.GENERIC, (), name=name, invertible=invertible)


def h(exponent=1, coeff=1) -> DiffPoly:
    return DiffPoly.h(exponent, coeff)


def gen_id(p: DiffPoly) -> GeneratorId:
    """The underived generator of a single-generator polynomial."""
    gens = p.generators()
    if len(gens) != 1 or not p.is_monomial():
        raise ValueError(f"{p} is not a single generator")
    (dg,) = gens
    return dg.base


def derived(p: DiffPoly, a: int = 0, b: int = 0) -> DerivedGen:
    return DerivedGen(gen_id(p), a, b)
