"""
Differential polynomial ring

Exact-rational polynomials in derived tensor generators with commuting
derivations ∂, ∂̄, a formal parameter h with rational exponents, and
localization at designated invertible generators.
"""

from .codec import from_json, generator_from_label, to_json, to_latex, to_text
from .generators import (
    DerivedGen,
    GeneratorId,
    GeneratorRegistry,
    GenKind,
    get_registry,
    reset_registry,
)
from .poly import (
    DiffPoly,
    Monomial,
    add,
    d,
    dbar,
    h_parts,
    mul,
    poly_sum,
    substitute,
    truncate_h,
    truncate_t_degree,
)
from .rules import DerivativeRules, RootAdjunction
from .symbols import derived, fcoef, gen_id, generic, h, ham, jet, lam, make_gen, mu, proj, t

__all__ = [
    "DerivedGen",
    "DerivativeRules",
    "DiffPoly",
    "GenKind",
    "GeneratorId",
    "GeneratorRegistry",
    "Monomial",
    "RootAdjunction",
    "add",
    "d",
    "dbar",
    "derived",
    "fcoef",
    "from_json",
    "gen_id",
    "generator_from_label",
    "generic",
    "get_registry",
    "h",
    "h_parts",
    "ham",
    "jet",
    "lam",
    "make_gen",
    "mu",
    "mul",
    "poly_sum",
    "proj",
    "reset_registry",
    "substitute",
    "t",
    "to_json",
    "to_latex",
    "to_text",
    "truncate_h",
    "truncate_t_degree",
]
