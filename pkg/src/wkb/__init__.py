"""
WKB analysis of the flat-section system

The exponential ansatz, the integer-power recursion and its failures, and the
rational expansion in h^{1/n} that produces conditions (𝒞) and the higher
orders of μ̂.
"""

from .ansatz import (
    AnsatzExpansion,
    exp_ansatz,
    flat_section_equations,
    phase_symbol,
    rational_phase,
)
from .classic import (
    classic_recursion,
    integer_ansatz_shifted_n2,
    sqrt_symbol,
    unshifted_compat_n3,
)
from .rational import (
    RationalWKB,
    WKBState,
    generic_system,
    rational_expand,
    remainders,
    solve_mu_higher,
)
from .routes import compare_routes

__all__ = [
    "AnsatzExpansion",
    "RationalWKB",
    "WKBState",
    "classic_recursion",
    "compare_routes",
    "exp_ansatz",
    "flat_section_equations",
    "generic_system",
    "integer_ansatz_shifted_n2",
    "phase_symbol",
    "rational_expand",
    "rational_phase",
    "remainders",
    "solve_mu_higher",
    "sqrt_symbol",
    "unshifted_compat_n3",
]
