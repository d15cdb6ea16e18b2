"""
Phase space

Fiber polynomials in (p, p̄), the Poisson bracket, spectral ideals and
the conditions (𝒞).
"""

from .conditions import (
    BracketRoute,
    bracket_route,
    condition_C,
    conditions_C,
    conditions_via_bracket,
    hamiltonian,
    mu_free,
    strip_unit,
    variation_coefficients,
    vary_hamiltonian,
)
from .ideal import (
    Mu1Mode,
    SpectralIdeal,
    SpectralIdealSpec,
    SpectralVariant,
    mu1_formula,
    reduce_mod_I,
    spectral_ideal,
    spectral_polynomials,
)
from .polys import PhasePoly, poisson_bracket
from .render import phase_to_latex, phase_to_text

__all__ = [
    "BracketRoute",
    "Mu1Mode",
    "PhasePoly",
    "SpectralIdeal",
    "SpectralIdealSpec",
    "SpectralVariant",
    "bracket_route",
    "condition_C",
    "conditions_C",
    "conditions_via_bracket",
    "hamiltonian",
    "mu1_formula",
    "mu_free",
    "phase_to_latex",
    "phase_to_text",
    "poisson_bracket",
    "reduce_mod_I",
    "spectral_ideal",
    "spectral_polynomials",
    "strip_unit",
    "variation_coefficients",
    "vary_hamiltonian",
]
