"""
Differential operators

Operators in h∂ and h∂̄ over the differential polynomial ring, the scalar
system (D₁, D₂) with its left ideal, flatness constraints and variations.
"""

from .ops import OpPoly, commutator, op_mul
from .system import (
    Convention,
    SystemSpec,
    at_h_one,
    coefficient_deltas,
    default_tables,
    flatness_constraints,
    reduce_left_ideal,
    system_from_tables,
)
from .variation import (
    hamiltonian_variation,
    lift_hamiltonian,
    phase_variation,
    principal_symbol,
    semiclassical_compare,
    symbol_ideal,
)

__all__ = [
    "Convention",
    "OpPoly",
    "SystemSpec",
    "at_h_one",
    "coefficient_deltas",
    "commutator",
    "default_tables",
    "flatness_constraints",
    "hamiltonian_variation",
    "lift_hamiltonian",
    "op_mul",
    "phase_variation",
    "principal_symbol",
    "reduce_left_ideal",
    "semiclassical_compare",
    "symbol_ideal",
    "system_from_tables",
]
