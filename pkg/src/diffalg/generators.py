"""
Generators of the differential polynomial ring and their registry.

A generator is identified by its kind and indices; its weight (holomorphic,
antiholomorphic tensor type) and invertibility live in the registry.
"""

import logging
import threading
from enum import IntEnum
from typing import Dict, NamedTuple, Optional, Set, Tuple

from ..errors import LocalizationError, RegistryConflictError

logger = logging.getLogger(__name__)


class GenKind(IntEnum):
    """Generator kinds; the integer value fixes the canonical factor order."""

    T = 0  # t_k^{(i)}
    MU = 1  # μ_k^{(i)}
    LAMBDA = 2  # λ = ∂s_{1/n}
    JET = 3  # w_i, jet of a coordinate change
    HAM = 4  # v_k, Hamiltonian coefficient
    FCOEF = 5  # f_k^{(l)}, reparametrization coefficient
    PROJ = 6  # projective (uniformizing) term
    GENERIC = 7  # named auxiliary symbol


class GeneratorId(NamedTuple):
    """Underived generator: kind, integer indices and (for GENERIC) a name."""

    kind: GenKind
    indices: Tuple[int, ...] = ()
    name: str = ""

    @property
    def label(self) -> str:
        """ASCII surface name used by the expression language and JSON."""
        k = self.kind
        if k == GenKind.T:
            base, order = self.indices
            return f"t{base}" if order == 0 else f"t{base}_{order}"
        if k == GenKind.MU:
            base, order = self.indices
            return f"mu{base}" if order == 0 else f"mu{base}_{order}"
        if k == GenKind.LAMBDA:
            return "lam"
        if k == GenKind.JET:
            return f"w{self.indices[0]}"
        if k == GenKind.HAM:
            return f"v{self.indices[0]}"
        if k == GenKind.FCOEF:
            return f"f{self.indices[0]}_{self.indices[1]}"
        if k == GenKind.PROJ:
            return "proj"
        return self.name


class DerivedGen(NamedTuple):
    """∂^a ∂̄^b applied to an underived generator."""

    base: GeneratorId
    a: int = 0
    b: int = 0

    def d(self) -> "DerivedGen":
        return DerivedGen(self.base, self.a + 1, self.b)

    def dbar(self) -> "DerivedGen":
        return DerivedGen(self.base, self.a, self.b + 1)

    @property
    def is_t(self) -> bool:
        return self.base.kind == GenKind.T


def default_weight(gen: GeneratorId) -> Tuple[int, int]:
    """Tensor type of a generator when none is given explicitly."""
    k = gen.kind
    if k == GenKind.T:
        return (gen.indices[0], 0)
    if k == GenKind.MU:
        return (1 - gen.indices[0], 1)
    if k == GenKind.LAMBDA:
        return (1, 0)
    if k == GenKind.HAM:
        return (1 - gen.indices[0], 0)
    if k == GenKind.PROJ:
        return (2, 0)
    return (0, 0)


def validate_indices(kind: GenKind, indices: Tuple[int, ...], n: Optional[int] = None) -> None:
    """Reject malformed index tuples (2 ≤ k ≤ n for T/MU, orders ≥ 0)."""
    expected = {
        GenKind.T: 2,
        GenKind.MU: 2,
        GenKind.LAMBDA: 0,
        GenKind.JET: 1,
        GenKind.HAM: 1,
        GenKind.FCOEF: 2,
        GenKind.PROJ: 0,
        GenKind.GENERIC: 0,
    }[kind]
    if len(indices) != expected:
        raise ValueError(f"{kind.name} takes {expected} indices, got {indices}")
    if any(i < 0 for i in indices):
        raise ValueError(f"negative index in {indices}")
    if kind in (GenKind.T, GenKind.MU):
        k = indices[0]
        low = 1 if kind == GenKind.MU else 2
        if k < low or (n is not None and k > n):
            raise ValueError(f"{kind.name} index k={k} outside {low}..{n}")
    if kind == GenKind.JET and indices[0] < 1:
        raise ValueError("jet index starts at 1")
    if kind == GenKind.HAM and indices[0] < 1:
        raise ValueError("Hamiltonian index starts at 1")


class GeneratorRegistry:
    """
    Append-only record of generator weights and invertibility.

    Invertible by construction: λ, w₁, GENERIC symbols registered as invertible,
    and t_n (underived, order 0) when t_n-localization is enabled. Using a
    negative power of t_n flips `tn_localization_used`.
    """

    def __init__(self, n: Optional[int] = None, localize_tn: bool = True):
        self.n = n
        self.localize_tn = localize_tn
        self.tn_localization_used = False
        self._weights: Dict[GeneratorId, Tuple[int, int]] = {}
        self._invertible: Set[GeneratorId] = set()
        self._ranks: Set[int] = set() if n is None else {n}
        self._lock = threading.Lock()

    def register(
        self,
        gen: GeneratorId,
        weight: Optional[Tuple[int, int]] = None,
        invertible: bool = False,
    ) -> GeneratorId:
        """Record a generator; conflicting weights are rejected."""
        if gen.kind != GenKind.GENERIC:
            validate_indices(gen.kind, gen.indices, self.n)
        w = tuple(weight) if weight is not None else default_weight(gen)
        with self._lock:
            known = self._weights.get(gen)
            if known is not None and known != w:
                raise RegistryConflictError(
                    f"{gen.label} already registered with weight {known}, not {w}"
                )
            self._weights[gen] = w  # type: ignore[assignment]
            if invertible:
                self._invertible.add(gen)
        return gen

    def weight(self, gen: GeneratorId) -> Tuple[int, int]:
        return self._weights.get(gen, default_weight(gen))

    def is_registered(self, gen: GeneratorId) -> bool:
        return gen in self._weights

    def declare_rank(self, n: int) -> None:
        """Make t_n of this rank eligible for localization."""
        with self._lock:
            self._ranks.add(n)

    def is_tn(self, gen: GeneratorId) -> bool:
        return gen.kind == GenKind.T and gen.indices[1] == 0 and gen.indices[0] in self._ranks

    def is_invertible(self, dg: DerivedGen) -> bool:
        """Only underived generators can carry negative exponents."""
        if dg.a or dg.b:
            return False
        gen = dg.base
        if gen.kind == GenKind.LAMBDA:
            return True
        if gen.kind == GenKind.JET and gen.indices == (1,):
            return True
        if self.is_tn(gen):
            return self.localize_tn
        return gen in self._invertible

    def check_inverse(self, dg: DerivedGen) -> None:
        """Raise unless dg may appear with a negative exponent."""
        if not self.is_invertible(dg):
            if self.is_tn(dg.base) and not (dg.a or dg.b):
                raise LocalizationError(f"division by {dg.base.label} while localization is off")
            raise LocalizationError(f"{dg.base.label} (∂^{dg.a}∂̄^{dg.b}) is not invertible")
        if self.is_tn(dg.base) and not self.tn_localization_used:
            logger.debug("t_n localization used for %s", dg.base.label)
            self.tn_localization_used = True

    def snapshot(self) -> Dict[str, Tuple[int, int]]:
        """Surface name → weight, for session records."""
        with self._lock:
            return {g.label: w for g, w in sorted(self._weights.items())}


# Global instance
_registry: Optional[GeneratorRegistry] = None


def get_registry() -> GeneratorRegistry:
    """Get or create the process-wide registry."""
    global _registry
    if _registry is None:
        _registry = GeneratorRegistry()
    return _registry


def reset_registry(n: Optional[int] = None, localize_tn: bool = True) -> GeneratorRegistry:
    """Replace the process-wide registry (new session or test)."""
    global _registry
    _registry = GeneratorRegistry(n=n, localize_tn=localize_tn)
    return _registry
