"""
Sample bindings: generators as explicit functions of (z, z̄).

Polynomial bindings are stored as coefficient tables c[i, j] of z^i z̄^j, so
every jet ∂^a∂̄^b is exact. A generator may instead be bound to the principal
square root or the reciprocal of such a polynomial.
"""

import logging
from pathlib import Path
from typing import Dict, List, Literal, Optional, Tuple, Union

import numpy as np
from numpy.polynomial import polynomial as P
from pydantic import BaseModel, ConfigDict, Field, ValidationError, model_validator

from ..config import NumcheckSettings
from ..errors import BindingError

logger = logging.getLogger(__name__)


class PolyTerm(BaseModel):
    """One term c·z^z·z̄^zbar with c = re + i·im."""

    model_config = ConfigDict(frozen=True)

    z: int = Field(default=0, ge=0, description="Power of z")
    zbar: int = Field(default=0, ge=0, description="Power of z̄")
    re: float = Field(default=0.0, description="Real part of the coefficient")
    im: float = Field(default=0.0, description="Imaginary part of the coefficient")


class BoundFunction(BaseModel):
    """
    Value of one generator on the patch.

    kind="poly" is the polynomial itself; "sqrt" and "inv" apply the principal
    square root or the reciprocal to it.
    """

    model_config = ConfigDict(frozen=True)

    kind: Literal["poly", "sqrt", "inv"] = Field(default="poly", description="Function shape")
    terms: List[PolyTerm] = Field(default_factory=list, description="Polynomial in z, z̄")

    @model_validator(mode="before")
    @classmethod
    def accept_number(cls, data):
        if isinstance(data, (int, float)):
            return {"terms": [{"re": float(data)}]}
        return data

    @classmethod
    def polynomial(
        cls, coefficients: Dict[Tuple[int, int], Union[complex, float]], kind: str = "poly"
    ) -> "BoundFunction":
        """From {(i, j): c} meaning Σ c z^i z̄^j."""
        terms = [
            PolyTerm(z=i, zbar=j, re=complex(c).real, im=complex(c).imag)
            for (i, j), c in coefficients.items()
        ]
        return cls(kind=kind, terms=terms)

    @classmethod
    def constant(cls, c: Union[complex, float]) -> "BoundFunction":
        return cls.polynomial({(0, 0): c})

    def table(self) -> np.ndarray:
        """Coefficient array indexed [power of z, power of z̄]."""
        if not self.terms:
            return np.zeros((1, 1), dtype=complex)
        shape = (max(t.z for t in self.terms) + 1, max(t.zbar for t in self.terms) + 1)
        c = np.zeros(shape, dtype=complex)
        for term in self.terms:
            c[term.z, term.zbar] += complex(term.re, term.im)
        return c

    def poly_jet(self, a: int, b: int, z: np.ndarray) -> np.ndarray:
        """∂^a∂̄^b of the underlying polynomial at the points z."""
        c = self.table()
        if a:
            c = P.polyder(c, m=a, axis=0) if c.shape[0] > a else np.zeros((1, 1), dtype=complex)
        if b:
            c = P.polyder(c, m=b, axis=1) if c.shape[1] > b else np.zeros((1, 1), dtype=complex)
        return P.polyval2d(z, np.conj(z), c)


class SampleBinding(BaseModel):
    """
    Generator labels mapped to functions on a patch.

    Labels are the surface names of the expression language (t2, mu2_1, lam).
    Patch and h grid default to the numcheck settings when left unset.
    """

    model_config = ConfigDict(frozen=True)

    functions: Dict[str, BoundFunction] = Field(default_factory=dict)
    unbound: Literal["error", "zero"] = Field(
        default="error", description="Treatment of generators missing from functions"
    )
    patch: Optional[List[Tuple[float, float]]] = Field(
        default=None, description="Sample points as (re, im)"
    )
    h_grid: Optional[List[float]] = Field(default=None, description="Decreasing h values")
    epsilon: Optional[float] = Field(default=None, gt=0, description="Guard for invertibles")

    @classmethod
    def load(cls, path: Union[str, Path]) -> "SampleBinding":
        """Read a JSON binding file."""
        try:
            text = Path(path).read_text()
        except OSError as exc:
            raise BindingError(f"cannot read binding file {path}: {exc}") from exc
        try:
            binding = cls.model_validate_json(text)
        except ValidationError as exc:
            raise BindingError(f"invalid binding file {path}: {exc}") from exc
        logger.info("loaded binding for %s", sorted(binding.functions))
        return binding

    def lookup(self, label: str) -> Optional[BoundFunction]:
        fn = self.functions.get(label)
        if fn is None and self.unbound == "error":
            raise BindingError(f"generator {label} is not bound")
        return fn

    def is_bound(self, label: str) -> bool:
        return label in self.functions

    def points(self, settings: NumcheckSettings) -> np.ndarray:
        """The sample patch: explicit points, else a square grid from the settings."""
        if self.patch is not None:
            return np.array([complex(x, y) for x, y in self.patch])
        return grid_patch(settings)

    def resolve_h_grid(self, settings: NumcheckSettings) -> List[float]:
        return list(self.h_grid) if self.h_grid is not None else list(settings.h_grid)

    def resolve_epsilon(self, settings: NumcheckSettings) -> float:
        return self.epsilon if self.epsilon is not None else settings.epsilon


def grid_patch(settings: NumcheckSettings) -> np.ndarray:
    """patch_size × patch_size grid of side patch_width around patch_center."""
    size, half = settings.patch_size, settings.patch_width / 2
    center = settings.center
    if size == 1:
        return np.array([center])
    xs = np.linspace(center.real - half, center.real + half, size)
    ys = np.linspace(center.imag - half, center.imag + half, size)
    X, Y = np.meshgrid(xs, ys)
    return (X + 1j * Y).ravel()
