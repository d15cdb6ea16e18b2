"""Evaluation of differential polynomials on a sample patch."""

import logging
from typing import Callable, Dict, Optional, Sequence

import numpy as np

from ..diffalg import DerivativeRules, DerivedGen, DiffPoly, GeneratorId, RootAdjunction, generic
from ..errors import BindingError
from .binding import BoundFunction, SampleBinding

logger = logging.getLogger(__name__)

Resolver = Callable[[DerivedGen], np.ndarray]


class PatchEvaluator:
    """
    Vectorized evaluation of DiffPoly on a fixed set of points.

    Jets of bound generators are computed once per evaluator and cached.
    """

    def __init__(self, binding: SampleBinding, points: Sequence[complex], epsilon: float = 1e-8):
        self.binding = binding
        self.points = np.atleast_1d(np.asarray(points, dtype=complex))
        self.epsilon = epsilon
        self._jets: Dict[DerivedGen, np.ndarray] = {}
        self._args: Dict[GeneratorId, DiffPoly] = {}
        self._roots: Dict[GeneratorId, DerivativeRules] = {}

    def __call__(self, x: DiffPoly, h: float = 1.0) -> np.ndarray:
        return self._evaluate(x, h, self.jet)

    def _evaluate(self, x: DiffPoly, h: float, resolve: Resolver) -> np.ndarray:
        out = np.zeros(self.points.shape, dtype=complex)
        for m, c in x.items():
            term = np.full(self.points.shape, float(c) * h ** float(m.h), dtype=complex)
            for dg, e in m.factors:
                values = resolve(dg)
                if e < 0:
                    self._guard(dg, values)
                term = term * values**e
            out = out + term
        return out

    def _guard(self, dg: DerivedGen, values: np.ndarray) -> None:
        if np.min(np.abs(values)) <= self.epsilon:
            raise BindingError(
                f"{dg.base.label} comes within {self.epsilon:g} of zero on the patch"
            )

    def jet(self, dg: DerivedGen) -> np.ndarray:
        """∂^a∂̄^b of a generator at every point."""
        if dg in self._jets:
            return self._jets[dg]
        fn = self.binding.lookup(dg.base.label)
        if fn is None:
            values = np.zeros(self.points.shape, dtype=complex)
        elif fn.kind == "poly":
            values = fn.poly_jet(dg.a, dg.b, self.points)
        else:
            values = self._branch_jet(dg, fn)
        self._jets[dg] = values
        return values

    def _argument(self, base: GeneratorId) -> DiffPoly:
        if base not in self._args:
            self._args[base] = generic(f"{base.label}_arg", invertible=True)
        return self._args[base]

    def _branch_jet(self, dg: DerivedGen, fn: BoundFunction) -> np.ndarray:
        arg = self._argument(dg.base)
        arg_base = next(iter(arg.base_generators()))

        def resolve(g: DerivedGen) -> np.ndarray:
            if g.base == arg_base:
                return fn.poly_jet(g.a, g.b, self.points)
            if g == DerivedGen(dg.base):
                return self.jet(g)
            raise BindingError(f"unexpected factor {g.base.label} in a branch derivative")

        if fn.kind == "inv":
            expr = arg**-1
            for _ in range(dg.a):
                expr = expr.d()
            for _ in range(dg.b):
                expr = expr.dbar()
            return self._evaluate(expr, 1.0, resolve)

        if dg.a == 0 and dg.b == 0:
            p = fn.poly_jet(0, 0, self.points)
            self._guard(dg, p)
            return np.sqrt(p)
        rules = self._roots.get(dg.base)
        if rules is None:
            rules = DerivativeRules([RootAdjunction(dg.base, 2, arg)])
            self._roots[dg.base] = rules
        return self._evaluate(rules.normalize(DiffPoly.of(dg)), 1.0, resolve)


def evaluate(
    x: DiffPoly, binding: SampleBinding, point: complex, h: float, epsilon: Optional[float] = None
) -> complex:
    """
    Value of x at one point for a given h.

    Raises:
        BindingError: unbound generator, or an inverted value within epsilon of zero
    """
    if h <= 0:
        raise BindingError("h must be positive")
    eps = epsilon if epsilon is not None else (binding.epsilon or 1e-8)
    return complex(PatchEvaluator(binding, [point], eps)(x, h)[0])
