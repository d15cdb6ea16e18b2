"""
Curvature-residual scaling of a truncated connection.

The curvature of a connection whose μ̂ orders were solved through level K is
formally O(h^{K/n+1}). On a binding that satisfies the solved rules, the
max-norm of F over the patch is fitted against h on a log-log scale.
"""

import logging
from fractions import Fraction
from typing import Dict, List, Optional, Sequence

import numpy as np

from ..config import NumcheckSettings, get_settings
from ..connection import MatrixConn, complete_connection, curvature
from ..diffalg import DerivativeRules, DerivedGen, DiffPoly
from ..diffop import Convention, SystemSpec
from ..errors import BindingError
from ..reports import ResidualReport
from .binding import SampleBinding
from .evaluate import PatchEvaluator

logger = logging.getLogger(__name__)

NUMERIC_ZERO = 1e-10


def system_connection(sys: SystemSpec) -> MatrixConn:
    """The trace-free Frobenius connection of a scalar system."""
    h_sign = -1 if sys.convention == Convention.FLAT_SECTION else 1
    mu_hat = {k: v for k, v in sys.mu_hat.items() if k != 1}
    return complete_connection(sys.n, sys.t_hat, mu_hat, h_sign)


def fit_slope(h_values: Sequence[float], norms: Sequence[float]) -> float:
    """Least-squares slope of log norm against log h."""
    if len(h_values) < 3:
        raise BindingError("the scaling fit needs at least three h values")
    y = np.asarray(norms, dtype=float)
    if np.any(y <= 0):
        raise BindingError("curvature vanishes for some but not all h; cannot fit a slope")
    x = np.log(np.asarray(h_values, dtype=float))
    slope, _ = np.polyfit(x, np.log(y), 1)
    return float(slope)


def _bound_only(x: DiffPoly, binding: SampleBinding) -> bool:
    return all(binding.is_bound(g.label) for g in x.base_generators())


def rule_residuals(
    rules: DerivativeRules, binding: SampleBinding, evaluator: PatchEvaluator
) -> Dict[str, float]:
    """
    max |lhs − rhs| over the patch for every rule and root relation whose
    generators are all bound explicitly.
    """
    out: Dict[str, float] = {}
    for key, value in rules.rules.items():
        lhs = DiffPoly.of(key)
        if not (_bound_only(lhs, binding) and _bound_only(value, binding)):
            continue
        diff = evaluator(lhs) - evaluator(rules.normalize(value))
        out[f"d[{key.a},{key.b}]({key.base.label})"] = float(np.max(np.abs(diff)))
    for root in rules.roots:
        power = DiffPoly.of(DerivedGen(root.root), root.degree)
        if not (_bound_only(power, binding) and _bound_only(root.value, binding)):
            continue
        diff = evaluator(power) - evaluator(root.value)
        out[f"{root.root.label}^{root.degree}"] = float(np.max(np.abs(diff)))
    bad = {k: v for k, v in out.items() if v > 1e-8}
    if bad:
        logger.warning("binding violates %d solved rules: %s", len(bad), sorted(bad))
    return out


def residual_scaling(
    c: MatrixConn,
    binding: SampleBinding,
    order: int,
    settings: Optional[NumcheckSettings] = None,
    rules: Optional[DerivativeRules] = None,
) -> ResidualReport:
    """
    Fit the h-scaling of the curvature of c on the binding's patch.

    Args:
        c: Connection built from tables solved through level `order`
        binding: Values of every generator in c
        order: Last solved WKB level K
        settings: Numeric settings (default: global settings)
        rules: Solved rules to check against the binding first

    Returns:
        ResidualReport; passed when slope ≥ K/n + 1 − tolerance or F vanishes

    Raises:
        BindingError: fewer than three h values, unbound generators, ε-guard
    """
    settings = settings or get_settings().numcheck
    h_values = binding.resolve_h_grid(settings)
    if len(h_values) < 3:
        raise BindingError("the scaling fit needs at least three h values")
    evaluator = PatchEvaluator(
        binding, binding.points(settings), binding.resolve_epsilon(settings)
    )
    checked = rule_residuals(rules, binding, evaluator) if rules is not None else {}

    grades: Dict[Fraction, List[np.ndarray]] = {}
    for row in curvature(c):
        for entry in row:
            for q, part in entry.h_parts().items():
                grades.setdefault(q, []).append(evaluator(part))
    stacked = {q: np.stack(values) for q, values in grades.items()}
    sizes = {q: float(np.max(np.abs(v))) for q, v in stacked.items()}
    nonzero = sorted(q for q, s in sizes.items() if s > NUMERIC_ZERO)

    norms = []
    for hv in h_values:
        total = sum((v * hv ** float(q) for q, v in stacked.items()), np.zeros(1, dtype=complex))
        norms.append(float(np.max(np.abs(total))))

    bound = order / c.n + 1
    tolerance = settings.tolerance
    predicted = None
    if nonzero and nonzero[0].denominator == 1:
        predicted = int(nonzero[0])

    if not nonzero or max(norms) <= NUMERIC_ZERO:
        logger.info("curvature vanishes on the patch; slope fit skipped")
        return ResidualReport(
            passed=True,
            n=c.n,
            order=order,
            h_values=h_values,
            norms=norms,
            operational_bound=bound,
            tolerance=tolerance,
            skipped=True,
            rule_residuals=checked,
            note="curvature vanishes on the patch; slope fit skipped",
        )

    slope = fit_slope(h_values, norms)
    passed = slope >= bound - tolerance
    note = f"operational bound K/n + 1 = {bound:g}; lowest nonzero grade {nonzero[0]}"
    if predicted is not None and abs(slope - predicted) > tolerance:
        note += f"; slope {slope:.3f} is away from the leading grade"
    logger.info("n=%d K=%d: slope %.3f (bound %.3f)", c.n, order, slope, bound)
    return ResidualReport(
        passed=passed,
        n=c.n,
        order=order,
        h_values=h_values,
        norms=norms,
        slope=slope,
        predicted_slope=predicted,
        operational_bound=bound,
        tolerance=tolerance,
        rule_residuals=checked,
        note=note,
    )
