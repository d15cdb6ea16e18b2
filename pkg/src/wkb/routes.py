"""Conditions (𝒞) computed three ways: the formula, the Poisson bracket and rational WKB."""

import logging

from ..phase import bracket_route, conditions_C
from ..reports import RouteReport
from .rational import generic_system, rational_expand

logger = logging.getLogger(__name__)


def compare_routes(n: int, sign: int = 1) -> RouteReport:
    """
    Compare the three routes entrywise for k = 2..n.

    Args:
        n: Rank
        sign: Bracket orientation

    Returns:
        RouteReport; mismatches lists the k where any two routes differ
    """
    formula = conditions_C(n)
    bracket = bracket_route(n, sign=sign)
    state = rational_expand(generic_system(n), n - 1, check=False)
    emitted = state.conditions
    wkb = [emitted[k] for k in range(2, n + 1)]
    mismatches = [
        k
        for k, f, b, w in zip(range(2, n + 1), formula, bracket.conditions, wkb)
        if not f == b == w
    ]
    if mismatches:
        logger.warning("routes disagree for n=%d at k=%s", n, mismatches)
    else:
        logger.info("all routes agree for n=%d", n)
    return RouteReport(
        passed=not mismatches,
        n=n,
        formula=formula,
        bracket=bracket.conditions,
        wkb=wkb,
        units=bracket.units,
        dropped_top=bracket.dropped_top,
        mismatches=mismatches,
    )
