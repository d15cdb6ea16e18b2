"""Text and LaTeX forms of fiber polynomials."""

from typing import List

from ..diffalg import to_latex, to_text
from .polys import PhasePoly


def _fiber(i: int, j: int, p: str, pbar: str) -> List[str]:
    out = []
    if i:
        out.append(p if i == 1 else f"{p}^{i}")
    if j:
        out.append(pbar if j == 1 else f"{pbar}^{j}")
    return out


def phase_to_text(f: PhasePoly) -> str:
    if f.is_zero():
        return "0"
    parts = []
    for (i, j), c in f.items():
        fiber = _fiber(i, j, "p", "pbar")
        if not fiber:
            parts.append(f"({to_text(c)})")
        elif c == 1:
            parts.append("*".join(fiber))
        else:
            parts.append("*".join([f"({to_text(c)})"] + fiber))
    return " + ".join(parts)


def phase_to_latex(f: PhasePoly) -> str:
    if f.is_zero():
        return "0"
    parts = []
    for (i, j), c in f.items():
        fiber = _fiber(i, j, "p", "\\bar{p}")
        body = " ".join(fiber)
        if not fiber:
            parts.append(f"\\left({to_latex(c)}\\right)")
        elif c == 1:
            parts.append(body)
        else:
            parts.append(f"\\left({to_latex(c)}\\right) {body}")
    return " + ".join(parts)
