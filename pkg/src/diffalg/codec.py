"""
Wire and display formats for DiffPoly.

JSON: a canonically sorted array of {coeff: "p/q", hExp: "a/b", factors:
[{gen, a, b, exp}]}. Text is the surface syntax accepted by the CLI parser;
LaTeX uses \\partial and \\bar\\partial.
"""

import json
import re
from fractions import Fraction
from typing import Any, Dict, List, Tuple

from .generators import DerivedGen, GeneratorId, GenKind
from .poly import DiffPoly, Monomial

_LABEL_PATTERNS: List[Tuple[re.Pattern, GenKind]] = [
    (re.compile(r"^t(\d+)(?:_(\d+))?$"), GenKind.T),
    (re.compile(r"^mu(\d+)(?:_(\d+))?$"), GenKind.MU),
    (re.compile(r"^w(\d+)$"), GenKind.JET),
    (re.compile(r"^v(\d+)$"), GenKind.HAM),
    (re.compile(r"^f(\d+)_(\d+)$"), GenKind.FCOEF),
]


def generator_from_label(label: str) -> GeneratorId:
    """Inverse of GeneratorId.label; unknown shapes become GENERIC symbols."""
    if label == "lam":
        return GeneratorId(GenKind.LAMBDA)
    if label == "proj":
        return GeneratorId(GenKind.PROJ)
    for pattern, kind in _LABEL_PATTERNS:
        m = pattern.match(label)
        if m:
            if kind in (GenKind.T, GenKind.MU):
                return GeneratorId(kind, (int(m.group(1)), int(m.group(2) or 0)))
            return GeneratorId(kind, tuple(int(g) for g in m.groups()))
    return GeneratorId(GenKind.GENERIC, (), label)


def _frac(q: Fraction) -> str:
    return str(q.numerator) if q.denominator == 1 else f"{q.numerator}/{q.denominator}"


# -- JSON -------------------------------------------------------------------


def to_json_obj(x: DiffPoly) -> List[Dict[str, Any]]:
    return [
        {
            "coeff": _frac(c),
            "hExp": _frac(m.h),
            "factors": [
                {"gen": g.base.label, "a": g.a, "b": g.b, "exp": e} for g, e in m.factors
            ],
        }
        for m, c in x.sorted_terms()
    ]


def from_json_obj(data: List[Dict[str, Any]]) -> DiffPoly:
    terms: Dict[Monomial, Fraction] = {}
    for entry in data:
        factors = tuple(
            sorted(
                (
                    DerivedGen(generator_from_label(f["gen"]), int(f["a"]), int(f["b"])),
                    int(f["exp"]),
                )
                for f in entry["factors"]
            )
        )
        m = Monomial(factors, Fraction(entry["hExp"]))
        terms[m] = terms.get(m, Fraction(0)) + Fraction(entry["coeff"])
    return DiffPoly(terms)


def to_json(x: DiffPoly) -> str:
    return json.dumps(to_json_obj(x), ensure_ascii=True, separators=(",", ":"))


def from_json(text: str) -> DiffPoly:
    return from_json_obj(json.loads(text))


# -- text -------------------------------------------------------------------


def _text_factor(g: DerivedGen, e: int) -> str:
    body = f"d[{g.a},{g.b}]({g.base.label})" if g.a or g.b else g.base.label
    if e == 1:
        return body
    return f"{body}^{e}" if e > 0 else f"{body}^({e})"


def _text_h(q: Fraction) -> str:
    if q == 1:
        return "h"
    return f"h^{q.numerator}" if q.denominator == 1 else f"h^({_frac(q)})"


def monomial_text(m: Monomial) -> str:
    parts = []
    if m.h:
        parts.append(_text_h(m.h))
    parts.extend(_text_factor(g, e) for g, e in m.factors)
    return "*".join(parts)


def to_text(x: DiffPoly) -> str:
    if not x:
        return "0"
    out: List[str] = []
    for i, (m, c) in enumerate(x.sorted_terms()):
        body = monomial_text(m)
        sign = "-" if c < 0 else "+"
        mag = abs(c)
        if not body:
            term = _frac(mag)
        elif mag == 1:
            term = body
        else:
            term = f"{_frac(mag)}*{body}"
        if i == 0:
            out.append(f"-{term}" if sign == "-" else term)
        else:
            out.append(f" {sign} {term}")
    return "".join(out)


# -- LaTeX ------------------------------------------------------------------


def _latex_gen(gen: GeneratorId) -> str:
    k = gen.kind
    if k == GenKind.T or k == GenKind.MU:
        base, order = gen.indices
        sym = "t" if k == GenKind.T else "\\mu"
        return f"{sym}_{{{base}}}" + (f"^{{({order})}}" if order else "")
    if k == GenKind.LAMBDA:
        return "\\lambda"
    if k == GenKind.JET:
        return f"w_{{{gen.indices[0]}}}"
    if k == GenKind.HAM:
        return f"v_{{{gen.indices[0]}}}"
    if k == GenKind.FCOEF:
        return f"f_{{{gen.indices[0]}}}^{{({gen.indices[1]})}}"
    if k == GenKind.PROJ:
        return "\\mathrm{proj}"
    return f"\\mathrm{{{gen.name}}}"


def _latex_pow(sym: str, e: int) -> str:
    return sym if e == 1 else f"{sym}^{{{e}}}"


def _latex_factor(g: DerivedGen, e: int) -> str:
    ops = ""
    if g.a:
        ops += _latex_pow("\\partial", g.a)
    if g.b:
        ops += _latex_pow("\\bar\\partial", g.b)
    body = _latex_gen(g.base)
    if ops:
        body = f"({ops} {body})"
    return body if e == 1 else f"{body}^{{{e}}}"


def _latex_frac(q: Fraction) -> str:
    if q.denominator == 1:
        return str(q.numerator)
    return f"\\frac{{{q.numerator}}}{{{q.denominator}}}"


def to_latex(x: DiffPoly) -> str:
    if not x:
        return "0"
    out: List[str] = []
    for i, (m, c) in enumerate(x.sorted_terms()):
        parts = []
        if m.h:
            parts.append("h" if m.h == 1 else f"h^{{{_latex_frac(m.h)}}}")
        parts.extend(_latex_factor(g, e) for g, e in m.factors)
        body = " ".join(parts)
        mag = abs(c)
        term = _latex_frac(mag) if not body else body if mag == 1 else f"{_latex_frac(mag)} {body}"
        if i == 0:
            out.append(f"-{term}" if c < 0 else term)
        else:
            out.append(f" {'-' if c < 0 else '+'} {term}")
    return "".join(out)
