"""
Renderers for command output.

Every command result goes through `render(x, fmt)`. Canonical term order comes
from the diffalg codec, so identical inputs give byte-identical output.
"""

import json
from enum import Enum
from fractions import Fraction
from typing import Any, Dict, List, Mapping, Sequence, Union

from pydantic import BaseModel

from ..diffalg import DiffPoly, to_json, to_latex, to_text
from ..diffalg.codec import to_json_obj
from ..diffop import OpPoly
from ..phase import PhasePoly, phase_to_latex, phase_to_text
from ..reports import SCHEMA_VERSION, Report
from ..wkb import WKBState

Matrix = List[List[DiffPoly]]
Renderable = Union[
    DiffPoly, OpPoly, PhasePoly, Report, Sequence[Sequence[DiffPoly]], Mapping[Any, DiffPoly]
]


class Format(str, Enum):
    TEXT = "text"
    LATEX = "latex"
    JSON = "json"


def _dump(obj: Any) -> str:
    return json.dumps(obj, indent=2, sort_keys=True, ensure_ascii=False)


def _fiber_json(x: Union[OpPoly, PhasePoly], kind: str) -> Dict[str, Any]:
    return {
        "schemaVersion": SCHEMA_VERSION,
        "kind": kind,
        "terms": [{"degree": list(deg), "coeff": to_json_obj(c)} for deg, c in x.items()],
    }


def _op_latex(x: OpPoly) -> str:
    if x.is_zero():
        return "0"
    parts = []
    for (a, b), c in x.items():
        ops = ""
        if a:
            ops += "\\partial" if a == 1 else f"\\partial^{{{a}}}"
        if b:
            ops += "\\bar\\partial" if b == 1 else f"\\bar\\partial^{{{b}}}"
        coeff = f"\\left({to_latex(c)}\\right)"
        parts.append(f"{coeff} {ops}" if ops else coeff)
    return " + ".join(parts)


def _is_matrix(x: Any) -> bool:
    return (
        isinstance(x, (list, tuple))
        and bool(x)
        and all(isinstance(row, (list, tuple)) for row in x)
    )


def render_poly(x: DiffPoly, fmt: Format) -> str:
    if fmt == Format.TEXT:
        return to_text(x)
    if fmt == Format.LATEX:
        return to_latex(x)
    return to_json(x)


def render_matrix(m: Sequence[Sequence[DiffPoly]], fmt: Format) -> str:
    """Row-major; JSON rows hold DiffPoly wire objects."""
    if fmt == Format.TEXT:
        return "\n".join("[" + ", ".join(to_text(x) for x in row) + "]" for row in m)
    if fmt == Format.LATEX:
        rows = " \\\\\n".join(" & ".join(to_latex(x) for x in row) for row in m)
        return "\\begin{pmatrix}\n" + rows + "\n\\end{pmatrix}"
    return _dump(
        {
            "schemaVersion": SCHEMA_VERSION,
            "kind": "matrix",
            "rows": [[to_json_obj(x) for x in row] for row in m],
        }
    )


def render_named(items: Mapping[Any, DiffPoly], fmt: Format, prefix: str = "C") -> str:
    """Labelled polynomials such as conditions indexed by k."""
    if fmt == Format.TEXT:
        return "\n".join(f"{prefix}{k}: {to_text(x)}" for k, x in items.items())
    if fmt == Format.LATEX:
        return "\n".join(f"{prefix}_{{{k}}} &= {to_latex(x)} \\\\" for k, x in items.items())
    return _dump(
        {
            "schemaVersion": SCHEMA_VERSION,
            "kind": "named",
            "items": {str(k): to_json_obj(x) for k, x in items.items()},
        }
    )


def _field_text(value: Any, fmt: Format) -> str:
    if isinstance(value, DiffPoly):
        return render_poly(value, fmt)
    if isinstance(value, BaseModel):
        return value.model_dump_json()
    if _is_matrix(value) and all(isinstance(x, DiffPoly) for row in value for x in row):
        return "\n" + render_matrix(value, fmt)
    if isinstance(value, list) and any(isinstance(x, (DiffPoly, BaseModel)) for x in value):
        return "\n" + "\n".join(f"  {_field_text(x, fmt)}" for x in value)
    if isinstance(value, dict) and any(isinstance(x, DiffPoly) for x in value.values()):
        return "\n" + "\n".join(f"  {k}: {_field_text(x, fmt)}" for k, x in value.items())
    return str(value)


def render_report(report: Report, fmt: Format) -> str:
    if fmt == Format.JSON:
        return _dump(report.model_dump(mode="json"))
    lines = [f"{type(report).__name__}: {'passed' if report.passed else 'FAILED'}"]
    for name, value in report:
        if name in ("schema_version", "passed") or value is None:
            continue
        if isinstance(value, (list, dict)) and not value:
            continue
        lines.append(f"{name}: {_field_text(value, fmt)}")
    return "\n".join(lines)


def render(x: Renderable, fmt: Union[Format, str] = Format.TEXT) -> str:
    """
    Render a command result.

    Args:
        x: DiffPoly, OpPoly, PhasePoly, a report, a matrix, or a mapping of
            labelled polynomials
        fmt: text, latex or json

    Returns:
        Rendered string without trailing newline
    """
    fmt = Format(fmt)
    if isinstance(x, (int, Fraction)) and not isinstance(x, bool):
        x = DiffPoly.coerce(x)
    if isinstance(x, DiffPoly):
        return render_poly(x, fmt)
    if isinstance(x, OpPoly):
        if fmt == Format.TEXT:
            return str(x)
        return _op_latex(x) if fmt == Format.LATEX else _dump(_fiber_json(x, "operator"))
    if isinstance(x, PhasePoly):
        if fmt == Format.TEXT:
            return phase_to_text(x)
        return phase_to_latex(x) if fmt == Format.LATEX else _dump(_fiber_json(x, "phase"))
    if isinstance(x, Report):
        return render_report(x, fmt)
    if isinstance(x, Mapping):
        return render_named(x, fmt)
    if _is_matrix(x):
        return render_matrix(x, fmt)
    raise TypeError(f"cannot render {type(x).__name__}")


def render_state(state: WKBState, fmt: Union[Format, str] = Format.TEXT) -> str:
    """Eikonal table, emitted conditions and solved μ orders of a rational expansion."""
    fmt = Format(fmt)
    if fmt == Format.JSON:
        return _dump(
            {
                "schemaVersion": SCHEMA_VERSION,
                "kind": "wkb",
                "n": state.n,
                "maxLevel": state.max_level,
                "lambdaPower": to_json_obj(state.lambda_power) if state.lambda_power else None,
                "levels": [r.model_dump(mode="json") for r in state.levels],
                "conditions": {str(k): to_json_obj(x) for k, x in state.conditions.items()},
                "solvedMu": {k: to_json_obj(x) for k, x in state.solved_mu.items()},
                "consistent": state.consistent,
                "tnLocalized": state.tn_localized,
            }
        )
    lines = []
    if state.lambda_power is not None:
        lines.append(f"lam^{state.n} = {render_poly(state.lambda_power, fmt)}")
    for level, (sigma, tau) in sorted(state.eikonal.items()):
        lines.append(f"level {level}: ds = {render_poly(sigma, fmt)}")
        lines.append(f"level {level}: dbar s = {render_poly(tau, fmt)}")
    if state.conditions:
        lines.append(render_named(dict(sorted(state.conditions.items())), fmt))
    for label, value in state.solved_mu.items():
        lines.append(f"d[1,0]({label}) = {render_poly(value, fmt)}")
    for record in state.levels:
        if record.residual is not None and record.residual:
            lines.append(f"level {record.level} residual: {render_poly(record.residual, fmt)}")
    if state.tn_localized:
        lines.append("t_n localized")
    return "\n".join(lines)
