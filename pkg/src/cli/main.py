#!/usr/bin/env python3
"""
flatwkb command line

Usage:
    flatwkb conditions --n 3 --route both
    flatwkb flatness --n 2 --set-h-one
    flatwkb connection build --n 2 --solve-mu1 --render latex
    flatwkb wkb expand --n 3 --levels 2
    flatwkb vary --n 3 --route both
    flatwkb numcheck residual --n 2 --order 3 --binding binding.json
    flatwkb render poly.json --format latex

Exit codes: 0 success, 1 contract failure, 2 usage error.
"""

import argparse
import json
import logging
import sys
from pathlib import Path
from typing import Callable, Dict, List, NamedTuple, Optional, Sequence

from ..config import WorkbenchSettings, get_settings
from ..connection import (
    ConformalGaugeSpec,
    MatrixConn,
    UNormalization,
    apply_rules,
    complete_A2,
    complete_connection,
    constraint_rules,
    curvature,
    ds_to_conformal,
    fcoef_equations,
    higher_order_t_table,
    rank_one_residuals,
    solved_system,
    transform_lowest_order,
)
from ..connection.frobenius import build_frobenius
from ..connection.matrix import transpose, zeros
from ..diffalg import DiffPoly, from_json, mu, reset_registry, t
from ..diffop import (
    Convention,
    SystemSpec,
    at_h_one,
    coefficient_deltas,
    default_tables,
    flatness_constraints,
    hamiltonian_variation,
    lift_hamiltonian,
    phase_variation,
    semiclassical_compare,
)
from ..errors import (
    BindingError,
    ContractViolation,
    ParseError,
    UsageError,
    WorkbenchError,
)
from ..logging_setup import configure_logging
from ..numcheck import SampleBinding, evaluate, residual_scaling, system_connection
from ..phase import PhasePoly, bracket_route, conditions_C, hamiltonian
from ..reports import RouteReport
from ..wkb import (
    classic_recursion,
    compare_routes,
    generic_system,
    integer_ansatz_shifted_n2,
    rational_expand,
    solve_mu_higher,
    unshifted_compat_n3,
)
from .parser import Dialect, parse_expression
from .render import Format, render, render_matrix, render_named, render_poly, render_state
from .session import Session

logger = logging.getLogger(__name__)

EXIT_OK = 0
EXIT_CONTRACT = 1
EXIT_USAGE = 2


class Outcome(NamedTuple):
    text: str
    passed: bool = True


Handler = Callable[[argparse.Namespace, Session, WorkbenchSettings], Outcome]


# -- helpers ----------------------------------------------------------------


def _fmt(args: argparse.Namespace) -> Format:
    return Format(args.format)


def _convention(args: argparse.Namespace) -> Convention:
    return Convention(getattr(args, "convention", Convention.FLAT_SECTION.value))


def _tables(n: int, order: int):
    """h-free generic tables for order 0, shifted h-series tables otherwise."""
    if order == 0:
        return {k: t(k) for k in range(2, n + 1)}, {k: mu(k) for k in range(2, n + 1)}
    tables = default_tables(n, order)
    return tables["t"], tables["mu"]


def _verdict(report: RouteReport, fmt: Format) -> Outcome:
    if fmt == Format.JSON:
        return Outcome(render(report, fmt), report.passed)
    conditions = dict(zip(range(2, report.n + 1), report.formula))
    verdict = "MATCH" if report.passed else f"MISMATCH at k={report.mismatches}"
    return Outcome(render_named(conditions, fmt) + "\n" + verdict, report.passed)


def _read_text(path: str) -> str:
    try:
        return Path(path).read_text()
    except OSError as e:
        raise UsageError(f"cannot read {path}: {e}") from e


def _h_grid(text: str) -> List[float]:
    try:
        return [float(x) for x in text.split(",") if x.strip()]
    except ValueError as e:
        raise UsageError(f"bad --h-grid {text!r}: {e}") from e


# -- commands ---------------------------------------------------------------


def cmd_conditions(args: argparse.Namespace, session: Session, settings) -> Outcome:
    n, fmt = session.n, _fmt(args)
    if args.route == "formula":
        conditions = conditions_C(n)
    elif args.route == "bracket":
        conditions = bracket_route(n, sign=session.bracket_sign).conditions
    elif args.route == "wkb":
        state = rational_expand(generic_system(n), n - 1, check=False)
        conditions = [state.conditions[k] for k in range(2, n + 1)]
    elif args.route == "both":
        formula = conditions_C(n)
        route = bracket_route(n, sign=session.bracket_sign)
        mismatches = [
            k for k, f, b in zip(range(2, n + 1), formula, route.conditions) if f != b
        ]
        report = RouteReport(
            passed=not mismatches,
            n=n,
            formula=formula,
            bracket=route.conditions,
            units=route.units,
            dropped_top=route.dropped_top,
            mismatches=mismatches,
        )
        return _verdict(report, fmt)
    else:
        return _verdict(compare_routes(n, sign=session.bracket_sign), fmt)
    return Outcome(render_named(dict(zip(range(2, n + 1), conditions)), fmt))


def cmd_flatness(args: argparse.Namespace, session: Session, settings) -> Outcome:
    t_hat, mu_hat = _tables(session.n, args.order)
    sys = solved_system(session.n, t_hat, mu_hat, _convention(args))
    constraints = flatness_constraints(sys)
    if args.set_h_one:
        constraints = [at_h_one(c) for c in constraints]
    return Outcome(render_named(dict(enumerate(constraints)), _fmt(args), prefix="E"))


def _render_connection(c: MatrixConn, fmt: Format, orientation: str) -> str:
    A1, A2 = c.A1, c.A2
    if orientation == "transposed":
        A1, A2 = transpose(A1), transpose(A2)
    if fmt == Format.JSON:
        rows = {
            name: json.loads(render_matrix(m, fmt))["rows"] for name, m in (("A1", A1), ("A2", A2))
        }
        payload = {"schemaVersion": 1, "kind": "connection", "n": c.n, "hSign": c.h_sign, **rows}
        return json.dumps(payload, indent=2, sort_keys=True)
    if fmt == Format.LATEX:
        return f"A_1 = {render_matrix(A1, fmt)}\n\nA_2 = {render_matrix(A2, fmt)}"
    return f"A1 =\n{render_matrix(A1, fmt)}\n\nA2 =\n{render_matrix(A2, fmt)}"


def _connection(args: argparse.Namespace, session: Session) -> MatrixConn:
    t_hat, mu_hat = _tables(session.n, args.order)
    if getattr(args, "solve_mu1", True):
        return complete_connection(session.n, t_hat, mu_hat, args.h_sign)
    return complete_A2(session.n, t_hat, {1: mu(1), **mu_hat}, args.h_sign)


def cmd_connection_build(args: argparse.Namespace, session: Session, settings) -> Outcome:
    c = _connection(args, session)
    return Outcome(_render_connection(c, _fmt(args), session.companion_orientation))


def cmd_connection_curvature(args: argparse.Namespace, session: Session, settings) -> Outcome:
    c = _connection(args, session)
    F = curvature(c)
    if args.impose_constraints:
        if args.order:
            raise UsageError("--impose-constraints needs the h-free tables (--order 0)")
        t_hat, mu_hat = _tables(session.n, 0)
        F = apply_rules(F, constraint_rules(session.n, t_hat, mu_hat))
    bad = rank_one_residuals(F)
    if bad:
        logger.warning("curvature keeps %d nonzero 2x2 minors", len(bad))
    return Outcome(render_matrix(F, _fmt(args)), not bad)


def cmd_connection_conformal(args: argparse.Namespace, session: Session, settings) -> Outcome:
    t_hat, _ = _tables(session.n, args.order)
    c = MatrixConn(n=session.n, A1=build_frobenius(session.n, t_hat), A2=zeros(session.n))
    spec = ConformalGaugeSpec.principal(session.n, UNormalization(args.normalization))
    report = ds_to_conformal(c, spec)
    return Outcome(render(report, _fmt(args)), report.passed)


def cmd_connection_transform(args: argparse.Namespace, session: Session, settings) -> Outcome:
    ks = [args.k] if args.k is not None else list(range(2, session.n + 1))
    reports = [transform_lowest_order(session.n, k) for k in ks]
    fmt = _fmt(args)
    if fmt == Format.JSON:
        text = json.dumps([r.model_dump(mode="json") for r in reports], indent=2, sort_keys=True)
    else:
        text = "\n\n".join(render(r, fmt) for r in reports)
    return Outcome(text, all(r.passed for r in reports))


def cmd_connection_higher(args: argparse.Namespace, session: Session, settings) -> Outcome:
    table = higher_order_t_table(session.n, args.order)
    return Outcome(render_named(table, _fmt(args), prefix="t"))


def cmd_connection_fcoef(args: argparse.Namespace, session: Session, settings) -> Outcome:
    equations = fcoef_equations(session.n, args.order)
    fmt = _fmt(args)
    if fmt == Format.JSON:
        data = [
            {
                "k": e.k,
                "l": e.l,
                "coefficient": json.loads(render_poly(e.coefficient, fmt)),
                "rhs": json.loads(render_poly(e.rhs, fmt)),
            }
            for e in equations
        ]
        return Outcome(json.dumps(data, indent=2, sort_keys=True))
    lines = [
        f"({render_poly(e.coefficient, fmt)}) * df{e.k}_{e.l} = {render_poly(e.rhs, fmt)}"
        for e in equations
    ]
    return Outcome("\n".join(lines))


def cmd_wkb_expand(args: argparse.Namespace, session: Session, settings) -> Outcome:
    fmt = _fmt(args)
    if args.unshifted:
        if session.n != 3:
            raise UsageError("--unshifted is available for n = 3 only")
        return Outcome(render_poly(unshifted_compat_n3(), fmt))
    levels = args.levels if args.levels is not None else session.n - 1
    state = rational_expand(generic_system(session.n, levels), levels, check=not args.no_check)
    return Outcome(render_state(state, fmt), state.consistent)


def cmd_wkb_solve_mu(args: argparse.Namespace, session: Session, settings) -> Outcome:
    n = session.n
    state = rational_expand(generic_system(n, args.level), n - 1)
    state = solve_mu_higher(state, args.level)
    return Outcome(render_state(state, _fmt(args)), state.consistent)


def cmd_wkb_classic(args: argparse.Namespace, session: Session, settings) -> Outcome:
    if session.n != 2:
        raise UsageError("the Schrödinger recursion is a rank-two computation; use --n 2")
    series = {i: t(2, i) for i in range(args.depth + 1)}
    values = classic_recursion(series, args.depth, branch=args.branch)
    return Outcome(render_named(dict(enumerate(values)), _fmt(args), prefix="ds"))


def cmd_wkb_integer(args: argparse.Namespace, session: Session, settings) -> Outcome:
    if session.n != 2:
        raise UsageError("the integer ansatz check is a rank-two computation; use --n 2")
    return Outcome(render_poly(integer_ansatz_shifted_n2(), _fmt(args)))


def _hamiltonian(args: argparse.Namespace, n: int) -> PhasePoly:
    if args.ham is None:
        return hamiltonian(n)
    value = parse_expression(args.ham, Dialect.PHASE)
    return value if isinstance(value, PhasePoly) else PhasePoly.coerce(value)


def cmd_vary(args: argparse.Namespace, session: Session, settings) -> Outcome:
    n, fmt = session.n, _fmt(args)
    H = _hamiltonian(args, n)
    sys = SystemSpec.generic(n, _convention(args))
    if args.route == "both":
        report = semiclassical_compare(H, sys)
        return Outcome(render(report, fmt), report.passed)
    if args.route == "phase":
        dt, dmu = phase_variation(H, sys)
    else:
        dP, dQ = hamiltonian_variation(lift_hamiltonian(H), sys)
        dt, dmu = coefficient_deltas(dP, dQ, sys)
    named: Dict[str, DiffPoly] = {f"dt{k}": x for k, x in zip(range(2, n + 1), dt)}
    named.update({f"dmu{k}": x for k, x in zip(range(1, n + 1), dmu)})
    return Outcome(render_named(named, fmt, prefix=""))


def _binding(args: argparse.Namespace) -> SampleBinding:
    if args.binding is None:
        raise UsageError("--binding is required")
    return SampleBinding.load(args.binding)


def cmd_numcheck_residual(args: argparse.Namespace, session: Session, settings) -> Outcome:
    n, order = session.n, args.order
    binding = _binding(args)
    numcheck = settings.numcheck
    if args.h_grid:
        numcheck = settings.with_overrides("numcheck", h_grid=_h_grid(args.h_grid)).numcheck
        binding = binding.model_copy(update={"h_grid": None})
    sys = generic_system(n, order)
    state = rational_expand(sys, max(1, min(order, n - 1)))
    if order >= n:
        state = solve_mu_higher(state, order)
    report = residual_scaling(system_connection(sys), binding, order, numcheck, rules=state.rules)
    return Outcome(render(report, _fmt(args)), report.passed)


def cmd_numcheck_eval(args: argparse.Namespace, session: Session, settings) -> Outcome:
    value = parse_expression(args.expr, Dialect.COEFF)
    try:
        point = complex(args.z.replace(" ", ""))
    except ValueError as e:
        raise UsageError(f"bad point {args.z!r}") from e
    binding = _binding(args)
    epsilon = binding.resolve_epsilon(settings.numcheck)
    result = evaluate(value, binding, point, args.h, epsilon)
    if _fmt(args) == Format.JSON:
        return Outcome(json.dumps({"re": result.real, "im": result.imag}, sort_keys=True))
    return Outcome(f"{result.real:.12g}{result.imag:+.12g}i")


def cmd_render(args: argparse.Namespace, session: Session, settings) -> Outcome:
    fmt = _fmt(args)
    if args.expr is not None:
        return Outcome(render(parse_expression(args.expr, Dialect(args.dialect)), fmt))
    if args.file is None:
        raise UsageError("give a JSON file or --expr")
    text = _read_text(args.file)
    try:
        data = json.loads(text)
        if isinstance(data, dict) and data.get("kind") == "matrix":
            rows = [[from_json(json.dumps(x)) for x in row] for row in data["rows"]]
            return Outcome(render_matrix(rows, fmt))
        return Outcome(render_poly(from_json(text), fmt))
    except (ValueError, KeyError, TypeError) as e:
        raise UsageError(f"{args.file} is not a DiffPoly JSON file: {e}") from e


# -- parser -----------------------------------------------------------------


def _common() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--n", type=int, default=None, help="Rank of SL(n)")
    common.add_argument(
        "--format",
        "--render",
        dest="format",
        choices=[f.value for f in Format],
        default=Format.TEXT.value,
        help="Output format",
    )
    return common


def build_parser() -> argparse.ArgumentParser:
    common = _common()
    parser = argparse.ArgumentParser(
        prog="flatwkb", description="Symbolic workbench for flat SL(n) h-connections"
    )
    parser.add_argument("--config", default=None, help="Path to config.yaml")
    parser.add_argument("-v", "--verbose", action="store_true", help="Debug logging on stderr")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("conditions", parents=[common], help="Conditions (C), k = 2..n")
    p.add_argument(
        "--route", choices=["formula", "bracket", "wkb", "both", "all"], default="formula"
    )
    p.set_defaults(handler=cmd_conditions)

    p = sub.add_parser("flatness", parents=[common], help="Flatness constraints of (D1, D2)")
    p.add_argument("--set-h-one", action="store_true", help="Forget the h-grading")
    p.add_argument("--order", type=int, default=0, help="h-series tables of this order")
    p.add_argument(
        "--convention", choices=[c.value for c in Convention], default="flat_section"
    )
    p.set_defaults(handler=cmd_flatness)

    conn = sub.add_parser("connection", help="Matrix connections").add_subparsers(
        dest="action", required=True
    )
    for name, handler, text in (
        ("build", cmd_connection_build, "Frobenius A1 and the completed A2"),
        ("curvature", cmd_connection_curvature, "Curvature and its 2x2 minors"),
    ):
        p = conn.add_parser(name, parents=[common], help=text)
        p.add_argument("--order", type=int, default=0, help="h-series tables of this order")
        p.add_argument("--h-sign", type=int, choices=[1, -1], default=1)
        p.set_defaults(handler=handler)
        if name == "build":
            p.add_argument("--solve-mu1", action="store_true", help="Eliminate mu1 by trace A2 = 0")
        else:
            p.set_defaults(solve_mu1=True)
            p.add_argument(
                "--impose-constraints",
                action="store_true",
                help="Rewrite dbar t_k through the flatness constraints",
            )
    p = conn.add_parser("conformal-gauge", parents=[common], help="Gauge to the conformal form")
    p.add_argument("--order", type=int, default=0)
    p.add_argument(
        "--normalization",
        choices=[x.value for x in UNormalization],
        default=UNormalization.MEAN.value,
        help="u_k as the mean or the sum of its superdiagonal",
    )
    p.set_defaults(handler=cmd_connection_conformal)
    p = conn.add_parser("transform", parents=[common], help="Coordinate change of t_k")
    p.add_argument("--k", type=int, default=None, help="Single coefficient index")
    p.set_defaults(handler=cmd_connection_transform)
    p = conn.add_parser("higher-order", parents=[common], help="t_k table with f_k(h) factors")
    p.add_argument("--order", type=int, default=2)
    p.set_defaults(handler=cmd_connection_higher)
    p = conn.add_parser("fcoef", parents=[common], help="Equations for the f_k(h) variations")
    p.add_argument("--order", type=int, default=3)
    p.set_defaults(handler=cmd_connection_fcoef)

    wkb = sub.add_parser("wkb", help="WKB expansions").add_subparsers(dest="action", required=True)
    p = wkb.add_parser("expand", parents=[common], help="Rational WKB expansion")
    p.add_argument("--levels", type=int, default=None, help="Last level j (default n - 1)")
    p.add_argument("--unshifted", action="store_true", help="n = 3 integer ansatz, t unshifted")
    p.add_argument("--no-check", action="store_true", help="Skip the comparison with (C)")
    p.set_defaults(handler=cmd_wkb_expand)
    p = wkb.add_parser("solve-mu", parents=[common], help="Solve higher mu orders")
    p.add_argument("--level", "--to-level", dest="level", type=int, required=True)
    p.set_defaults(handler=cmd_wkb_solve_mu)
    p = wkb.add_parser("classic", parents=[common], help="Schrödinger recursion")
    p.add_argument("--depth", type=int, default=2)
    p.add_argument("--branch", type=int, choices=[1, -1], default=1)
    p.set_defaults(handler=cmd_wkb_classic)
    p = wkb.add_parser("integer", parents=[common], help="Shifted integer ansatz obstruction")
    p.set_defaults(handler=cmd_wkb_integer)

    p = sub.add_parser("vary", parents=[common], help="Hamiltonian variations")
    p.add_argument("--route", choices=["phase", "op", "both"], default="both")
    p.add_argument("--ham", default=None, help="Hamiltonian in the phase dialect")
    p.add_argument(
        "--convention", choices=[c.value for c in Convention], default="flat_section"
    )
    p.set_defaults(handler=cmd_vary)

    num = sub.add_parser("numcheck", help="Numeric checks").add_subparsers(
        dest="action", required=True
    )
    p = num.add_parser("residual", parents=[common], help="h-scaling of the curvature")
    p.add_argument("--order", type=int, required=True, help="Last solved level K")
    p.add_argument("--binding", default=None, help="JSON binding file")
    p.add_argument("--h-grid", default=None, help="Comma separated decreasing h values")
    p.set_defaults(handler=cmd_numcheck_residual)
    p = num.add_parser("eval", parents=[common], help="Evaluate an expression at one point")
    p.add_argument("--expr", required=True)
    p.add_argument("--binding", default=None)
    p.add_argument("--z", default="1", help="Point, e.g. 1+0.5j")
    p.add_argument("--h-value", dest="h", type=float, default=1.0, help="Value of h")
    p.set_defaults(handler=cmd_numcheck_eval)

    p = sub.add_parser("render", parents=[common], help="Re-render a DiffPoly")
    p.add_argument("file", nargs="?", default=None, help="DiffPoly JSON file")
    p.add_argument("--expr", default=None, help="Expression to parse instead of a file")
    p.add_argument("--dialect", choices=[d.value for d in Dialect], default="coeff")
    p.set_defaults(handler=cmd_render)
    return parser


def run(args: argparse.Namespace, settings: WorkbenchSettings) -> Outcome:
    """Dispatch one parsed command inside a fresh session."""
    session = Session.from_settings(settings, n=args.n)
    if args.command == "render" and args.n is None:
        reset_registry(localize_tn=session.localize_tn)
    else:
        session.start()
    handler: Handler = args.handler
    outcome = handler(args, session, settings)
    logger.info("%s finished: %s", args.command, "passed" if outcome.passed else "failed")
    return outcome


def main(argv: Optional[Sequence[str]] = None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as e:
        return int(e.code) if isinstance(e.code, int) else EXIT_USAGE

    try:
        settings = get_settings(args.config)
    except ValueError as e:
        print(f"error: bad configuration: {e}", file=sys.stderr)
        return EXIT_USAGE
    level = "DEBUG" if args.verbose else settings.app.log_level
    configure_logging(level, settings.app.log_format)

    try:
        outcome = run(args, settings)
    except (UsageError, ParseError, BindingError) as e:
        print(f"error: {e}", file=sys.stderr)
        return EXIT_USAGE
    except ContractViolation as e:
        print(f"contract violation: {e}", file=sys.stderr)
        return EXIT_CONTRACT
    except WorkbenchError as e:
        print(f"error: {e}", file=sys.stderr)
        return EXIT_CONTRACT
    except ValueError as e:
        print(f"error: {e}", file=sys.stderr)
        return EXIT_USAGE

    print(outcome.text)
    if not outcome.passed:
        print("check failed", file=sys.stderr)
        return EXIT_CONTRACT
    return EXIT_OK


if __name__ == "__main__":
    sys.exit(main())
