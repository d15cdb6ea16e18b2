"""
Tests for the expression language, renderers, sessions and command dispatch.
"""

import json
from fractions import Fraction

import pytest

from src.cli import (
    Dialect,
    Format,
    Session,
    ast_to_text,
    main,
    parse,
    parse_expression,
    render,
    render_matrix,
    tokenize,
)
from src.cli.parser import BinOp, Gen, HPow, Num
from src.config import WorkbenchSettings
from src.diffalg import (
    DiffPoly,
    from_json,
    gen_id,
    get_registry,
    h,
    mu,
    t,
    to_json,
    to_latex,
    to_text,
)
from src.diffop import OpPoly
from src.errors import ParseError, UsageError
from src.phase import PhasePoly, condition_C, conditions_C
from src.wkb import unshifted_compat_n3

HALF = Fraction(1, 2)


def run_cli(capsys, *argv):
    code = main(list(argv))
    captured = capsys.readouterr()
    return code, captured.out, captured.err


class TestTokenize:
    """Tests for the expression tokenizer"""

    def test_positions(self):
        """Test that tokens carry their line and column"""
        tokens = tokenize("t2 +\n  mu2")
        assert [(tok.text, tok.line, tok.column) for tok in tokens[:3]] == [
            ("t2", 1, 1),
            ("+", 1, 4),
            ("mu2", 2, 3),
        ]
        assert tokens[-1].kind == "end"

    def test_bad_character(self):
        """Test that an unknown character reports its position"""
        with pytest.raises(ParseError) as exc:
            tokenize("t2 $ t3")
        assert (exc.value.line, exc.value.column) == (1, 4)


class TestParser:
    """Tests for the expression parser and its dialects"""

    def test_applied_operator_sugar(self):
        """Test applying an operator expression to a coefficient"""
        x = parse_expression("(-dbar + mu2*d + 2*d[1,0](mu2))(t2)")
        assert x == condition_C(2, 2)

    def test_fractional_h_power(self):
        """Test parsing a fractional power of h"""
        node = parse("h^(1/3)*t3")
        assert node == BinOp(op="*", left=HPow(exp=Fraction(1, 3)), right=Gen(label="t3"))
        assert parse_expression("h^(1/3)*t3") == h(Fraction(1, 3)) * t(3)

    def test_rational_literals(self):
        """Test parsing rational literals"""
        assert parse("3/2") == Num(value=Fraction(3, 2))
        assert parse_expression("-3/2*t2 + t2/2") == -t(2)

    def test_derivative_markers(self):
        """Test that d[a,b] markers apply ∂ᵃ∂̄ᵇ"""
        assert parse_expression("d[2,1](t2)") == t(2).d().d().dbar()
        assert parse_expression("d(t2*mu2)") == (t(2) * mu(2)).d()

    def test_order_coefficients(self):
        """Test parsing h-order suffixes on generators"""
        assert parse_expression("t2_1 + mu3_2") == t(2, 1) + mu(3, 2)

    def test_precedence(self):
        """Test operator precedence of sums, products and powers"""
        assert parse_expression("t2 + t3*mu2^2") == t(2) + t(3) * mu(2) * mu(2)
        assert parse_expression("-t2^2") == -(t(2) * t(2))

    def test_phase_symbol_in_coeff_dialect(self):
        """Test that p is rejected in the coefficient dialect"""
        with pytest.raises(ParseError, match="not allowed in the coeff dialect"):
            parse("p*pbar", Dialect.COEFF)

    def test_phase_dialect(self):
        """Test parsing in the phase-space dialect"""
        assert parse_expression("p*pbar + mu2", Dialect.PHASE) == (
            PhasePoly.p() * PhasePoly.pbar() + PhasePoly.coerce(mu(2))
        )

    def test_operator_dialect(self):
        """Test parsing in the operator dialect"""
        value = parse_expression("D^2 - t2", Dialect.OPERATOR)
        assert value == OpPoly.D(2) - OpPoly.const(t(2))

    def test_operator_product_uses_leibniz(self):
        """Test that D times a coefficient follows the Leibniz rule"""
        value = parse_expression("D*mu2", Dialect.OPERATOR)
        assert value == mu(2) * OpPoly.D() + OpPoly.const(h(1) * mu(2).d())

    def test_unknown_generator(self):
        """Test the error for an unknown generator name"""
        with pytest.raises(ParseError, match="unknown generator foo") as exc:
            parse("t2 + foo")
        assert exc.value.column == 6

    def test_registered_generic_is_known(self, invertible_u):
        """Test that a registered generic generator parses"""
        assert parse_expression("u^(-1)*u") == DiffPoly.const(1)

    def test_syntax_errors(self):
        """Test that malformed expressions raise ParseError"""
        for text in ["t2 +", "(t2", "t2)", "d[1](t2)", "t2^(1/2)", "h^(-1)"]:
            with pytest.raises(ParseError):
                parse(text)

    def test_division_by_expression_rejected(self):
        """Test that division is limited to integer literals"""
        with pytest.raises(ParseError, match="integer literals"):
            parse("t2/t3")

    def test_bare_derivation_rejected(self):
        """Test that a derivation without an argument is rejected"""
        with pytest.raises(ParseError):
            parse_expression("d + t2")

    def test_application_needs_a_derivation(self):
        """Test that application requires a derivation on the left"""
        with pytest.raises(ParseError):
            parse("t2(t3)")

    def test_text_round_trip(self, poly_factory):
        """Test that rendered text parses back to the same polynomial"""
        for _ in range(200):
            x = poly_factory(terms=4)
            assert parse_expression(to_text(x)) == x

    def test_ast_round_trip(self, poly_factory):
        """Test that the AST of rendered text evaluates back to the polynomial"""
        for _ in range(200):
            node = parse(to_text(poly_factory(terms=4)))
            assert parse(ast_to_text(node)) == node

    def test_ast_round_trip_of_sugar(self):
        """Test that operator application sugar survives an AST round trip"""
        node = parse("(-dbar + mu2*d + 2*d[1,0](mu2))(t2) - (t2 - t3)*(3/2)")
        assert parse(ast_to_text(node)) == node


class TestRender:
    """Tests for rendering results in each format"""

    def test_zero(self):
        """Test rendering zero"""
        assert render(0, "text") == "0"
        assert render(DiffPoly.zero(), Format.LATEX) == "0"

    def test_condition_latex(self):
        """Test LaTeX rendering of a compatibility condition"""
        out = render(condition_C(2, 2), "latex")
        assert out == to_latex(condition_C(2, 2))
        assert "\\bar\\partial" in out and "\\mu_{2}" in out

    def test_json_round_trip(self, poly_factory):
        """Test that JSON rendering decodes to the same polynomial"""
        for _ in range(200):
            x = poly_factory(terms=4)
            assert from_json(render(x, "json")) == x

    def test_deterministic(self, poly_factory):
        """Test that rendering the same polynomial twice gives the same text"""
        x = poly_factory(terms=5)
        assert render(x, "json") == render(parse_expression(to_text(x)), "json")

    def test_matrix(self):
        """Test rendering a matrix of polynomials"""
        m = [[t(2), DiffPoly.zero()], [DiffPoly.const(1), -mu(2)]]
        assert render_matrix(m, Format.TEXT) == "[t2, 0]\n[1, -mu2]"
        assert render(m, "latex").startswith("\\begin{pmatrix}")
        rows = json.loads(render(m, "json"))["rows"]
        assert from_json(json.dumps(rows[1][1])) == -mu(2)

    def test_named_conditions(self):
        """Test rendering a mapping of named conditions"""
        named = dict(zip([2, 3], conditions_C(3)))
        lines = render(named, "text").splitlines()
        assert lines[0].startswith("C2: ") and lines[1].startswith("C3: ")

    def test_operator_and_phase(self):
        """Test rendering operators and phase polynomials"""
        assert render(OpPoly.D(2), "text") == "(1)*D^2"
        assert render(PhasePoly.p() * mu(2), "text") == "(mu2)*p"
        assert json.loads(render(OpPoly.D(), "json"))["kind"] == "operator"

    def test_unknown_type(self):
        """Test that an unsupported value raises TypeError"""
        with pytest.raises(TypeError):
            render(object())


class TestSession:
    """Tests for session setup from settings"""

    def test_flags_win(self):
        """Test that explicit arguments override settings"""
        settings = WorkbenchSettings()
        session = Session.from_settings(settings, n=4, h_order=None)
        assert session.n == 4
        assert session.h_order == settings.session.h_order
        assert session.h_denominator == 4

    def test_rank_below_two(self):
        """Test that a rank below two is a usage error"""
        with pytest.raises(UsageError):
            Session.from_settings(WorkbenchSettings(), n=1)

    def test_rank_above_range(self):
        """Test that a rank above the supported range is a usage error"""
        with pytest.raises(UsageError):
            Session.from_settings(WorkbenchSettings(), n=99)

    def test_start_declares_rank(self):
        """Test that starting a session declares the rank to the registry"""
        Session.from_settings(WorkbenchSettings(), n=3).start()
        registry = get_registry()
        assert registry.is_tn(gen_id(t(3)))
        assert not registry.is_tn(gen_id(t(2)))


class TestCommands:
    """Tests for the command-line commands"""

    def test_conditions_both_routes(self, capsys):
        """Test the conditions command on both routes"""
        code, out, _ = run_cli(capsys, "conditions", "--n", "3", "--route", "both")
        assert code == 0
        lines = out.strip().splitlines()
        assert lines[-1] == "MATCH"
        assert lines[0] == f"C2: {to_text(conditions_C(3)[0])}"
        assert lines[1] == f"C3: {to_text(conditions_C(3)[1])}"

    def test_conditions_all_routes_json(self, capsys):
        """Test the conditions command with every route as JSON"""
        code, out, _ = run_cli(
            capsys, "conditions", "--n", "2", "--route", "all", "--format", "json"
        )
        assert code == 0
        data = json.loads(out)
        assert data["passed"] is True
        assert data["mismatches"] == []

    def test_conditions_rank_one_is_usage_error(self, capsys):
        """Test that conditions for rank one exits with a usage error"""
        code, out, err = run_cli(capsys, "conditions", "--n", "1")
        assert code == 2
        assert out == ""
        assert "n must be at least 2" in err

    def test_unknown_command(self, capsys):
        """Test that an unknown command fails"""
        code, _, _ = run_cli(capsys, "bogus")
        assert code == 2

    def test_flatness_rank_two(self, capsys):
        """Test the flatness command for rank two"""
        code, out, _ = run_cli(
            capsys, "flatness", "--n", "2", "--set-h-one", "--format", "json"
        )
        assert code == 0
        item = json.loads(out)["items"]["0"]
        expected = (
            -t(2).dbar() + mu(2) * t(2).d() + 2 * mu(2).d() * t(2) - HALF * mu(2).d().d().d()
        )
        assert from_json(json.dumps(item)) == expected

    def test_connection_build_rank_two(self, capsys):
        """Test building a rank-two connection"""
        code, out, _ = run_cli(
            capsys, "connection", "build", "--n", "2", "--solve-mu1", "--render", "json"
        )
        assert code == 0
        rows = json.loads(out)["A2"]
        A2 = [[from_json(json.dumps(x)) for x in row] for row in rows]
        m = mu(2)
        assert A2 == [
            [-HALF * h(1) * m.d(), -HALF * h(2) * m.d().d() + m * t(2)],
            [m, HALF * h(1) * m.d()],
        ]

    def test_connection_build_latex(self, capsys):
        """Test building a connection rendered as LaTeX"""
        code, out, _ = run_cli(
            capsys, "connection", "build", "--n", "2", "--solve-mu1", "--render", "latex"
        )
        assert code == 0
        assert out.count("\\begin{pmatrix}") == 2

    def test_curvature_vanishes_under_constraints(self, capsys):
        """Test that curvature vanishes once the constraints are applied"""
        code, out, _ = run_cli(
            capsys, "connection", "curvature", "--n", "2", "--impose-constraints"
        )
        assert code == 0
        assert out.strip() == "[0, 0]\n[0, 0]"

    def test_conformal_gauge(self, capsys):
        """Test the conformal-gauge command"""
        code, out, _ = run_cli(
            capsys, "connection", "conformal-gauge", "--n", "3", "--format", "json"
        )
        assert code == 0
        data = json.loads(out)
        u3 = from_json(json.dumps(data["u"]["3"]))
        assert u3 == t(3) - HALF * h(1) * t(2).d()
        assert from_json(json.dumps(data["u"]["2"])) == HALF * t(2)

    def test_conformal_gauge_trace_normalization(self, capsys):
        """Test that the trace normalization reports u₂ as the superdiagonal sum"""
        code, out, _ = run_cli(
            capsys,
            "connection",
            "conformal-gauge",
            "--n",
            "3",
            "--normalization",
            "trace",
            "--format",
            "json",
        )
        assert code == 0
        data = json.loads(out)
        assert from_json(json.dumps(data["u"]["2"])) == t(2)
        assert data["u_normalization"] == "trace"

    def test_transform_rank_two(self, capsys):
        """Test the coordinate change command for rank two"""
        code, out, _ = run_cli(capsys, "connection", "transform", "--n", "2")
        assert code == 0
        assert "passed" in out

    def test_wkb_expand_rank_three(self, capsys):
        """Test the WKB expansion command for rank three"""
        code, out, _ = run_cli(
            capsys, "wkb", "expand", "--n", "3", "--levels", "2", "--format", "json"
        )
        assert code == 0
        data = json.loads(out)
        conditions = {int(k): from_json(json.dumps(v)) for k, v in data["conditions"].items()}
        assert conditions == dict(zip([2, 3], conditions_C(3)))

    def test_wkb_expand_unshifted(self, capsys):
        """Test the WKB expansion with the unshifted potential"""
        code, out, _ = run_cli(capsys, "wkb", "expand", "--n", "3", "--unshifted")
        assert code == 0
        assert out.strip() == to_text(unshifted_compat_n3())

    def test_unshifted_needs_rank_three(self, capsys):
        """Test that the unshifted expansion requires rank three"""
        code, _, err = run_cli(capsys, "wkb", "expand", "--n", "2", "--unshifted")
        assert code == 2
        assert "n = 3" in err

    def test_integer_ansatz(self, capsys):
        """Test the integer-power ansatz command"""
        code, out, _ = run_cli(capsys, "wkb", "integer", "--n", "2")
        assert code == 0
        assert out.strip() == "t2"

    def test_vary_both_routes(self, capsys):
        """Test the vary command on both routes"""
        code, out, _ = run_cli(capsys, "vary", "--n", "3", "--route", "both")
        assert code == 0
        assert out.startswith("SemiclassicalReport: passed")

    def test_vary_custom_hamiltonian(self, capsys):
        """Test the vary command with a user Hamiltonian"""
        code, out, _ = run_cli(capsys, "vary", "--n", "2", "--route", "phase", "--ham", "v2*p")
        assert code == 0
        assert "dt2:" in out and "dmu1:" in out

    def test_render_expression(self, capsys):
        """Test rendering an expression given on the command line"""
        code, out, _ = run_cli(
            capsys, "render", "--expr", "(-dbar + mu2*d + 2*d[1,0](mu2))(t2)"
        )
        assert code == 0
        assert out.strip() == to_text(condition_C(2, 2))

    def test_render_file(self, capsys, tmp_path):
        """Test rendering an expression read from a JSON file"""
        x = t(2) * mu(3).d() - Fraction(2, 3) * h(Fraction(1, 3)) * t(3)
        path = tmp_path / "poly.json"
        path.write_text(to_json(x))
        code, out, _ = run_cli(capsys, "render", str(path), "--format", "latex", "--n", "3")
        assert code == 0
        assert out.strip() == to_latex(x)

    def test_render_dialect_error(self, capsys):
        """Test that a dialect mismatch is reported by render"""
        code, _, err = run_cli(capsys, "render", "--expr", "p*pbar")
        assert code == 2
        assert "line 1, column 1" in err

    def test_render_missing_file(self, capsys, tmp_path):
        """Test that render fails for a missing file"""
        code, _, _ = run_cli(capsys, "render", str(tmp_path / "absent.json"))
        assert code == 2

    def test_numcheck_residual(self, capsys, tmp_path):
        """Test the numerical residual check command"""
        path = tmp_path / "binding.json"
        path.write_text(
            json.dumps(
                {
                    "functions": {
                        "t2": 1,
                        "t2_1": {"terms": [{"zbar": 1, "re": 1.0}]},
                        "mu2": 0,
                        "mu2_1": {"terms": [{"z": 1, "re": 0.5}]},
                    },
                    "unbound": "zero",
                }
            )
        )
        code, out, _ = run_cli(
            capsys,
            "numcheck",
            "residual",
            "--n",
            "2",
            "--order",
            "3",
            "--binding",
            str(path),
            "--format",
            "json",
        )
        assert code == 0
        data = json.loads(out)
        assert data["passed"] is True
        assert data["predicted_slope"] == 4

    def test_numcheck_short_h_grid(self, capsys, tmp_path):
        """Test the residual check with too few h values"""
        path = tmp_path / "binding.json"
        path.write_text(json.dumps({"functions": {"t2": 1}, "unbound": "zero"}))
        code, _, _ = run_cli(
            capsys,
            "numcheck",
            "residual",
            "--n",
            "2",
            "--order",
            "1",
            "--binding",
            str(path),
            "--h-grid",
            "0.1,0.01",
        )
        assert code == 2

    def test_numcheck_eval(self, capsys, tmp_path):
        """Test numerical evaluation of an expression"""
        path = tmp_path / "binding.json"
        path.write_text(json.dumps({"functions": {"t2": {"terms": [{"z": 2, "re": 1.0}]}}}))
        code, out, _ = run_cli(
            capsys,
            "numcheck",
            "eval",
            "--expr",
            "h*t2",
            "--binding",
            str(path),
            "--z",
            "1",
            "--h-value",
            "0.1",
            "--format",
            "json",
        )
        assert code == 0
        data = json.loads(out)
        assert data["re"] == pytest.approx(0.1)
        assert data["im"] == pytest.approx(0.0)
