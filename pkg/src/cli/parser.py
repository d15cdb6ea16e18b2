"""
Expression language

    expr     := term (('+' | '-') term)*
    term     := unary (('*' unary) | ('/' NUMBER))*
    unary    := '-' unary | power
    power    := postfix ('^' exponent)?
    postfix  := primary ('(' expr ')')*
    primary  := NUMBER | NAME | 'd' '[' INT ',' INT ']' '(' expr ')' | '(' expr ')'
    exponent := INT | '(' ['-'] INT ['/' INT] ')'

Names are generator labels (t2, mu3_1, lam, w1, v2, f3_2, proj), registered
generic symbols, and the reserved h, d, dbar, D, Dbar, p, pbar. The dialect
decides which reserved names are legal: D/Dbar build operators, p/pbar build
phase polynomials, and d/dbar applied to a parenthesized argument act as
derivations ("(-dbar + mu2*d + 2*d[1,0](mu2))(t2)").
"""

import logging
import re
from enum import Enum
from fractions import Fraction
from typing import List, Literal, NamedTuple, Optional, Union

from pydantic import BaseModel, ConfigDict, Field

from ..diffalg import DerivedGen, DiffPoly, GenKind, generator_from_label, get_registry, h
from ..diffop import OpPoly, op_mul
from ..errors import ParseError, WorkbenchError
from ..phase import PhasePoly

logger = logging.getLogger(__name__)


class Dialect(str, Enum):
    COEFF = "coeff"
    OPERATOR = "operator"
    PHASE = "phase"


RESERVED = {"h", "d", "dbar", "D", "Dbar", "p", "pbar"}
ALLOWED = {
    Dialect.COEFF: {"d", "dbar"},
    Dialect.OPERATOR: {"d", "dbar", "D", "Dbar"},
    Dialect.PHASE: {"d", "dbar", "p", "pbar"},
}


# -- AST --------------------------------------------------------------------

_NODE = ConfigDict(frozen=True, arbitrary_types_allowed=True)


class Num(BaseModel):
    model_config = _NODE
    kind: Literal["num"] = "num"
    value: Fraction


class Gen(BaseModel):
    model_config = _NODE
    kind: Literal["gen"] = "gen"
    label: str


class Sym(BaseModel):
    """Reserved operator or fiber symbol."""

    model_config = _NODE
    kind: Literal["sym"] = "sym"
    name: Literal["d", "dbar", "D", "Dbar", "p", "pbar"]


class HPow(BaseModel):
    model_config = _NODE
    kind: Literal["hpow"] = "hpow"
    exp: Fraction


class Neg(BaseModel):
    model_config = _NODE
    kind: Literal["neg"] = "neg"
    operand: "Expr"


class BinOp(BaseModel):
    model_config = _NODE
    kind: Literal["binop"] = "binop"
    op: Literal["+", "-", "*"]
    left: "Expr"
    right: "Expr"


class Pow(BaseModel):
    model_config = _NODE
    kind: Literal["pow"] = "pow"
    base: "Expr"
    exp: int


class Deriv(BaseModel):
    """d[a,b](operand)."""

    model_config = _NODE
    kind: Literal["deriv"] = "deriv"
    a: int = Field(ge=0)
    b: int = Field(ge=0)
    operand: "Expr"


class Apply(BaseModel):
    """A derivation-valued expression applied to an argument."""

    model_config = _NODE
    kind: Literal["apply"] = "apply"
    op: "Expr"
    arg: "Expr"


Expr = Union[Num, Gen, Sym, HPow, Neg, BinOp, Pow, Deriv, Apply]
ExprAst = Expr

for _model in (Neg, BinOp, Pow, Deriv, Apply):
    _model.model_rebuild()


# -- tokens -----------------------------------------------------------------

_TOKEN = re.compile(r"(?P<num>\d+)|(?P<name>[A-Za-z_][A-Za-z0-9_]*)|(?P<op>[-+*/^()\[\],])")


class Token(NamedTuple):
    kind: str  # num, name, op, end
    text: str
    line: int
    column: int


def tokenize(text: str) -> List[Token]:
    tokens: List[Token] = []
    pos, line, line_start = 0, 1, 0
    while True:
        while pos < len(text) and text[pos].isspace():
            if text[pos] == "\n":
                line, line_start = line + 1, pos + 1
            pos += 1
        if pos >= len(text):
            tokens.append(Token("end", "", line, pos - line_start + 1))
            return tokens
        m = _TOKEN.match(text, pos)
        if m is None:
            raise ParseError(f"unexpected character {text[pos]!r}", line, pos - line_start + 1)
        kind = m.lastgroup or "op"
        tokens.append(Token(kind, m.group(kind), line, pos - line_start + 1))
        pos = m.end()


# -- parser -----------------------------------------------------------------


def _has_derivation(node: Expr) -> bool:
    if isinstance(node, Sym):
        return node.name in ("d", "dbar")
    if isinstance(node, Neg):
        return _has_derivation(node.operand)
    if isinstance(node, BinOp):
        return _has_derivation(node.left) or _has_derivation(node.right)
    if isinstance(node, Pow):
        return _has_derivation(node.base)
    return False


class Parser:
    """Recursive-descent parser for one dialect."""

    def __init__(self, text: str, dialect: Dialect = Dialect.COEFF):
        self.dialect = Dialect(dialect)
        self.tokens = tokenize(text)
        self.i = 0

    @property
    def tok(self) -> Token:
        return self.tokens[self.i]

    def error(self, message: str, tok: Optional[Token] = None) -> ParseError:
        tok = tok or self.tok
        return ParseError(message, tok.line, tok.column)

    def advance(self) -> Token:
        tok = self.tok
        self.i += 1
        return tok

    def accept(self, text: str) -> bool:
        if self.tok.kind == "op" and self.tok.text == text:
            self.i += 1
            return True
        return False

    def expect(self, text: str) -> Token:
        if not (self.tok.kind == "op" and self.tok.text == text):
            found = self.tok.text or "end of input"
            raise self.error(f"expected {text!r}, found {found!r}")
        return self.advance()

    def integer(self) -> int:
        if self.tok.kind != "num":
            raise self.error("expected an integer")
        return int(self.advance().text)

    def parse(self) -> Expr:
        node = self.expr()
        if self.tok.kind != "end":
            raise self.error(f"unexpected {self.tok.text!r}")
        return node

    def expr(self) -> Expr:
        node = self.term()
        while self.tok.kind == "op" and self.tok.text in "+-":
            op = self.advance().text
            node = BinOp(op=op, left=node, right=self.term())
        return node

    def term(self) -> Expr:
        node = self.unary()
        while True:
            if self.accept("*"):
                node = BinOp(op="*", left=node, right=self.unary())
            elif self.tok.kind == "op" and self.tok.text == "/":
                slash = self.advance()
                if self.tok.kind != "num":
                    raise self.error("division is only by integer literals", slash)
                divisor = int(self.advance().text)
                if divisor == 0:
                    raise self.error("division by zero", slash)
                if isinstance(node, Num):
                    node = Num(value=node.value / divisor)
                else:
                    node = BinOp(op="*", left=node, right=Num(value=Fraction(1, divisor)))
            else:
                return node

    def unary(self) -> Expr:
        if self.accept("-"):
            operand = self.unary()
            if isinstance(operand, Num):
                return Num(value=-operand.value)
            return Neg(operand=operand)
        return self.power()

    def power(self) -> Expr:
        node = self.postfix()
        if not self.accept("^"):
            return node
        at = self.tok
        exp = self.exponent()
        if isinstance(node, HPow) and node.exp == 1:
            if exp < 0:
                raise self.error("negative powers of h are not allowed", at)
            return HPow(exp=exp)
        if exp.denominator != 1:
            raise self.error("only h takes fractional exponents", at)
        return Pow(base=node, exp=int(exp))

    def exponent(self) -> Fraction:
        if self.tok.kind == "num":
            return Fraction(int(self.advance().text))
        self.expect("(")
        sign = -1 if self.accept("-") else 1
        value = Fraction(self.integer())
        if self.accept("/"):
            den = self.integer()
            if den == 0:
                raise self.error("zero denominator")
            value /= den
        self.expect(")")
        return sign * value

    def postfix(self) -> Expr:
        node = self.primary()
        while self.tok.kind == "op" and self.tok.text == "(":
            if not _has_derivation(node):
                raise self.error("only derivations can be applied to an argument")
            self.advance()
            arg = self.expr()
            self.expect(")")
            node = Apply(op=node, arg=arg)
        return node

    def primary(self) -> Expr:
        tok = self.tok
        if tok.kind == "num":
            self.advance()
            return Num(value=Fraction(int(tok.text)))
        if self.accept("("):
            node = self.expr()
            self.expect(")")
            return node
        if tok.kind == "name":
            self.advance()
            return self.name(tok)
        raise self.error(f"unexpected {tok.text or 'end of input'!r}")

    def name(self, tok: Token) -> Expr:
        text = tok.text
        if text == "d" and self.tok.kind == "op" and self.tok.text == "[":
            self.advance()
            a = self.integer()
            self.expect(",")
            b = self.integer()
            self.expect("]")
            self.expect("(")
            operand = self.expr()
            self.expect(")")
            return Deriv(a=a, b=b, operand=operand)
        if text == "h":
            return HPow(exp=Fraction(1))
        if text in RESERVED:
            if text not in ALLOWED[self.dialect]:
                raise self.error(f"{text} is not allowed in the {self.dialect.value} dialect", tok)
            return Sym(name=text)
        resolve_generator(text, tok)
        return Gen(label=text)


def resolve_generator(label: str, tok: Optional[Token] = None) -> DiffPoly:
    """The generator behind a surface label, registering indexed kinds on first use."""
    line, column = (tok.line, tok.column) if tok is not None else (1, 1)
    gen = generator_from_label(label)
    registry = get_registry()
    if gen.kind == GenKind.GENERIC:
        if not registry.is_registered(gen):
            raise ParseError(f"unknown generator {label}", line, column)
    else:
        try:
            registry.register(gen)
        except (ValueError, WorkbenchError) as exc:
            raise ParseError(f"bad generator {label}: {exc}", line, column) from exc
    return DiffPoly.of(DerivedGen(gen))


def parse(text: str, dialect: Union[Dialect, str] = Dialect.COEFF) -> Expr:
    """
    Parse text into an AST.

    Raises:
        ParseError: syntax error, unknown generator or dialect violation
    """
    return Parser(text, Dialect(dialect)).parse()


# -- printing ---------------------------------------------------------------


def _frac(q: Fraction) -> str:
    return str(q.numerator) if q.denominator == 1 else f"{q.numerator}/{q.denominator}"


def _is_atom(node: Expr) -> bool:
    return isinstance(node, (Gen, Sym, Deriv)) or (
        isinstance(node, Num) and node.value >= 0 and node.value.denominator == 1
    )


def ast_to_text(node: Expr) -> str:
    """Surface text that parses back to the same AST."""
    if isinstance(node, Num):
        return _frac(node.value) if node.value >= 0 else f"({_frac(node.value)})"
    if isinstance(node, Gen):
        return node.label
    if isinstance(node, Sym):
        return node.name
    if isinstance(node, HPow):
        if node.exp == 1:
            return "h"
        return f"h^{node.exp}" if node.exp.denominator == 1 else f"h^({_frac(node.exp)})"
    if isinstance(node, Deriv):
        return f"d[{node.a},{node.b}]({ast_to_text(node.operand)})"
    if isinstance(node, Neg):
        inner = ast_to_text(node.operand)
        if isinstance(node.operand, (BinOp, Neg)):
            inner = f"({inner})"
        return f"-{inner}"
    if isinstance(node, Pow):
        base = ast_to_text(node.base)
        if not _is_atom(node.base):
            base = f"({base})"
        exp = str(node.exp) if node.exp >= 0 else f"({node.exp})"
        return f"{base}^{exp}"
    if isinstance(node, Apply):
        op = ast_to_text(node.op)
        if not isinstance(node.op, Sym):
            op = f"({op})"
        return f"{op}({ast_to_text(node.arg)})"
    left, right = ast_to_text(node.left), ast_to_text(node.right)
    if node.op == "*":
        if isinstance(node.left, (BinOp, Neg)) and not _is_product(node.left):
            left = f"({left})"
        if isinstance(node.right, (BinOp, Neg)) or _is_fraction(node.right):
            right = f"({right})"
        return f"{left}*{right}"
    if isinstance(node.right, BinOp) and not _is_product(node.right):
        right = f"({right})"
    return f"{left} {node.op} {right}"


def _is_product(node: Expr) -> bool:
    return isinstance(node, BinOp) and node.op == "*"


def _is_fraction(node: Expr) -> bool:
    return isinstance(node, Num) and node.value.denominator != 1


# -- lowering ---------------------------------------------------------------

Value = Union[DiffPoly, OpPoly, PhasePoly]


def _common(left: Value, right: Value):
    if isinstance(left, OpPoly) or isinstance(right, OpPoly):
        if isinstance(left, PhasePoly) or isinstance(right, PhasePoly):
            raise ParseError("operators and phase polynomials do not mix")
        return OpPoly.coerce(left), OpPoly.coerce(right)
    if isinstance(left, PhasePoly) or isinstance(right, PhasePoly):
        return PhasePoly.coerce(left), PhasePoly.coerce(right)
    return left, right


class Lowering:
    """AST to DiffPoly, OpPoly or PhasePoly."""

    def __init__(self, dialect: Dialect = Dialect.COEFF):
        self.dialect = Dialect(dialect)

    def __call__(self, node: Expr) -> Value:
        value = self.value(node)
        if self.dialect == Dialect.OPERATOR:
            return OpPoly.coerce(value)
        if self.dialect == Dialect.PHASE:
            return PhasePoly.coerce(value)
        return value

    def value(self, node: Expr) -> Value:
        if isinstance(node, Num):
            return DiffPoly.const(node.value)
        if isinstance(node, Gen):
            return resolve_generator(node.label)
        if isinstance(node, HPow):
            return h(node.exp)
        if isinstance(node, Sym):
            if node.name in ("d", "dbar"):
                raise ParseError(f"{node.name} needs an argument, e.g. {node.name}(t2)")
            return {
                "D": OpPoly.D,
                "Dbar": OpPoly.Dbar,
                "p": PhasePoly.p,
                "pbar": PhasePoly.pbar,
            }[node.name]()
        if isinstance(node, Neg):
            return -self.value(node.operand)
        if isinstance(node, BinOp):
            left, right = _common(self.value(node.left), self.value(node.right))
            if node.op == "+":
                return left + right
            if node.op == "-":
                return left - right
            if isinstance(left, OpPoly):
                return op_mul(left, right)
            return left * right
        if isinstance(node, Pow):
            return self.value(node.base) ** node.exp
        if isinstance(node, Deriv):
            x = self.coefficient(node.operand)
            for _ in range(node.a):
                x = x.d()
            for _ in range(node.b):
                x = x.dbar()
            return x
        return self.apply(node.op, self.coefficient(node.arg))

    def coefficient(self, node: Expr) -> DiffPoly:
        x = self.value(node)
        if not isinstance(x, DiffPoly):
            raise ParseError("derivatives apply to coefficient expressions only")
        return x

    def apply(self, node: Expr, f: DiffPoly) -> DiffPoly:
        """Act with a derivation-valued expression on f."""
        if not _has_derivation(node):
            return self.coefficient(node) * f
        if isinstance(node, Sym):
            return f.d() if node.name == "d" else f.dbar()
        if isinstance(node, Neg):
            return -self.apply(node.operand, f)
        if isinstance(node, Pow):
            if node.exp < 0:
                raise ParseError("negative powers of a derivation")
            for _ in range(node.exp):
                f = self.apply(node.base, f)
            return f
        assert isinstance(node, BinOp)
        if node.op == "+":
            return self.apply(node.left, f) + self.apply(node.right, f)
        if node.op == "-":
            return self.apply(node.left, f) - self.apply(node.right, f)
        return self.apply(node.left, self.apply(node.right, f))


def lower(node: Expr, dialect: Union[Dialect, str] = Dialect.COEFF) -> Value:
    return Lowering(Dialect(dialect))(node)


def parse_expression(text: str, dialect: Union[Dialect, str] = Dialect.COEFF) -> Value:
    """parse followed by lower."""
    node = parse(text, dialect)
    value = lower(node, dialect)
    logger.debug("parsed %s expression with %s", Dialect(dialect).value, type(value).__name__)
    return value
