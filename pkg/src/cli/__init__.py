"""
Command line

Expression-language parser with coeff/operator/phase dialects, session setup,
text/LaTeX/JSON renderers and the `flatwkb` command dispatch.
"""

from .main import build_parser, main, run
from .parser import Dialect, ExprAst, ast_to_text, lower, parse, parse_expression, tokenize
from .render import Format, render, render_matrix, render_named, render_poly, render_state
from .session import Session

__all__ = [
    "Dialect",
    "ExprAst",
    "Format",
    "Session",
    "ast_to_text",
    "build_parser",
    "lower",
    "main",
    "parse",
    "parse_expression",
    "render",
    "render_matrix",
    "render_named",
    "render_poly",
    "render_state",
    "run",
    "tokenize",
]
