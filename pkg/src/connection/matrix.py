"""Square matrices of DiffPoly as nested lists (row-major)."""

from fractions import Fraction
from typing import Callable, List, Sequence, Union

from ..diffalg import DiffPoly, poly_sum

Matrix = List[List[DiffPoly]]


def zeros(n: int) -> Matrix:
    return [[DiffPoly.zero() for _ in range(n)] for _ in range(n)]


def identity(n: int) -> Matrix:
    return [[DiffPoly.const(1 if i == j else 0) for j in range(n)] for i in range(n)]


def from_rationals(rows: Sequence[Sequence[Union[int, Fraction]]]) -> Matrix:
    return [[DiffPoly.const(v) for v in row] for row in rows]


def mat_map(a: Matrix, fn: Callable[[DiffPoly], DiffPoly]) -> Matrix:
    return [[fn(x) for x in row] for row in a]


def mat_add(a: Matrix, b: Matrix) -> Matrix:
    return [[x + y for x, y in zip(ra, rb)] for ra, rb in zip(a, b)]


def mat_sub(a: Matrix, b: Matrix) -> Matrix:
    return [[x - y for x, y in zip(ra, rb)] for ra, rb in zip(a, b)]


def mat_scale(a: Matrix, c: Union[DiffPoly, int, Fraction]) -> Matrix:
    c = DiffPoly.coerce(c)
    return mat_map(a, lambda x: x * c)


def mat_mul(a: Matrix, b: Matrix) -> Matrix:
    n, m = len(a), len(b[0])
    return [
        [
            poly_sum(a[i][k] * b[k][j] for k in range(len(b)) if a[i][k] and b[k][j])
            for j in range(m)
        ]
        for i in range(n)
    ]


def bracket(a: Matrix, b: Matrix) -> Matrix:
    return mat_sub(mat_mul(a, b), mat_mul(b, a))


def trace(a: Matrix) -> DiffPoly:
    return poly_sum(a[i][i] for i in range(len(a)))


def transpose(a: Matrix) -> Matrix:
    return [list(col) for col in zip(*a)]


def is_zero(a: Matrix) -> bool:
    return all(x.is_zero() for row in a for x in row)


def minors2(a: Matrix) -> List[DiffPoly]:
    """All 2×2 minors."""
    n = len(a)
    out = []
    for i1 in range(n):
        for i2 in range(i1 + 1, n):
            for j1 in range(n):
                for j2 in range(j1 + 1, n):
                    out.append(a[i1][j1] * a[i2][j2] - a[i1][j2] * a[i2][j1])
    return out


def unipotent_inverse(g: Matrix) -> Matrix:
    """Inverse of I + N with N nilpotent: Σ (−N)^k."""
    n = len(g)
    N = mat_sub(g, identity(n))
    term = identity(n)
    out = identity(n)
    for _ in range(n - 1):
        term = mat_mul(term, mat_scale(N, -1))
        out = mat_add(out, term)
    return out


def support(a: Matrix) -> List[tuple]:
    """Positions of nonzero entries."""
    return [(i, j) for i, row in enumerate(a) for j, x in enumerate(row) if x]
