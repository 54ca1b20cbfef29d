import logging
import operator
from fractions import Fraction
from typing import Annotated, Callable, Dict, Optional, Sequence, Tuple, Union

from pydantic import BeforeValidator, PlainSerializer

# Configure module logger
logger = logging.getLogger(__name__)

Rational = Fraction
QVector = Tuple[Fraction, ...]
QMatrix = Tuple[QVector, ...]
RationalLike = Union[Fraction, int, str]


class RationalArithmeticError(ValueError):
    """Raised for undefined rational operations (division by zero, bad literals)."""


_OPS: Dict[str, Callable[[Fraction, Fraction], Fraction]] = {
    "add": operator.add,
    "sub": operator.sub,
    "mul": operator.mul,
    "div": operator.truediv,
}


def to_rational(value: RationalLike) -> Fraction:
    """
    Converts ints, Fractions and "p/q" strings to a reduced Fraction.
    Floats are refused so that no binary rounding leaks into the geometry.
    """
    if isinstance(value, bool):
        raise RationalArithmeticError(f"Cannot read a boolean as a rational: {value!r}")
    if isinstance(value, Fraction):
        return value
    if isinstance(value, int):
        return Fraction(value)
    if isinstance(value, str):
        try:
            return Fraction(value.strip())
        except (ValueError, ZeroDivisionError) as e:
            raise RationalArithmeticError(f"Invalid rational literal {value!r}: {e}") from e
    raise RationalArithmeticError(f"Cannot convert {type(value).__name__} to a rational")


def rat_str(x: Fraction) -> str:
    """Serializes as "p/q", or "p" when the denominator is 1."""
    x = to_rational(x)
    if x.denominator == 1:
        return str(x.numerator)
    return f"{x.numerator}/{x.denominator}"


# Field type for pydantic models: accepts "p/q" strings and ints, dumps as "p/q".
QQ = Annotated[Fraction, BeforeValidator(to_rational), PlainSerializer(rat_str, return_type=str)]


def rat_arith(op: str, a: RationalLike, b: RationalLike) -> Fraction:
    """
    Exact add/sub/mul/div on rationals. Division by zero is reported as a
    RationalArithmeticError rather than escaping as ZeroDivisionError.
    """
    a, b = to_rational(a), to_rational(b)
    if op not in _OPS:
        raise RationalArithmeticError(f"Unknown rational operation: {op}")
    if op == "div" and b == 0:
        raise RationalArithmeticError(f"Division by zero: {rat_str(a)} / 0")
    return _OPS[op](a, b)


def rat_cmp(a: RationalLike, b: RationalLike) -> int:
    a, b = to_rational(a), to_rational(b)
    return (a > b) - (a < b)


def qvector(values: Sequence[RationalLike]) -> QVector:
    return tuple(to_rational(v) for v in values)


def qmatrix(rows: Sequence[Sequence[RationalLike]]) -> QMatrix:
    matrix = tuple(qvector(row) for row in rows)
    if matrix and len({len(row) for row in matrix}) != 1:
        raise ValueError("Ragged matrix: all rows must have the same length")
    return matrix


def dot(u: Sequence[Fraction], v: Sequence[Fraction]) -> Fraction:
    if len(u) != len(v):
        raise ValueError(f"Dimension mismatch in dot product: {len(u)} vs {len(v)}")
    return sum((x * y for x, y in zip(u, v) if x and y), Fraction(0))


def mat_vec(M: QMatrix, v: QVector) -> QVector:
    return tuple(dot(row, v) for row in M)


def _eliminate(rows, n_cols):
    """
    Gauss-Jordan elimination in place on a list of lists of Fractions.
    Returns (pivot_columns, sign) where sign tracks row swaps.
    """
    pivots = []
    sign = 1
    r = 0
    for col in range(n_cols):
        pivot = next((i for i in range(r, len(rows)) if rows[i][col] != 0), None)
        if pivot is None:
            continue
        if pivot != r:
            rows[r], rows[pivot] = rows[pivot], rows[r]
            sign = -sign
        lead = rows[r][col]
        for i in range(len(rows)):
            if i != r and rows[i][col] != 0:
                f = rows[i][col] / lead
                rows[i] = [x - f * y for x, y in zip(rows[i], rows[r])]
        pivots.append(col)
        r += 1
        if r == len(rows):
            break
    return pivots, sign


def solve_linear(M: Sequence[Sequence[RationalLike]], v: Sequence[RationalLike]) -> Optional[QVector]:
    """
    Solves M x = v exactly for square M. Returns None when M is singular.
    """
    M = qmatrix(M)
    v = qvector(v)
    n = len(M)
    if any(len(row) != n for row in M):
        raise ValueError("solve_linear requires a square matrix")
    if len(v) != n:
        raise ValueError(f"Right-hand side has length {len(v)}, expected {n}")
    augmented = [list(row) + [rhs] for row, rhs in zip(M, v)]
    pivots, _ = _eliminate(augmented, n)
    if len(pivots) < n:
        return None
    return tuple(augmented[i][n] / augmented[i][i] for i in range(n))


def determinant(M: Sequence[Sequence[RationalLike]]) -> Fraction:
    M = qmatrix(M)
    n = len(M)
    if any(len(row) != n for row in M):
        raise ValueError("determinant requires a square matrix")
    if n == 0:
        return Fraction(1)
    rows = [list(row) for row in M]
    # Forward elimination only; the product of the diagonal is the determinant.
    det = Fraction(1)
    for col in range(n):
        pivot = next((i for i in range(col, n) if rows[i][col] != 0), None)
        if pivot is None:
            return Fraction(0)
        if pivot != col:
            rows[col], rows[pivot] = rows[pivot], rows[col]
            det = -det
        lead = rows[col][col]
        det *= lead
        for i in range(col + 1, n):
            if rows[i][col] != 0:
                f = rows[i][col] / lead
                rows[i] = [x - f * y for x, y in zip(rows[i], rows[col])]
    return det


def rank(M: Sequence[Sequence[RationalLike]]) -> int:
    M = qmatrix(M)
    if not M:
        return 0
    pivots, _ = _eliminate([list(row) for row in M], len(M[0]))
    return len(pivots)


def affine_rank(points: Sequence[QVector]) -> int:
    """Dimension of the affine hull of a point set (-1 for the empty set)."""
    if not points:
        return -1
    base = points[0]
    return rank([tuple(x - y for x, y in zip(p, base)) for p in points[1:]]) if len(points) > 1 else 0
