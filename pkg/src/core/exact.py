from __future__ import annotations

import math
from dataclasses import dataclass
from fractions import Fraction
from typing import Iterable, List, Optional, Sequence, Tuple, Union

from core.errors import DomainError, SingularMatrixError

# Every scalar in the toolkit is a Fraction: canonical lowest terms with a
# positive denominator after every operation.
Rational = Fraction

RationalLike = Union[Fraction, int, str]


def to_rational(value: RationalLike) -> Fraction:
    """Coerce ints, Fractions and "num/den" text into a Fraction; floats are refused."""
    if isinstance(value, bool):
        raise DomainError("booleans are not rationals")
    if isinstance(value, Fraction):
        return value
    if isinstance(value, int):
        return Fraction(value)
    if isinstance(value, str):
        text = value.strip()
        try:
            return Fraction(text)
        except (ValueError, ZeroDivisionError):
            raise DomainError(f"not a rational: {value!r}")
    raise DomainError(f"not an exact rational: {value!r} ({type(value).__name__})")


def format_rational(value: Fraction) -> str:
    # Fraction.__str__ already yields "num/den" in lowest terms, or "num" when den == 1.
    return str(Fraction(value))


def lcm_all(values: Iterable[int]) -> int:
    items = list(values)
    if not items:
        raise DomainError("lcm of an empty list is undefined")
    if any(v == 0 for v in items):
        raise DomainError("lcm is only defined for nonzero values")
    return math.lcm(*(abs(v) for v in items))


def is_integral(value: Fraction) -> bool:
    return Fraction(value).denominator == 1


def dot(u: Sequence[Fraction], v: Sequence[Fraction]) -> Fraction:
    if len(u) != len(v):
        raise DomainError(f"dot product of vectors with lengths {len(u)} and {len(v)}")
    total = Fraction(0)
    for a, b in zip(u, v):
        if a and b:
            total += a * b
    return total


@dataclass(frozen=True)
class RatMatrix:
    """
    Dense row-major matrix of exact rationals.

    Instances are immutable; every operation returns a new matrix.
    """

    rows: int
    cols: int
    entries: Tuple[Fraction, ...]

    def __post_init__(self) -> None:
        if self.rows < 0 or self.cols < 0:
            raise DomainError("matrix dimensions must be nonnegative")
        if len(self.entries) != self.rows * self.cols:
            raise DomainError(
                f"expected {self.rows * self.cols} entries for a {self.rows}x{self.cols} matrix, "
                f"got {len(self.entries)}"
            )

    @classmethod
    def from_rows(cls, rows: Sequence[Sequence[RationalLike]], cols: Optional[int] = None) -> "RatMatrix":
        if not rows:
            return cls(0, cols or 0, ())
        width = len(rows[0])
        if any(len(r) != width for r in rows):
            raise DomainError("ragged rows")
        entries = tuple(to_rational(v) for r in rows for v in r)
        return cls(len(rows), width, entries)

    @classmethod
    def identity(cls, n: int) -> "RatMatrix":
        return cls(n, n, tuple(Fraction(int(i == j)) for i in range(n) for j in range(n)))

    @classmethod
    def zeros(cls, rows: int, cols: int) -> "RatMatrix":
        return cls(rows, cols, (Fraction(0),) * (rows * cols))

    def __getitem__(self, index: Tuple[int, int]) -> Fraction:
        i, j = index
        return self.entries[i * self.cols + j]

    @property
    def is_square(self) -> bool:
        return self.rows == self.cols

    def row(self, i: int) -> List[Fraction]:
        start = i * self.cols
        return list(self.entries[start:start + self.cols])

    def column(self, j: int) -> List[Fraction]:
        return [self.entries[i * self.cols + j] for i in range(self.rows)]

    def to_rows(self) -> List[List[Fraction]]:
        return [self.row(i) for i in range(self.rows)]

    def submatrix(self, row_idx: Sequence[int], col_idx: Sequence[int]) -> "RatMatrix":
        entries = tuple(self.entries[i * self.cols + j] for i in row_idx for j in col_idx)
        return RatMatrix(len(row_idx), len(col_idx), entries)

    def transpose(self) -> "RatMatrix":
        return RatMatrix(self.cols, self.rows, tuple(self[i, j] for j in range(self.cols) for i in range(self.rows)))

    def __matmul__(self, other: "RatMatrix") -> "RatMatrix":
        if self.cols != other.rows:
            raise DomainError(f"cannot multiply {self.rows}x{self.cols} by {other.rows}x{other.cols}")
        out: List[Fraction] = []
        for i in range(self.rows):
            left = self.row(i)
            for j in range(other.cols):
                out.append(dot(left, other.column(j)))
        return RatMatrix(self.rows, other.cols, tuple(out))

    def scale(self, factor: RationalLike) -> "RatMatrix":
        f = to_rational(factor)
        return RatMatrix(self.rows, self.cols, tuple(f * v for v in self.entries))

    def is_integral(self) -> bool:
        return all(v.denominator == 1 for v in self.entries)

    def integer_rows(self) -> List[List[int]]:
        if not self.is_integral():
            raise DomainError("matrix is not integral")
        return [[int(v) for v in self.row(i)] for i in range(self.rows)]


def bareiss_det(rows: Sequence[Sequence[int]]) -> int:
    """Fraction-free determinant of a square integer matrix."""
    n = len(rows)
    if n == 0:
        return 1
    m = [list(r) for r in rows]
    sign = 1
    prev = 1
    for k in range(n - 1):
        if m[k][k] == 0:
            for i in range(k + 1, n):
                if m[i][k] != 0:
                    m[k], m[i] = m[i], m[k]
                    sign = -sign
                    break
            else:
                return 0
        pivot = m[k][k]
        for i in range(k + 1, n):
            factor = m[i][k]
            row_i = m[i]
            row_k = m[k]
            for j in range(k + 1, n):
                row_i[j] = (pivot * row_i[j] - factor * row_k[j]) // prev
            row_i[k] = 0
        prev = pivot
    return sign * m[n - 1][n - 1]


def scaled_inverse(rows: Sequence[Sequence[int]]) -> Optional[Tuple[int, List[List[int]]]]:
    """
    Fraction-free Gauss-Jordan on [R | I] for a square integer matrix R.

    Returns (d, X) with d = +-det(R) and X = d * R^-1 integral, or None when R
    is singular. All divisions by the previous pivot are exact.
    """
    n = len(rows)
    width = 2 * n
    m = [list(r) + [int(i == j) for j in range(n)] for i, r in enumerate(rows)]
    prev = 1
    for k in range(n):
        if m[k][k] == 0:
            for i in range(k + 1, n):
                if m[i][k] != 0:
                    m[k], m[i] = m[i], m[k]
                    break
            else:
                return None
        pivot = m[k][k]
        row_k = m[k]
        for i in range(n):
            if i == k:
                continue
            row_i = m[i]
            factor = row_i[k]
            for j in range(width):
                row_i[j] = (pivot * row_i[j] - factor * row_k[j]) // prev
        prev = pivot
    d = m[0][0]
    return d, [row[n:] for row in m]


def _rational_det(mat: RatMatrix) -> Fraction:
    n = mat.rows
    m = mat.to_rows()
    det = Fraction(1)
    for k in range(n):
        pivot_row = next((i for i in range(k, n) if m[i][k] != 0), None)
        if pivot_row is None:
            return Fraction(0)
        if pivot_row != k:
            m[k], m[pivot_row] = m[pivot_row], m[k]
            det = -det
        pivot = m[k][k]
        det *= pivot
        for i in range(k + 1, n):
            factor = m[i][k] / pivot
            if factor:
                for j in range(k, n):
                    m[i][j] -= factor * m[k][j]
    return det


def det(mat: RatMatrix) -> Fraction:
    if not mat.is_square:
        raise DomainError(f"determinant of a non-square {mat.rows}x{mat.cols} matrix")
    if mat.is_integral():
        return Fraction(bareiss_det(mat.integer_rows()))
    return _rational_det(mat)


def inverse(mat: RatMatrix) -> RatMatrix:
    if not mat.is_square:
        raise DomainError(f"inverse of a non-square {mat.rows}x{mat.cols} matrix")
    n = mat.rows
    a = mat.to_rows()
    inv = RatMatrix.identity(n).to_rows()
    for k in range(n):
        pivot_row = next((i for i in range(k, n) if a[i][k] != 0), None)
        if pivot_row is None:
            raise SingularMatrixError("matrix is singular")
        if pivot_row != k:
            a[k], a[pivot_row] = a[pivot_row], a[k]
            inv[k], inv[pivot_row] = inv[pivot_row], inv[k]
        pivot = a[k][k]
        a[k] = [v / pivot for v in a[k]]
        inv[k] = [v / pivot for v in inv[k]]
        for i in range(n):
            if i != k and a[i][k] != 0:
                factor = a[i][k]
                a[i] = [x - factor * y for x, y in zip(a[i], a[k])]
                inv[i] = [x - factor * y for x, y in zip(inv[i], inv[k])]
    return RatMatrix.from_rows(inv)


def denominator_lcm(mat: RatMatrix) -> int:
    return math.lcm(1, *(v.denominator for v in mat.entries))


__all__ = [
    "Rational",
    "RationalLike",
    "RatMatrix",
    "to_rational",
    "format_rational",
    "lcm_all",
    "is_integral",
    "dot",
    "bareiss_det",
    "scaled_inverse",
    "det",
    "inverse",
    "denominator_lcm",
]
