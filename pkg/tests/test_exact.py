from __future__ import annotations

from fractions import Fraction

import pytest

from core.errors import DomainError, SingularMatrixError
from core.exact import (
    RatMatrix,
    bareiss_det,
    denominator_lcm,
    det,
    dot,
    format_rational,
    inverse,
    lcm_all,
    scaled_inverse,
    to_rational,
    _rational_det,
)


def test_to_rational_parses_text_and_reduces():
    assert to_rational("3/6") == Fraction(1, 2)
    assert to_rational(" -4 ") == Fraction(-4)
    assert to_rational(7) == Fraction(7)


@pytest.mark.parametrize("bad", [0.5, True, "1/0", "abc", None])
def test_to_rational_refuses_inexact_or_malformed(bad):
    with pytest.raises(DomainError):
        to_rational(bad)


def test_format_rational():
    assert format_rational(Fraction(2, 4)) == "1/2"
    assert format_rational(Fraction(3)) == "3"
    assert format_rational(Fraction(-19, 2)) == "-19/2"


def test_lcm_all():
    assert lcm_all([2, 3, 4, 5]) == 60
    assert lcm_all([-4, 6]) == 12
    with pytest.raises(DomainError):
        lcm_all([])
    with pytest.raises(DomainError):
        lcm_all([3, 0])


def test_dot_length_mismatch():
    with pytest.raises(DomainError):
        dot([Fraction(1)], [Fraction(1), Fraction(2)])


def test_matrix_shape_checks():
    with pytest.raises(DomainError):
        RatMatrix.from_rows([[1, 2], [3]])
    a = RatMatrix.from_rows([[1, 2, 3]])
    with pytest.raises(DomainError):
        a @ a
    assert (a @ a.transpose()).to_rows() == [[Fraction(14)]]


def test_det_integral_and_rational():
    assert det(RatMatrix.from_rows([[1, 1], [-1, 4]])) == 5
    assert det(RatMatrix.from_rows([[2, 0, 1], [1, 3, 2], [1, 1, 2]])) == 6
    assert det(RatMatrix.from_rows([["1/2", 1], [1, 4]])) == 1
    assert det(RatMatrix.from_rows([[1, 2], [2, 4]])) == 0
    with pytest.raises(DomainError):
        det(RatMatrix.from_rows([[1, 2, 3], [4, 5, 6]]))


def test_bareiss_matches_rational_elimination():
    rows = [[3, -1, 2, 0], [1, 4, 0, -2], [0, 2, 5, 1], [-2, 0, 1, 3]]
    rational = _rational_det(RatMatrix.from_rows(rows))
    assert bareiss_det(rows) == rational
    # a swap is needed at the first pivot
    assert bareiss_det([[0, 1], [1, 0]]) == -1


def test_scaled_inverse_is_fraction_free():
    d, X = scaled_inverse([[1, 1], [-1, 4]])
    assert d == 5
    assert X == [[4, -1], [1, 1]]
    assert scaled_inverse([[1, 2], [2, 4]]) is None


def test_inverse_roundtrip():
    m = RatMatrix.from_rows([[2, 1, 0], [1, 3, 1], [0, 1, 4]])
    assert m @ inverse(m) == RatMatrix.identity(3)
    assert denominator_lcm(inverse(RatMatrix.from_rows([[1, 1], [-1, 4]]))) == 5
    with pytest.raises(SingularMatrixError):
        inverse(RatMatrix.from_rows([[1, 2], [2, 4]]))
