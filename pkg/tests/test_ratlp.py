from __future__ import annotations

import random
from fractions import Fraction

import pytest

from core.errors import CapExceededError, DomainError, InfeasibleError, UnboundedError
from core.instance_io import to_lp
from core.models import LpStatus, Sense
from core.ratlp import LpProblem, enumerate_vertices, solve_lp

GE, LE, EQ = Sense.ge, Sense.le, Sense.eq


def test_optimal_vertex_is_exact():
    lp = LpProblem.build([-1, -1], [[1, 2], [3, 1]], [4, 6], [LE, LE])
    out = solve_lp(lp)
    assert out.status == LpStatus.optimal
    assert out.solution == [Fraction(8, 5), Fraction(6, 5)]
    assert out.value == Fraction(-14, 5)


def test_infeasible_and_unbounded():
    assert solve_lp(LpProblem.build([1], [[1], [1]], [2, 1], [GE, LE])).status == LpStatus.infeasible
    assert solve_lp(LpProblem.build([-1], [[1]], [1], [GE])).status == LpStatus.unbounded


def test_negative_rhs_equation():
    out = solve_lp(LpProblem.build([1, 0], [[-1, -1]], [-3], [EQ]))
    assert out.status == LpStatus.optimal
    assert out.solution == [0, 3]
    assert out.value == 0


def test_redundant_equations_are_dropped():
    out = solve_lp(LpProblem.build([1, 2], [[1, 1], [2, 2]], [2, 4], [EQ, EQ]))
    assert out.status == LpStatus.optimal
    assert out.solution == [2, 0]
    assert out.value == 2


def test_no_variables():
    assert solve_lp(LpProblem.build([], [], [], [])).value == 0
    assert solve_lp(LpProblem.build([], [[]], [1], [GE])).status == LpStatus.infeasible


def test_dimension_mismatch():
    with pytest.raises(DomainError):
        LpProblem.build([1, 1], [[1, 1]], [1, 2], [GE])
    with pytest.raises(DomainError):
        LpProblem.build([1], [[1, 1]], [1], [GE])


def test_root_relaxation_of_two_block_example(eq12):
    out = solve_lp(to_lp(eq12))
    assert out.status == LpStatus.optimal
    assert out.value == Fraction(1, 5)
    x1, _, y1, y2 = out.solution
    assert (x1, y1, y2) == (Fraction(3, 5), Fraction(1, 5), 0)


def test_enumerate_vertices_of_rounding_polytope(matrix):
    A = matrix("rounding_example")
    lp = LpProblem.build([0, 0], A, [-5, -2, -5], [GE, GE, GE])
    vertices = {tuple(v) for v in enumerate_vertices(lp)}
    assert vertices == {
        (0, 0),
        (2, 0),
        (Fraction(7, 2), Fraction(3, 2)),
        (Fraction(5, 2), Fraction(5, 2)),
        (0, Fraction(5, 2)),
    }


def test_vertices_of_two_regular_matrix_lie_on_half_lattice(matrix):
    A = matrix("rounding_example")
    rng = random.Random(7)
    for _ in range(100):
        b = [rng.randint(-12, 0) for _ in range(3)]
        lp = LpProblem.build([0, 0], A, b, [GE, GE, GE])
        for vertex in enumerate_vertices(lp):
            assert all((2 * v).denominator == 1 for v in vertex), (b, vertex)


def test_enumerate_vertices_preconditions():
    with pytest.raises(InfeasibleError):
        enumerate_vertices(LpProblem.build([0], [[1], [1]], [2, 1], [GE, LE]))
    with pytest.raises(UnboundedError):
        enumerate_vertices(LpProblem.build([0], [[1]], [1], [GE]))
    with pytest.raises(CapExceededError):
        enumerate_vertices(LpProblem.build([0] * 3, [[1, 1, 1]], [1], [LE]), var_cap=2)


def test_simplex_matches_the_best_vertex():
    rng = random.Random(23)
    for _ in range(40):
        n = rng.randint(1, 5)
        m = rng.randint(0, 5)
        rows = [[rng.randint(-3, 3) for _ in range(n)] for _ in range(m)] + [[1] * n]
        senses = [rng.choice([LE, GE]) for _ in range(m)] + [LE]
        # the origin stays feasible and the last row bounds the region
        rhs = [rng.randint(0, 10) if s == LE else rng.randint(-10, 0) for s in senses[:m]] + [10]
        objective = [rng.randint(-5, 5) for _ in range(n)]
        lp = LpProblem.build(objective, rows, rhs, senses)
        out = solve_lp(lp)
        assert out.status == LpStatus.optimal
        vertices = enumerate_vertices(lp)
        best = min(sum(Fraction(c) * v for c, v in zip(objective, vertex)) for vertex in vertices)
        assert out.value == best
        assert out.solution in vertices


def test_degenerate_problem_with_duplicated_rows_terminates():
    # a classic cycling example for Dantzig's rule, scaled to integers, rows repeated
    rows = [[1, -32, -4, 36], [1, -24, -1, 6], [0, 0, 1, 0]]
    lp = LpProblem.build([-3, 80, -2, 24], rows + rows[:2], [0, 0, 1, 0, 0], [LE] * 5)
    out = solve_lp(lp)
    assert out.status == LpStatus.optimal
    assert out.value == -5
    assert out.solution == [1, 0, 1, 0]
