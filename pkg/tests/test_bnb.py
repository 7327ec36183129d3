from __future__ import annotations

import itertools
import random
from fractions import Fraction

import pytest

from core import bnb
from core.bnb import check_feasible, polish_to_vertex, solve_baseline, solve_mip
from core.errors import DomainError, UnboundedError
from core.models import LpStatus, MipStatus, SearchLimits, Sense
from core.ratlp import LpProblem, solve_lp

GE, LE, EQ = Sense.ge, Sense.le, Sense.eq


def test_small_knapsack():
    # max 5a + 4b  s.t. 6a + 4b <= 24, a + 2b <= 6, a, b integer
    lp = LpProblem.build([-5, -4], [[6, 4], [1, 2]], [24, 6], [LE, LE])
    out = solve_mip(lp, [0, 1])
    assert out.status == MipStatus.optimal
    assert out.value == -20
    assert out.incumbent == [4, 0]


def test_mixed_columns_stay_continuous():
    # min -x - y, x <= 3/2 as 2x <= 3, y <= x + 1/2 as 2y - 2x <= 1, y integer
    lp = LpProblem.build([-1, -1], [[2, 0], [-2, 2]], [3, 1], [LE, LE])
    out = solve_mip(lp, [1])
    assert out.status == MipStatus.optimal
    assert out.incumbent == [Fraction(3, 2), 2]
    assert out.value == Fraction(-7, 2)


def test_infeasible_integer_problem():
    # 2x = 1 has no integer solution
    lp = LpProblem.build([0], [[2]], [1], [Sense.eq])
    out = solve_mip(lp, [0])
    assert out.status == MipStatus.infeasible
    assert out.incumbent is None


def test_unbounded_root():
    with pytest.raises(UnboundedError):
        solve_mip(LpProblem.build([-1], [[1]], [0], [GE]), [0])


def test_node_limit_keeps_best_so_far():
    lp = LpProblem.build([-5, -4], [[6, 4], [1, 2]], [24, 6], [LE, LE])
    out = solve_mip(lp, [0, 1], SearchLimits(node_limit=1, time_limit=60))
    assert out.status == MipStatus.node_limit
    assert out.nodes == 1


def test_integer_column_out_of_range():
    with pytest.raises(DomainError):
        solve_mip(LpProblem.build([1], [[1]], [1], [GE]), [3])


def test_baseline_on_shipped_instances(eq12, misl_small, cfl_small):
    out = solve_baseline(eq12)
    assert out.status == MipStatus.optimal
    assert out.value == 1
    assert out.incumbent == [Fraction(1, 3), Fraction(2, 3), 1, 0]
    assert solve_baseline(misl_small).value == 93
    assert solve_baseline(cfl_small).value == 108


def test_check_feasible(eq12):
    assert check_feasible(eq12, [Fraction(1, 3), Fraction(2, 3), 1, 0])
    # LP optimum: fractional y
    assert not check_feasible(eq12, [Fraction(3, 5), Fraction(2, 5), Fraction(1, 5), 0])
    # integral but violates the linking row
    assert not check_feasible(eq12, [Fraction(1, 3), Fraction(1, 3), 1, 0])
    with pytest.raises(DomainError):
        check_feasible(eq12, [0, 0])


def test_polish_to_vertex_never_worsens(cfl_small):
    point = [1, 0, Fraction(1, 2), Fraction(1, 2), 1, 1]
    assert check_feasible(cfl_small, point)
    before = sum(Fraction(c) * v for c, v in zip(cfl_small.objective(), point))
    polished = polish_to_vertex(cfl_small, point)
    after = sum(Fraction(c) * v for c, v in zip(cfl_small.objective(), polished))
    assert check_feasible(cfl_small, polished)
    assert after <= before
    assert polished[4:] == [1, 1]
    assert all((12 * v).denominator == 1 for v in polished)


def _random_mip(rng):
    """k integer columns in [0, 3] followed by one continuous column in [0, 5]."""
    k = rng.randint(1, 3)
    n = k + 1
    rows = [[rng.randint(-3, 3) for _ in range(n)] for _ in range(rng.randint(1, 3))]
    rhs = [rng.randint(-2, 8) for _ in rows]
    caps = [3] * k + [5]
    rows += [[int(c == j) for c in range(n)] for j in range(n)]
    objective = [rng.randint(-5, 5) for _ in range(n)]
    return LpProblem.build(objective, rows, rhs + caps, [LE] * len(rows)), k


def _exhaustive_optimum(lp, k):
    best = None
    for values in itertools.product(range(4), repeat=k):
        fixed = lp.with_rows([[int(c == j) for c in range(lp.num_vars)] for j in range(k)], list(values), [EQ] * k)
        out = solve_lp(fixed)
        if out.status == LpStatus.optimal and (best is None or out.value < best):
            best = out.value
    return best


def test_matches_exhaustive_enumeration():
    rng = random.Random(31)
    for _ in range(25):
        lp, k = _random_mip(rng)
        out = solve_mip(lp, list(range(k)))
        best = _exhaustive_optimum(lp, k)
        if best is None:
            assert out.status == MipStatus.infeasible
        else:
            assert out.status == MipStatus.optimal
            assert out.value == best
            assert all(out.incumbent[j].denominator == 1 for j in range(k))


def test_child_relaxation_never_beats_its_parent(monkeypatch):
    values = {}
    pending = []
    real_bounds, real_solve = bnb._with_bounds, bnb.solve_lp

    def with_bounds(problem, bounds):
        pending.append(tuple(bounds))
        return real_bounds(problem, bounds)

    def solve(problem):
        out = real_solve(problem)
        values[pending.pop()] = out.value if out.status == LpStatus.optimal else None
        return out

    monkeypatch.setattr(bnb, "_with_bounds", with_bounds)
    monkeypatch.setattr(bnb, "solve_lp", solve)
    rng = random.Random(37)
    for _ in range(25):
        values.clear()
        lp, k = _random_mip(rng)
        solve_mip(lp, list(range(k)))
        assert () in values
        for bounds, value in values.items():
            if bounds and value is not None:
                parent = values[bounds[:-1]]
                assert parent is not None
                assert value >= parent
