from __future__ import annotations

import logging
import math
import time
from fractions import Fraction
from typing import List, Optional, Sequence, Tuple

from config import settings
from core.errors import DomainError, UnboundedError
from core.exact import dot
from core.instance_io import to_lp
from core.models import DecomposedMip, LpStatus, MipOutcome, MipStatus, SearchLimits, Sense
from core.ratlp import LpProblem, solve_lp

logger = logging.getLogger(__name__)

# (column, sense, bound)
BoundRow = Tuple[int, Sense, int]


def default_limits() -> SearchLimits:
    return SearchLimits(node_limit=settings.node_limit, time_limit=settings.time_limit)


def _with_bounds(problem: LpProblem, bounds: Sequence[BoundRow]) -> LpProblem:
    n = problem.num_vars
    rows = [[Fraction(int(k == col)) for k in range(n)] for col, _, _ in bounds]
    return problem.with_rows(rows, [b for _, _, b in bounds], [s for _, s, _ in bounds])


def solve_mip(
    problem: LpProblem,
    integer_cols: Sequence[int],
    limits: Optional[SearchLimits] = None,
) -> MipOutcome:
    """
    Exact depth-first branch-and-bound with single-variable dichotomy branching.

    Branches on the lowest-index fractional integer column; the <= floor child
    is explored first. Raises UnboundedError if the root relaxation is unbounded.
    """
    limits = limits or default_limits()
    integer_cols = sorted(set(integer_cols))
    for j in integer_cols:
        if not 0 <= j < problem.num_vars:
            raise DomainError(f"integer column {j} out of range")

    start = time.monotonic()
    stack: List[Tuple[BoundRow, ...]] = [()]
    incumbent: Optional[List[Fraction]] = None
    best: Optional[Fraction] = None
    nodes = 0

    def _stop(status: MipStatus) -> MipOutcome:
        logger.info("branch-and-bound stopped by %s after %d nodes", status.value, nodes)
        return MipOutcome(status=status, incumbent=incumbent, value=best, nodes=nodes)

    while stack:
        if nodes >= limits.node_limit:
            return _stop(MipStatus.node_limit)
        if time.monotonic() - start > limits.time_limit:
            return _stop(MipStatus.time_limit)

        bounds = stack.pop()
        nodes += 1
        outcome = solve_lp(_with_bounds(problem, bounds))

        if outcome.status == LpStatus.unbounded:
            raise UnboundedError("LP relaxation is unbounded; instances must have a bounded relaxation")
        if outcome.status == LpStatus.infeasible:
            continue
        if best is not None and outcome.value >= best:
            continue

        solution = outcome.solution
        fractional = next((j for j in integer_cols if solution[j].denominator != 1), None)
        if fractional is None:
            incumbent, best = list(solution), outcome.value
            logger.debug("new incumbent %s at node %d", best, nodes)
            continue

        floor_v = math.floor(solution[fractional])
        # LIFO: the <= child is pushed last so it is explored first
        stack.append(bounds + ((fractional, Sense.ge, floor_v + 1),))
        stack.append(bounds + ((fractional, Sense.le, floor_v),))

    status = MipStatus.optimal if incumbent is not None else MipStatus.infeasible
    return MipOutcome(status=status, incumbent=incumbent, value=best, nodes=nodes)


def solve_baseline(mip: DecomposedMip, limits: Optional[SearchLimits] = None) -> MipOutcome:
    """Reference solve of the whole decomposed problem, ignoring its block structure."""
    return solve_mip(to_lp(mip), mip.integer_columns(), limits)


def check_feasible(mip: DecomposedMip, point: Sequence[Fraction]) -> bool:
    """Exact feasibility of a stacked (x, y) point: rows, nonnegativity and integrality."""
    if len(point) != mip.num_vars:
        raise DomainError(f"point has {len(point)} coordinates, expected {mip.num_vars}")
    values = [Fraction(v) for v in point]
    if any(v < 0 for v in values):
        return False
    for j in mip.integer_columns():
        if values[j].denominator != 1:
            return False
    for i in range(mip.m):
        lhs = dot([Fraction(v) for v in mip.row_coefficients(i)], values)
        if not mip.senses[i].holds(lhs, Fraction(mip.g[i])):
            return False
    return True


def polish_to_vertex(mip: DecomposedMip, point: Sequence[Fraction]) -> List[Fraction]:
    """
    Fix the integer coordinates of a feasible point and re-optimize the
    continuous part. The result is a vertex of the fixed polyhedron and is no
    worse than the input point.
    """
    if not check_feasible(mip, point):
        raise DomainError("point is not feasible")
    fixed = [(j, Sense.eq, int(point[j])) for j in mip.integer_columns()]
    outcome = solve_lp(_with_bounds(to_lp(mip), fixed))
    if outcome.status != LpStatus.optimal:
        raise DomainError(f"fixed problem is {outcome.status.value}")
    return list(outcome.solution)


__all__ = [
    "default_limits",
    "solve_mip",
    "solve_baseline",
    "check_feasible",
    "polish_to_vertex",
]
