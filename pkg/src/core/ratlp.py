from __future__ import annotations

import itertools
import logging
from dataclasses import dataclass
from fractions import Fraction
from typing import List, Optional, Sequence, Tuple

from config import settings
from core.errors import CapExceededError, DomainError, InfeasibleError, SingularMatrixError, UnboundedError
from core.exact import RatMatrix, RationalLike, dot, inverse, to_rational
from core.models import LpOutcome, LpStatus, Sense

logger = logging.getLogger(__name__)

_ZERO = Fraction(0)


@dataclass(frozen=True)
class LpProblem:
    """
    min objective.z  s.t.  matrix z (senses) rhs,  z >= 0.

    Nonnegativity is implicit for every variable.
    """

    objective: Tuple[Fraction, ...]
    matrix: RatMatrix
    rhs: Tuple[Fraction, ...]
    senses: Tuple[Sense, ...]

    def __post_init__(self) -> None:
        if len(self.rhs) != self.matrix.rows:
            raise DomainError(f"rhs has {len(self.rhs)} entries for {self.matrix.rows} rows")
        if len(self.senses) != self.matrix.rows:
            raise DomainError(f"senses has {len(self.senses)} entries for {self.matrix.rows} rows")
        if len(self.objective) != self.matrix.cols:
            raise DomainError(f"objective has {len(self.objective)} entries for {self.matrix.cols} columns")

    @classmethod
    def build(
        cls,
        objective: Sequence[RationalLike],
        rows: Sequence[Sequence[RationalLike]],
        rhs: Sequence[RationalLike],
        senses: Sequence[Sense],
    ) -> "LpProblem":
        obj = tuple(to_rational(v) for v in objective)
        matrix = RatMatrix.from_rows(rows) if rows else RatMatrix.zeros(0, len(obj))
        return cls(obj, matrix, tuple(to_rational(v) for v in rhs), tuple(Sense(s) for s in senses))

    @property
    def num_vars(self) -> int:
        return self.matrix.cols

    @property
    def num_rows(self) -> int:
        return self.matrix.rows

    def with_rows(
        self,
        rows: Sequence[Sequence[RationalLike]],
        rhs: Sequence[RationalLike],
        senses: Sequence[Sense],
    ) -> "LpProblem":
        if not rows:
            return self
        extra = RatMatrix.from_rows(rows)
        if extra.cols != self.num_vars:
            raise DomainError(f"added rows have {extra.cols} columns, expected {self.num_vars}")
        matrix = RatMatrix(self.num_rows + extra.rows, self.num_vars, self.matrix.entries + extra.entries)
        return LpProblem(
            self.objective,
            matrix,
            self.rhs + tuple(to_rational(v) for v in rhs),
            self.senses + tuple(Sense(s) for s in senses),
        )

    def with_objective(self, objective: Sequence[RationalLike]) -> "LpProblem":
        return LpProblem(tuple(to_rational(v) for v in objective), self.matrix, self.rhs, self.senses)

    def is_feasible_point(self, point: Sequence[Fraction]) -> bool:
        if len(point) != self.num_vars:
            raise DomainError(f"point has {len(point)} coordinates, expected {self.num_vars}")
        if any(v < 0 for v in point):
            return False
        return all(
            self.senses[i].holds(dot(self.matrix.row(i), point), self.rhs[i])
            for i in range(self.num_rows)
        )


class _Tableau:
    """
    Dense simplex tableau over Fractions, Bland's rule for both phases.

    Rows are stored as lists; pivots only touch the nonzero entries of the
    pivot row.
    """

    def __init__(self, problem: LpProblem):
        self.n = problem.num_vars
        rows: List[List[Fraction]] = []
        rhs: List[Fraction] = []
        kinds: List[str] = []  # "slack" (basic +1 slack), "surplus" (needs artificial), "eq"
        for i in range(problem.num_rows):
            coeffs = problem.matrix.row(i)
            b = problem.rhs[i]
            sense = problem.senses[i]
            # Normalize so that b >= 0, recording which slack sign results.
            if sense == Sense.eq:
                if b < 0:
                    coeffs, b = [-v for v in coeffs], -b
                kinds.append("eq")
            elif sense == Sense.le:
                if b >= 0:
                    kinds.append("slack")
                else:
                    coeffs, b = [-v for v in coeffs], -b
                    kinds.append("surplus")
            else:
                if b <= 0:
                    coeffs, b = [-v for v in coeffs], -b
                    kinds.append("slack")
                else:
                    kinds.append("surplus")
            rows.append(coeffs)
            rhs.append(b)

        num_slack = sum(1 for k in kinds if k != "eq")
        num_art = sum(1 for k in kinds if k != "slack")
        self.slack_start = self.n
        self.art_start = self.n + num_slack
        self.width = self.art_start + num_art

        self.rows: List[List[Fraction]] = []
        self.rhs: List[Fraction] = rhs
        self.basis: List[int] = []
        slack_col = self.slack_start
        art_col = self.art_start
        for coeffs, kind in zip(rows, kinds):
            full = coeffs + [_ZERO] * (self.width - self.n)
            if kind == "slack":
                full[slack_col] = Fraction(1)
                self.basis.append(slack_col)
                slack_col += 1
            elif kind == "surplus":
                full[slack_col] = Fraction(-1)
                slack_col += 1
                full[art_col] = Fraction(1)
                self.basis.append(art_col)
                art_col += 1
            else:
                full[art_col] = Fraction(1)
                self.basis.append(art_col)
                art_col += 1
            self.rows.append(full)

        self.obj: List[Fraction] = []
        self.obj_val = _ZERO
        self.pivots = 0

    def _price(self, costs: Sequence[Fraction]) -> None:
        self.obj = list(costs)
        self.obj_val = _ZERO
        for i, b in enumerate(self.basis):
            cb = costs[b]
            if not cb:
                continue
            row = self.rows[i]
            for j, v in enumerate(row):
                if v:
                    self.obj[j] -= cb * v
            self.obj_val += cb * self.rhs[i]

    def _pivot(self, r: int, e: int) -> None:
        row_r = self.rows[r]
        piv = row_r[e]
        if piv != 1:
            row_r = [v / piv for v in row_r]
            self.rows[r] = row_r
            self.rhs[r] = self.rhs[r] / piv
        nz = [j for j, v in enumerate(row_r) if v]
        b_r = self.rhs[r]
        for i, row_i in enumerate(self.rows):
            if i == r:
                continue
            f = row_i[e]
            if not f:
                continue
            for j in nz:
                row_i[j] -= f * row_r[j]
            self.rhs[i] -= f * b_r
        f = self.obj[e]
        if f:
            for j in nz:
                self.obj[j] -= f * row_r[j]
            self.obj_val += f * b_r
        self.basis[r] = e
        self.pivots += 1

    def _run(self, allowed: int) -> bool:
        """Iterate to optimality over columns < allowed. Returns False if unbounded."""
        while True:
            entering = next((j for j in range(allowed) if self.obj[j] < 0), None)
            if entering is None:
                return True
            leave: Optional[int] = None
            best: Optional[Fraction] = None
            for i, row in enumerate(self.rows):
                a = row[entering]
                if a > 0:
                    ratio = self.rhs[i] / a
                    if (
                        best is None
                        or ratio < best
                        or (ratio == best and self.basis[i] < self.basis[leave])
                    ):
                        best, leave = ratio, i
            if leave is None:
                return False
            self._pivot(leave, entering)

    def solve(self, objective: Sequence[Fraction]) -> LpOutcome:
        # Phase 1: minimize the sum of artificials.
        if self.width > self.art_start:
            costs = [_ZERO] * self.art_start + [Fraction(1)] * (self.width - self.art_start)
            self._price(costs)
            self._run(self.width)
            if self.obj_val > 0:
                return LpOutcome(status=LpStatus.infeasible)
            self._drive_out_artificials()

        # Phase 2: original objective, artificial columns never re-enter.
        costs = list(objective) + [_ZERO] * (self.width - self.n)
        self._price(costs)
        if not self._run(self.art_start):
            return LpOutcome(status=LpStatus.unbounded)

        solution = [_ZERO] * self.n
        for i, b in enumerate(self.basis):
            if b < self.n:
                solution[b] = self.rhs[i]
        return LpOutcome(status=LpStatus.optimal, solution=solution, value=dot(objective, solution))

    def _drive_out_artificials(self) -> None:
        i = 0
        while i < len(self.rows):
            if self.basis[i] >= self.art_start:
                row = self.rows[i]
                j = next((j for j in range(self.art_start) if row[j]), None)
                if j is None:
                    # Redundant row: every structural coefficient vanished.
                    del self.rows[i]
                    del self.rhs[i]
                    del self.basis[i]
                    continue
                self._pivot(i, j)
            i += 1


def solve_lp(problem: LpProblem) -> LpOutcome:
    """
    Exact two-phase primal simplex with Bland's rule.

    The returned solution is a basic feasible solution; identical input gives
    an identical pivot sequence.
    """
    if problem.num_vars == 0:
        feasible = all(problem.senses[i].holds(_ZERO, problem.rhs[i]) for i in range(problem.num_rows))
        if not feasible:
            return LpOutcome(status=LpStatus.infeasible)
        return LpOutcome(status=LpStatus.optimal, solution=[], value=_ZERO)
    tableau = _Tableau(problem)
    outcome = tableau.solve(problem.objective)
    logger.debug(
        "LP %dx%d solved: %s after %d pivots",
        problem.num_rows, problem.num_vars, outcome.status.value, tableau.pivots,
    )
    return outcome


def enumerate_vertices(problem: LpProblem, var_cap: Optional[int] = None) -> List[List[Fraction]]:
    """
    All basic feasible solutions of a bounded feasible region, deduplicated and
    sorted lexicographically. Intended as a test oracle on tiny problems.
    """
    cap = settings.vertex_cap if var_cap is None else var_cap
    n = problem.num_vars
    if n > cap:
        raise CapExceededError("too many variables for vertex enumeration", n, cap)

    for j in range(n):
        extreme = problem.with_objective([Fraction(-1) if k == j else _ZERO for k in range(n)])
        outcome = solve_lp(extreme)
        if outcome.status == LpStatus.infeasible:
            raise InfeasibleError("feasible region is empty")
        if outcome.status == LpStatus.unbounded:
            raise UnboundedError(f"feasible region is unbounded in variable {j}")

    # Candidate active constraints: every row as an equation, then z_j = 0.
    hyperplanes: List[Tuple[List[Fraction], Fraction]] = [
        (problem.matrix.row(i), problem.rhs[i]) for i in range(problem.num_rows)
    ]
    hyperplanes += [
        ([Fraction(int(k == j)) for k in range(n)], _ZERO) for j in range(n)
    ]

    found = set()
    for subset in itertools.combinations(range(len(hyperplanes)), n):
        system = RatMatrix.from_rows([hyperplanes[i][0] for i in subset])
        try:
            inv = inverse(system)
        except SingularMatrixError:
            continue
        b = [hyperplanes[i][1] for i in subset]
        point = tuple(dot(inv.row(r), b) for r in range(n))
        if point not in found and problem.is_feasible_point(list(point)):
            found.add(point)
    return [list(p) for p in sorted(found)]


__all__ = ["LpProblem", "solve_lp", "enumerate_vertices"]
