from __future__ import annotations

import logging
import time
from dataclasses import dataclass
from fractions import Fraction
from typing import Dict, List, Optional, Sequence, Tuple

from pydantic import ValidationError

from config import settings
from core import regularity
from core.bnb import check_feasible, solve_mip
from core.errors import CapExceededError, DeltaResolutionError, DomainError, InvariantViolation, UnboundedError
from core.exact import dot, to_rational
from core.instance_io import linking_ge_rows, to_lp
from core.models import (
    ConstraintOrigin,
    DbConfig,
    DecomposedMip,
    DeltaInfo,
    DeltaProvenance,
    LocalConstraint,
    LpStatus,
    MipStatus,
    NodeAction,
    OriginKind,
    SearchLimits,
    Sense,
    SolveReport,
    SolveState,
    TraceEvent,
    VariantKind,
)
from core.ratlp import LpProblem, solve_lp
from core.rounding import epsilon_less, round_strict_less, strengthen_geq

logger = logging.getLogger(__name__)


@dataclass(frozen=True)
class DbNode:
    id: int
    parent: Optional[int]
    constraints: Tuple[LocalConstraint, ...]
    depth: int
    added: Optional[LocalConstraint] = None


class _LimitReached(Exception):
    def __init__(self, state: SolveState):
        super().__init__(state.value)
        self.state = state


def resolve_delta(mip: DecomposedMip, cfg: DbConfig) -> DeltaInfo:
    """
    Explicit config value, then the instance's delta field, then the model
    theorems from meta, then brute force on the continuous columns.
    """
    if cfg.delta is not None:
        return DeltaInfo(delta=cfg.delta, provenance=DeltaProvenance.user_supplied)
    if mip.delta is not None:
        return DeltaInfo(delta=mip.delta, provenance=DeltaProvenance.user_supplied)

    model = str(mip.meta.get("model", "")).upper()
    if model in regularity.ModelKind.__members__:
        try:
            return regularity.delta_for_model(regularity.ModelKind(model), mip.meta.get("a"))
        except ValueError as e:
            logger.warning("model metadata of %s unusable for delta: %s", mip.name, e)

    continuous = mip.continuous_matrix()
    if not continuous or not continuous[0] or not any(v for row in continuous for v in row):
        return DeltaInfo(delta=1, provenance=DeltaProvenance.brute_force_minimal)
    try:
        return regularity.brute_force_minimal_delta(continuous)
    except CapExceededError as e:
        raise DeltaResolutionError(f"cannot resolve delta for {mip.name}: {e}")


class _DecompositionSearch:
    """One decomposition branching run; single use."""

    def __init__(self, mip: DecomposedMip, cfg: DbConfig, delta: Optional[DeltaInfo]):
        self.mip = mip
        self.cfg = cfg
        self.delta = delta
        self.base = to_lp(mip)
        self.links = linking_ge_rows(mip)
        self.integer = set(mip.integer_columns())
        self.start = time.monotonic()

        self.incumbent: Optional[List[Fraction]] = None
        self.best: Optional[Fraction] = None
        self.nodes = 0
        self.subproblem_solves = 0
        self.children = 0
        self.next_id = 1
        self.trace: List[TraceEvent] = []

    # --- helpers ------------------------------------------------------------------
    def _elapsed(self) -> float:
        return time.monotonic() - self.start

    def _record(
        self,
        node: DbNode,
        action: NodeAction,
        value: Optional[Fraction] = None,
        block: Optional[int] = None,
        point: Optional[List[Fraction]] = None,
    ) -> None:
        if self.cfg.trace:
            self.trace.append(
                TraceEvent(
                    node=node.id, parent=node.parent, action=action, value=value, block=block, added=node.added, point=point,
                )
            )

    def _node_lp(self, node: DbNode) -> LpProblem:
        return self.base.with_rows(
            [c.coefficients() for c in node.constraints],
            [c.rhs for c in node.constraints],
            [c.sense for c in node.constraints],
        )

    def _block_cols(self, q: int) -> List[int]:
        block = self.mip.blocks[q]
        return list(block.x_cols) + [self.mip.n + j for j in block.y_cols]

    def _block_value(self, q: int, point: Sequence[Fraction]) -> Fraction:
        obj = self.mip.objective()
        return sum((obj[j] * point[j] for j in self._block_cols(q) if obj[j]), Fraction(0))

    def _update_incumbent(self, point: List[Fraction], value: Fraction) -> None:
        if not check_feasible(self.mip, point):
            raise InvariantViolation("incumbent feasibility", f"candidate with value {value} violates the instance")
        if self.best is None or value < self.best:
            self.incumbent, self.best = point, value
            logger.debug("incumbent %s after %d nodes", value, self.nodes)

    # --- branching subproblem -------------------------------------------------------
    def _subproblem(self, q: int, point: Sequence[Fraction]) -> Tuple[MipStatus, Optional[Fraction], Optional[List[Fraction]]]:
        mip = self.mip
        block = mip.blocks[q]
        cols = self._block_cols(q)
        obj = mip.objective()

        rows: List[List[Fraction]] = []
        rhs: List[Fraction] = []
        senses: List[Sense] = []
        for i in block.rows:
            coeffs = mip.row_coefficients(i)
            rows.append([Fraction(coeffs[j]) for j in cols])
            rhs.append(Fraction(mip.g[i]))
            senses.append(mip.senses[i])
        # Linking rows with the block's share fixed at the node LP values.
        for row, sign in self.links:
            coeffs = mip.row_coefficients(row)
            local = [Fraction(sign * coeffs[j]) for j in cols]
            if not any(local):
                continue
            rows.append(local)
            rhs.append(dot(local, [point[j] for j in cols]))
            senses.append(Sense.ge)

        problem = LpProblem.build([obj[j] for j in cols], rows, rhs, senses)
        integer_local = [k for k, j in enumerate(cols) if j in self.integer]
        remaining = self.cfg.time_limit - self._elapsed()
        if remaining <= 0:
            raise _LimitReached(SolveState.timelimit)
        outcome = solve_mip(problem, integer_local, SearchLimits(node_limit=self.cfg.node_limit, time_limit=remaining))
        self.subproblem_solves += 1
        if outcome.status == MipStatus.time_limit:
            raise _LimitReached(SolveState.timelimit)
        if outcome.status == MipStatus.node_limit:
            raise _LimitReached(SolveState.nodelimit)
        if outcome.status == MipStatus.infeasible:
            return outcome.status, None, None
        return outcome.status, outcome.value, list(outcome.incumbent)

    # --- children -----------------------------------------------------------------------
    def _split(self, q: int, cols: Sequence[int], coeffs: Sequence[int]) -> Tuple[List[int], List[int]]:
        n = self.mip.n
        u = [0] * n
        w = [0] * self.mip.ell
        for j in cols:
            if j < n:
                u[j] = coeffs[j]
            else:
                w[j - n] = coeffs[j]
        return u, w

    def _children(self, q: int, point: Sequence[Fraction], z_star: Optional[Fraction]) -> List[LocalConstraint]:
        """Child constraints in exploration order: objective child first, then linking rows."""
        cols = self._block_cols(q)
        out: List[LocalConstraint] = []
        delta = self.delta.delta if self.delta else None

        if z_star is not None:
            u, w = self._split(q, cols, self.mip.objective())
            origin = ConstraintOrigin(kind=OriginKind.objective_child, block=q)
            if delta is not None:
                out.append(strengthen_geq(u, w, z_star, delta, origin))
            else:
                out.append(LocalConstraint(u=u, w=w, sense=Sense.ge, rhs=z_star, origin=origin))

        for row, sign in self.links:
            coeffs = [sign * v for v in self.mip.row_coefficients(row)]
            u, w = self._split(q, cols, coeffs)
            if not any(u) and not any(w):
                # 0 < 0 is empty; the child would be pruned at once
                continue
            gamma = dot([Fraction(v) for v in u + w], point)
            origin = ConstraintOrigin(kind=OriginKind.linking_row_child, block=q, row=row, sign=sign)
            if delta is not None:
                out.append(round_strict_less(u, w, gamma, delta, origin))
            else:
                out.append(epsilon_less(u, w, gamma, self.cfg.epsilon, origin))
        return out

    @staticmethod
    def _merge(constraints: Tuple[LocalConstraint, ...], new: LocalConstraint) -> Tuple[LocalConstraint, ...]:
        """Append, replacing a constraint of the same origin by the tighter of the two."""
        key = new.origin.key()
        out: List[LocalConstraint] = []
        replaced = False
        for c in constraints:
            if c.origin.key() == key and c.sense == new.sense and c.u == new.u and c.w == new.w:
                tighter = new.rhs < c.rhs if new.sense == Sense.le else new.rhs > c.rhs
                out.append(new if tighter else c)
                replaced = True
            else:
                out.append(c)
        if not replaced:
            out.append(new)
        return tuple(out)

    # --- main loop --------------------------------------------------------------------------
    def run(self) -> SolveState:
        stack: List[DbNode] = [DbNode(id=0, parent=None, constraints=(), depth=0)]
        while stack:
            if self.nodes >= self.cfg.node_limit:
                return SolveState.nodelimit
            if self._elapsed() > self.cfg.time_limit:
                return SolveState.timelimit
            node = stack.pop()
            self.nodes += 1
            stack.extend(reversed(self._process(node)))
        if self.incumbent is None:
            return SolveState.finished_nosol
        if self.cfg.variant == VariantKind.delta:
            return SolveState.finished_opt
        return SolveState.finished_with_sol

    def _process(self, node: DbNode) -> List[DbNode]:
        outcome = solve_lp(self._node_lp(node))
        if outcome.status == LpStatus.unbounded:
            raise UnboundedError("LP relaxation is unbounded; decomposition branching needs a polytope")
        if outcome.status == LpStatus.infeasible:
            self._record(node, NodeAction.prune_infeas)
            return []

        value = outcome.value
        point = list(outcome.solution)
        self._record(node, NodeAction.lp, value)
        if self.best is not None and value >= self.best:
            self._record(node, NodeAction.prune_bound, value)
            return []
        if all(point[j].denominator == 1 for j in self.integer):
            self._update_incumbent(point, value)
            self._record(node, NodeAction.prune_opt, value)
            return []

        assembled = list(point)
        for q in range(len(self.mip.blocks)):
            cols = self._block_cols(q)
            z_lp = self._block_value(q, point)
            if all(point[j].denominator == 1 for j in cols if j in self.integer):
                continue
            status, z_star, solution = self._subproblem(q, point)
            if status == MipStatus.infeasible:
                return self._branch(node, q, point, None, value)
            if z_star > z_lp:
                return self._branch(node, q, point, z_star, value)
            for k, j in enumerate(cols):
                assembled[j] = solution[k]

        # The assembled point can sit below the node LP value.
        found = dot(self.mip.objective(), assembled)
        self._update_incumbent(assembled, found)
        self._record(node, NodeAction.prune_opt, found)
        return []

    def _branch(self, node: DbNode, q: int, point: List[Fraction], z_star: Optional[Fraction], value: Fraction) -> List[DbNode]:
        self._record(node, NodeAction.branch, z_star if z_star is not None else value, block=q, point=point)
        children = []
        for constraint in self._children(q, point, z_star):
            children.append(
                DbNode(
                    id=self.next_id,
                    parent=node.id,
                    constraints=self._merge(node.constraints, constraint),
                    depth=node.depth + 1,
                    added=constraint,
                )
            )
            self.next_id += 1
        self.children += len(children)
        logger.debug("node %d branches on block %d into %d children", node.id, q, len(children))
        return children


def solve_db(mip: DecomposedMip, cfg: DbConfig) -> SolveReport:
    """
    Decomposition branching on a validated instance, with either the epsilon
    reformulation or lattice rounding of the strict branching inequalities.
    """
    delta = resolve_delta(mip, cfg) if cfg.variant == VariantKind.delta else None
    logger.info(
        "solving %s with %s (delta=%s)", mip.name, cfg.label, delta.delta if delta else "-",
    )
    search = _DecompositionSearch(mip, cfg, delta)
    try:
        state = search.run()
    except _LimitReached as stop:
        state = stop.state
    if not state.finished:
        logger.warning("%s stopped by %s after %d nodes", mip.name, state.value, search.nodes)

    report = SolveReport(
        state=state,
        variant=cfg.label,
        incumbent=search.incumbent,
        value=search.best,
        nodes=search.nodes,
        subproblem_solves=search.subproblem_solves,
        children=search.children,
        time_sec=round(search._elapsed(), 6),
        delta=delta,
        trace=search.trace if cfg.trace else None,
    )
    logger.info(
        "%s finished: %s value=%s nodes=%d", mip.name, state.value, report.value, report.nodes,
    )
    return report


def default_config(variant: VariantKind, **overrides) -> DbConfig:
    """DbConfig with limits taken from settings unless overridden."""
    values: Dict[str, object] = {
        "variant": variant,
        "node_limit": settings.node_limit,
        "time_limit": settings.time_limit,
    }
    values.update(overrides)
    return DbConfig(**values)


def parse_variant(text: str, **overrides) -> DbConfig:
    """
    Parse a variant spec: "delta", "delta:<int>" or "eps:<rational>".
    Remaining DbConfig fields come from overrides, then settings.
    """
    head, _, arg = text.strip().partition(":")
    head = head.lower()
    try:
        if head == VariantKind.delta.value:
            if arg:
                overrides["delta"] = int(arg)
            return default_config(VariantKind.delta, **overrides)
        if head == VariantKind.epsilon.value and arg:
            return default_config(VariantKind.epsilon, epsilon=to_rational(arg), **overrides)
    except (ValueError, ValidationError) as e:
        raise DomainError(f"bad variant {text!r}: {e}")
    raise DomainError(f"bad variant {text!r}; expected delta, delta:<int> or eps:<rational>")


__all__ = ["DbNode", "resolve_delta", "solve_db", "default_config", "parse_variant"]
