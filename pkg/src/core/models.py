from __future__ import annotations

from enum import Enum
from fractions import Fraction
from typing import Any, Dict, List, Optional, Tuple

from pydantic import BaseModel, BeforeValidator, ConfigDict, Field, PlainSerializer, model_validator
from typing_extensions import Annotated

from core.exact import format_rational, to_rational

# Exact rational carried through pydantic models; serialized as "num/den" text.
RationalField = Annotated[
    Fraction,
    BeforeValidator(to_rational),
    PlainSerializer(format_rational, return_type=str, when_used="json"),
]


class Sense(str, Enum):
    ge = ">="
    le = "<="
    eq = "="

    def holds(self, lhs: Fraction, rhs: Fraction) -> bool:
        if self is Sense.ge:
            return lhs >= rhs
        if self is Sense.le:
            return lhs <= rhs
        return lhs == rhs


class _ExactModel(BaseModel):
    model_config = ConfigDict(arbitrary_types_allowed=True)


# --- LP / MIP outcomes --------------------------------------------------------
class LpStatus(str, Enum):
    optimal = "optimal"
    infeasible = "infeasible"
    unbounded = "unbounded"


class LpOutcome(_ExactModel):
    status: LpStatus
    solution: Optional[List[RationalField]] = None
    value: Optional[RationalField] = None

    @property
    def is_optimal(self) -> bool:
        return self.status == LpStatus.optimal


class MipStatus(str, Enum):
    optimal = "optimal"
    infeasible = "infeasible"
    node_limit = "node_limit"
    time_limit = "time_limit"


class MipOutcome(_ExactModel):
    status: MipStatus
    incumbent: Optional[List[RationalField]] = None
    value: Optional[RationalField] = None
    nodes: int = 0


class SearchLimits(BaseModel):
    node_limit: int = Field(100_000, ge=1)
    time_limit: float = Field(60.0, gt=0)


# --- Decomposed mixed-integer problem ----------------------------------------
class Block(BaseModel):
    """
    One diagonal block of the decomposition. All indices are 0-based.
    """

    index: int = Field(..., ge=0)
    x_cols: List[int] = Field(default_factory=list)
    y_cols: List[int] = Field(default_factory=list)
    rows: List[int] = Field(default_factory=list)


class DecomposedMip(BaseModel):
    """
    min c.x + d.y  s.t.  A x + B y (senses) g,  x >= 0, y >= 0, y integral,
    together with its block structure (blocks plus linking rows).

    Every y column is integral; `integer_x` additionally marks x columns that
    must be integral (single-sourcing in facility location).
    """

    name: str
    c: List[int]
    d: List[int]
    A: List[List[int]]
    B: List[List[int]]
    g: List[int]
    senses: List[Sense]
    blocks: List[Block]
    linking_rows: List[int] = Field(default_factory=list)
    integer_x: List[int] = Field(default_factory=list)
    delta: Optional[int] = Field(None, ge=1)
    meta: Dict[str, Any] = Field(default_factory=dict)

    @property
    def n(self) -> int:
        return len(self.c)

    @property
    def ell(self) -> int:
        return len(self.d)

    @property
    def m(self) -> int:
        return len(self.g)

    @property
    def num_vars(self) -> int:
        return self.n + self.ell

    def integer_columns(self) -> List[int]:
        """Integral positions in the stacked (x, y) variable vector."""
        return sorted(self.integer_x) + [self.n + j for j in range(self.ell)]

    def row_coefficients(self, i: int) -> List[int]:
        return list(self.A[i]) + list(self.B[i])

    def objective(self) -> List[int]:
        return list(self.c) + list(self.d)

    def continuous_matrix(self) -> List[List[int]]:
        """Columns of A that belong to continuous variables."""
        marked = set(self.integer_x)
        keep = [j for j in range(self.n) if j not in marked]
        return [[row[j] for j in keep] for row in self.A]


class BlockView(BaseModel):
    """Exact slices of one block: local rows plus its share of the linking rows."""

    index: int
    x_cols: List[int]
    y_cols: List[int]
    rows: List[int]
    linking_rows: List[int]

    A_q: List[List[int]]
    B_q: List[List[int]]
    g_q: List[int]
    senses_q: List[Sense]
    A_q_row: List[List[int]]
    B_q_row: List[List[int]]
    g_row: List[int]
    senses_row: List[Sense]
    c_q: List[int]
    d_q: List[int]


# --- Branching constraints and reports -----------------------------------------
class OriginKind(str, Enum):
    objective_child = "objective"
    linking_row_child = "linking_row"
    user_cut = "user"


class ConstraintOrigin(BaseModel):
    kind: OriginKind
    block: Optional[int] = None
    row: Optional[int] = None
    # +1 when the linking row is used as written in >=-form, -1 when negated
    sign: int = 1

    def key(self) -> Tuple[str, Optional[int], Optional[int], int]:
        return (self.kind.value, self.block, self.row, self.sign)


class LocalConstraint(_ExactModel):
    """u.x + w.y (sense) rhs, with integral u and w over the full x / y vectors."""

    u: List[int]
    w: List[int]
    sense: Sense
    rhs: RationalField
    origin: ConstraintOrigin = Field(default_factory=lambda: ConstraintOrigin(kind=OriginKind.user_cut))

    def coefficients(self) -> List[int]:
        return list(self.u) + list(self.w)

    def holds_at(self, point: List[Fraction]) -> bool:
        lhs = sum((Fraction(a) * v for a, v in zip(self.coefficients(), point) if a), Fraction(0))
        return self.sense.holds(lhs, self.rhs)


class VariantKind(str, Enum):
    delta = "delta"
    epsilon = "eps"


class DbConfig(_ExactModel):
    variant: VariantKind
    epsilon: Optional[RationalField] = None
    # None means "auto": resolved from the instance
    delta: Optional[int] = Field(None, ge=1)
    node_limit: int = Field(100_000, ge=1)
    time_limit: float = Field(60.0, gt=0)
    trace: bool = False

    @model_validator(mode="after")
    def _check_variant(self) -> "DbConfig":
        if self.variant == VariantKind.epsilon:
            if self.epsilon is None or self.epsilon <= 0:
                raise ValueError("epsilon must be a positive rational for the eps variant")
        return self

    @property
    def label(self) -> str:
        if self.variant == VariantKind.epsilon:
            return f"eps{format_rational(self.epsilon)}"
        return "delta" if self.delta is None else f"delta{self.delta}"


class DeltaProvenance(str, Enum):
    brute_force_minimal = "BruteForceMinimal"
    lower_bound = "LowerBound"
    upper_bound_detset = "UpperBoundDetSet"
    upper_bound_hadamard = "UpperBoundHadamard"
    upper_bound_nonsquare = "UpperBoundNonSquare"
    theorem_cls = "TheoremCLS"
    theorem_misl = "TheoremMISL"
    theorem_cfl = "TheoremCFL"
    user_supplied = "UserSupplied"


class DeltaInfo(BaseModel):
    delta: int = Field(..., ge=1)
    provenance: DeltaProvenance


class SolveState(str, Enum):
    timelimit = "timelimit"
    nodelimit = "nodelimit"
    finished_opt = "finished_opt"
    finished_nosol = "finished_nosol"
    finished_with_sol = "finished_with_sol"

    @property
    def finished(self) -> bool:
        return self.value.startswith("finished")


class NodeAction(str, Enum):
    lp = "lp"
    prune_bound = "prune-bound"
    prune_infeas = "prune-infeas"
    prune_opt = "prune-opt"
    branch = "branch"


class TraceEvent(_ExactModel):
    node: int
    parent: Optional[int] = None
    action: NodeAction
    value: Optional[RationalField] = None
    block: Optional[int] = None
    # The constraint this node was created with (None at the root)
    added: Optional[LocalConstraint] = None
    # LP point the node branched on
    point: Optional[List[RationalField]] = None

    def to_line(self) -> str:
        parent = "-" if self.parent is None else str(self.parent)
        action = self.action.value
        if self.action == NodeAction.branch:
            action = f"branch block={self.block}"
        value = "-" if self.value is None else format_rational(self.value)
        return f"node {self.node} parent {parent} action {action} value {value}"


class SolveReport(_ExactModel):
    state: SolveState
    variant: str
    incumbent: Optional[List[RationalField]] = None
    value: Optional[RationalField] = None
    nodes: int = 0
    subproblem_solves: int = 0
    children: int = 0
    time_sec: float = 0.0
    delta: Optional[DeltaInfo] = None
    trace: Optional[List[TraceEvent]] = None

    def trace_lines(self) -> List[str]:
        return [event.to_line() for event in self.trace or []]


__all__ = [
    "RationalField",
    "Sense",
    "LpStatus",
    "LpOutcome",
    "MipStatus",
    "MipOutcome",
    "SearchLimits",
    "Block",
    "DecomposedMip",
    "BlockView",
    "OriginKind",
    "ConstraintOrigin",
    "LocalConstraint",
    "VariantKind",
    "DbConfig",
    "DeltaProvenance",
    "DeltaInfo",
    "SolveState",
    "NodeAction",
    "TraceEvent",
    "SolveReport",
]
