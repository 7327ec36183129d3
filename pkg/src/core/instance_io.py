from __future__ import annotations

import json
from pathlib import Path
from typing import Any, Dict, List, Optional, Tuple, Union

from pydantic import BaseModel, Field, ValidationError, field_validator

from core.errors import DomainError, InstanceFormatError, InvariantViolation
from core.models import Block, BlockView, DecomposedMip, Sense
from core.ratlp import LpProblem

PathLike = Union[str, Path]


def _require_int(value: Any, message: str) -> int:
    if isinstance(value, bool) or not isinstance(value, int):
        raise ValueError(message)
    return value


def _sparse_ints(values: Dict[int, Any], message: str) -> Dict[int, int]:
    return {int(k): _require_int(v, message) for k, v in values.items()}


# --- On-disk records ------------------------------------------------------------
class ObjectiveRecord(BaseModel):
    x: Dict[int, Any] = Field(default_factory=dict)
    y: Dict[int, Any] = Field(default_factory=dict)

    @field_validator("x")
    @classmethod
    def _x_integral(cls, v: Dict[int, Any]) -> Dict[int, int]:
        return _sparse_ints(v, "c must be integral")

    @field_validator("y")
    @classmethod
    def _y_integral(cls, v: Dict[int, Any]) -> Dict[int, int]:
        return _sparse_ints(v, "d must be integral")


class RowRecord(BaseModel):
    x: Dict[int, Any] = Field(default_factory=dict)
    y: Dict[int, Any] = Field(default_factory=dict)
    sense: Sense
    rhs: Any

    @field_validator("x")
    @classmethod
    def _x_integral(cls, v: Dict[int, Any]) -> Dict[int, int]:
        return _sparse_ints(v, "A must be integral")

    @field_validator("y")
    @classmethod
    def _y_integral(cls, v: Dict[int, Any]) -> Dict[int, int]:
        return _sparse_ints(v, "B must be integral")

    @field_validator("rhs")
    @classmethod
    def _rhs_integral(cls, v: Any) -> int:
        return _require_int(v, "g must be integral")


class BlockRecord(BaseModel):
    x: List[int] = Field(default_factory=list)
    y: List[int] = Field(default_factory=list)
    rows: List[int] = Field(default_factory=list)


class IntegralityRecord(BaseModel):
    x: List[int] = Field(default_factory=list)
    y: List[int] = Field(default_factory=list)


class InstanceFile(BaseModel):
    name: str
    n: int = Field(..., ge=0)
    ell: int = Field(..., ge=0)
    objective: ObjectiveRecord
    rows: List[RowRecord]
    blocks: List[BlockRecord]
    linking_rows: List[int] = Field(default_factory=list)
    integrality: IntegralityRecord = Field(default_factory=IntegralityRecord)
    delta: Optional[int] = Field(None, ge=1)
    meta: Dict[str, Any] = Field(default_factory=dict)


class MatrixFile(BaseModel):
    name: str = ""
    cols: int = Field(..., ge=1)
    rows: List[Dict[int, Any]]

    @field_validator("rows")
    @classmethod
    def _rows_integral(cls, v: List[Dict[int, Any]]) -> List[Dict[int, int]]:
        return [_sparse_ints(r, "matrix must be integral") for r in v]


# --- Validation -------------------------------------------------------------------
def _check_partition(groups: List[List[int]], size: int, what: str) -> None:
    seen: Dict[int, int] = {}
    for group in groups:
        for idx in group:
            if not 0 <= idx < size:
                raise InvariantViolation(f"{what} index out of range", f"{idx} not in [0, {size})")
            if idx in seen:
                raise InvariantViolation(f"{what} not uniquely assigned", f"{what} {idx}")
            seen[idx] = 1
    missing = [i for i in range(size) if i not in seen]
    if missing:
        raise InvariantViolation(f"{what} unassigned", f"{what}s {missing}")


def check_invariants(mip: DecomposedMip) -> DecomposedMip:
    """Validate the structural invariants of a decomposed problem; returns it unchanged."""
    n, ell, m = mip.n, mip.ell, mip.m
    if len(mip.A) != m or any(len(r) != n for r in mip.A):
        raise InvariantViolation("dimensions", f"A must be {m}x{n}")
    if len(mip.B) != m or any(len(r) != ell for r in mip.B):
        raise InvariantViolation("dimensions", f"B must be {m}x{ell}")
    if len(mip.senses) != m:
        raise InvariantViolation("dimensions", f"senses must have {m} entries")
    if not mip.blocks:
        raise InvariantViolation("at least one block")

    for pos, block in enumerate(mip.blocks):
        if block.index != pos:
            raise InvariantViolation("block indices are positional", f"block at {pos} has index {block.index}")
        if not block.x_cols and not block.y_cols:
            raise InvariantViolation("block has no columns", f"block {pos}")

    _check_partition([b.rows for b in mip.blocks] + [list(mip.linking_rows)], m, "row")
    _check_partition([b.x_cols for b in mip.blocks], n, "column")
    _check_partition([b.y_cols for b in mip.blocks], ell, "y column")

    for j in mip.integer_x:
        if not 0 <= j < n:
            raise InvariantViolation("integer mark out of range", f"x column {j}")

    for block in mip.blocks:
        own_x, own_y = set(block.x_cols), set(block.y_cols)
        for i in block.rows:
            stray_x = [j for j, v in enumerate(mip.A[i]) if v and j not in own_x]
            stray_y = [j for j, v in enumerate(mip.B[i]) if v and j not in own_y]
            if stray_x or stray_y:
                raise InvariantViolation(
                    "row couples blocks",
                    f"row {i} of block {block.index} touches x{stray_x} y{stray_y}",
                )
    return mip


# --- Load / store -----------------------------------------------------------------
def _format_validation_error(exc: ValidationError) -> InstanceFormatError:
    err = exc.errors()[0]
    field = ".".join(str(p) for p in err.get("loc", ()))
    message = str(err.get("msg", "invalid value")).removeprefix("Value error, ")
    return InstanceFormatError(message, field=field or None)


def from_record(record: InstanceFile) -> DecomposedMip:
    n, ell = record.n, record.ell
    A: List[List[int]] = []
    B: List[List[int]] = []
    for pos, row in enumerate(record.rows):
        a_row, b_row = [0] * n, [0] * ell
        for j, v in row.x.items():
            if not 0 <= j < n:
                raise InstanceFormatError(f"x index {j} out of range", field=f"rows.{pos}.x")
            a_row[j] = v
        for j, v in row.y.items():
            if not 0 <= j < ell:
                raise InstanceFormatError(f"y index {j} out of range", field=f"rows.{pos}.y")
            b_row[j] = v
        A.append(a_row)
        B.append(b_row)

    c, d = [0] * n, [0] * ell
    for j, v in record.objective.x.items():
        if not 0 <= j < n:
            raise InstanceFormatError(f"x index {j} out of range", field="objective.x")
        c[j] = v
    for j, v in record.objective.y.items():
        if not 0 <= j < ell:
            raise InstanceFormatError(f"y index {j} out of range", field="objective.y")
        d[j] = v

    if sorted(record.integrality.y) != list(range(ell)):
        raise InvariantViolation("every y column is integral", f"integrality.y = {record.integrality.y}")

    mip = DecomposedMip(
        name=record.name,
        c=c,
        d=d,
        A=A,
        B=B,
        g=[row.rhs for row in record.rows],
        senses=[row.sense for row in record.rows],
        blocks=[
            Block(index=q, x_cols=b.x, y_cols=b.y, rows=b.rows)
            for q, b in enumerate(record.blocks)
        ],
        linking_rows=list(record.linking_rows),
        integer_x=sorted(record.integrality.x),
        delta=record.delta,
        meta=dict(record.meta),
    )
    return check_invariants(mip)


def parse_instance(text: str) -> DecomposedMip:
    try:
        raw = json.loads(text)
    except json.JSONDecodeError as e:
        raise InstanceFormatError(f"malformed JSON: {e.msg}", line=e.lineno, field=f"col {e.colno}")
    try:
        record = InstanceFile.model_validate(raw)
    except ValidationError as e:
        raise _format_validation_error(e)
    return from_record(record)


def load(path: PathLike) -> DecomposedMip:
    return parse_instance(Path(path).read_text(encoding="utf-8"))


def _sparse(values: List[int]) -> Dict[str, int]:
    return {str(j): v for j, v in enumerate(values) if v}


def _dumps(value: Any) -> str:
    return json.dumps(value, sort_keys=False)


def render_instance(mip: DecomposedMip) -> str:
    """Canonical text form: one JSON object, one row/block per line."""
    lines = ["{"]
    lines.append(f'  "name": {_dumps(mip.name)},')
    lines.append(f'  "n": {mip.n},')
    lines.append(f'  "ell": {mip.ell},')
    lines.append(f'  "objective": {_dumps({"x": _sparse(mip.c), "y": _sparse(mip.d)})},')
    lines.append('  "rows": [')
    row_lines = [
        "    " + _dumps({
            "x": _sparse(mip.A[i]),
            "y": _sparse(mip.B[i]),
            "sense": mip.senses[i].value,
            "rhs": mip.g[i],
        })
        for i in range(mip.m)
    ]
    lines.append(",\n".join(row_lines))
    lines.append("  ],")
    lines.append('  "blocks": [')
    block_lines = [
        "    " + _dumps({"x": b.x_cols, "y": b.y_cols, "rows": b.rows}) for b in mip.blocks
    ]
    lines.append(",\n".join(block_lines))
    lines.append("  ],")
    lines.append(f'  "linking_rows": {_dumps(list(mip.linking_rows))},')
    lines.append(f'  "integrality": {_dumps({"x": sorted(mip.integer_x), "y": list(range(mip.ell))})},')
    lines.append(f'  "delta": {_dumps(mip.delta)},')
    lines.append(f'  "meta": {json.dumps(mip.meta, sort_keys=True)}')
    lines.append("}")
    return "\n".join(lines) + "\n"


def store(mip: DecomposedMip, path: PathLike) -> Path:
    target = Path(path)
    target.parent.mkdir(parents=True, exist_ok=True)
    target.write_text(render_instance(mip), encoding="utf-8")
    return target


def load_matrix(path: PathLike) -> List[List[int]]:
    text = Path(path).read_text(encoding="utf-8")
    try:
        raw = json.loads(text)
    except json.JSONDecodeError as e:
        raise InstanceFormatError(f"malformed JSON: {e.msg}", line=e.lineno, field=f"col {e.colno}")
    try:
        record = MatrixFile.model_validate(raw)
    except ValidationError as e:
        raise _format_validation_error(e)
    dense: List[List[int]] = []
    for pos, row in enumerate(record.rows):
        out = [0] * record.cols
        for j, v in row.items():
            if not 0 <= j < record.cols:
                raise InstanceFormatError(f"column {j} out of range", field=f"rows.{pos}")
            out[j] = v
        dense.append(out)
    return dense


def store_matrix(rows: List[List[int]], path: PathLike, name: str = "") -> Path:
    cols = len(rows[0]) if rows else 0
    body = ",\n".join("    " + _dumps(_sparse(r)) for r in rows)
    text = f'{{\n  "name": {_dumps(name)},\n  "cols": {cols},\n  "rows": [\n{body}\n  ]\n}}\n'
    target = Path(path)
    target.parent.mkdir(parents=True, exist_ok=True)
    target.write_text(text, encoding="utf-8")
    return target


# --- Block structure ----------------------------------------------------------------
def block_view(mip: DecomposedMip, q: int) -> BlockView:
    if not 0 <= q < len(mip.blocks):
        raise DomainError(f"block index {q} out of range [0, {len(mip.blocks)})")
    block = mip.blocks[q]
    xs, ys = block.x_cols, block.y_cols
    link = list(mip.linking_rows)
    return BlockView(
        index=q,
        x_cols=list(xs),
        y_cols=list(ys),
        rows=list(block.rows),
        linking_rows=link,
        A_q=[[mip.A[i][j] for j in xs] for i in block.rows],
        B_q=[[mip.B[i][j] for j in ys] for i in block.rows],
        g_q=[mip.g[i] for i in block.rows],
        senses_q=[mip.senses[i] for i in block.rows],
        A_q_row=[[mip.A[i][j] for j in xs] for i in link],
        B_q_row=[[mip.B[i][j] for j in ys] for i in link],
        g_row=[mip.g[i] for i in link],
        senses_row=[mip.senses[i] for i in link],
        c_q=[mip.c[j] for j in xs],
        d_q=[mip.d[j] for j in ys],
    )


def reassemble(mip: DecomposedMip, views: List[BlockView]) -> Tuple[List[List[int]], List[List[int]], List[int]]:
    """Rebuild (A, B, g) from block views; inverse of slicing every block."""
    A = [[0] * mip.n for _ in range(mip.m)]
    B = [[0] * mip.ell for _ in range(mip.m)]
    g = [0] * mip.m
    for view in views:
        for r, i in enumerate(view.rows):
            for c, j in enumerate(view.x_cols):
                A[i][j] = view.A_q[r][c]
            for c, j in enumerate(view.y_cols):
                B[i][j] = view.B_q[r][c]
            g[i] = view.g_q[r]
        for r, i in enumerate(view.linking_rows):
            for c, j in enumerate(view.x_cols):
                A[i][j] = view.A_q_row[r][c]
            for c, j in enumerate(view.y_cols):
                B[i][j] = view.B_q_row[r][c]
            g[i] = view.g_row[r]
    return A, B, g


def to_lp(mip: DecomposedMip) -> LpProblem:
    """LP relaxation over the stacked (x, y) variables."""
    return LpProblem.build(
        mip.objective(),
        [mip.row_coefficients(i) for i in range(mip.m)],
        mip.g,
        mip.senses,
    )


def linking_ge_rows(mip: DecomposedMip) -> List[Tuple[int, int]]:
    """
    Linking rows in >=-form as (row, sign): a >= row is (row, +1), a <= row is
    (row, -1), and an equation contributes both directions.
    """
    out: List[Tuple[int, int]] = []
    for i in mip.linking_rows:
        sense = mip.senses[i]
        if sense in (Sense.ge, Sense.eq):
            out.append((i, 1))
        if sense in (Sense.le, Sense.eq):
            out.append((i, -1))
    return out


__all__ = [
    "InstanceFile",
    "MatrixFile",
    "check_invariants",
    "from_record",
    "parse_instance",
    "load",
    "render_instance",
    "store",
    "load_matrix",
    "store_matrix",
    "block_view",
    "reassemble",
    "to_lp",
    "linking_ge_rows",
]
