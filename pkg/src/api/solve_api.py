from __future__ import annotations

import json
import logging
import time
from typing import Any, Dict, List, Literal, Optional

from fastapi import APIRouter, HTTPException
from pydantic import BaseModel, Field

from config import settings
from core import regularity
from core.bnb import solve_baseline
from core.decbranch import parse_variant, solve_db
from core.errors import DecBranchError
from core.instance_io import parse_instance
from core.models import DeltaInfo, MipStatus, SearchLimits

logger = logging.getLogger(__name__)

# Router for solver endpoints
router = APIRouter()


# ---------------------------------------------------------------------------
# Request / response models
# ---------------------------------------------------------------------------

class SolveRequest(BaseModel):
    instance: Dict[str, Any]
    variant: Literal["delta", "eps", "baseline"] = "delta"
    epsilon: Optional[str] = None
    delta: Optional[int] = Field(None, ge=1)
    node_limit: Optional[int] = Field(None, ge=1)
    time_limit: Optional[float] = Field(None, gt=0)
    trace: bool = False


class SolveResponse(BaseModel):
    state: str
    variant: str
    value: Optional[str] = None
    incumbent: Optional[List[str]] = None
    nodes: int
    subproblem_solves: int = 0
    time_sec: float
    delta: Optional[DeltaInfo] = None
    trace: Optional[List[str]] = None


class RegularityRequest(BaseModel):
    rows: List[List[int]]
    method: Literal["brute", "bounds"] = "brute"


class RegularityResponse(BaseModel):
    delta: Optional[int] = None
    provenance: Optional[str] = None
    lower: Optional[int] = None
    detset: Optional[int] = None
    hadamard: Optional[int] = None
    nonsquare: Optional[int] = None


_BASELINE_STATES = {
    MipStatus.optimal: "finished_opt",
    MipStatus.infeasible: "finished_nosol",
    MipStatus.node_limit: "nodelimit",
    MipStatus.time_limit: "timelimit",
}


# ---------------------------------------------------------------------------
# Endpoints
# ---------------------------------------------------------------------------

@router.get("/health")
def health() -> Dict[str, str]:
    return {"status": "ok"}


@router.post("/solve", response_model=SolveResponse)
def solve(req: SolveRequest) -> SolveResponse:
    """
    Solve one instance posted in the on-disk instance format.

    Errors in the instance or the variant are client errors (400); anything
    else is reported as 500.
    """
    limits = {
        "node_limit": req.node_limit or settings.node_limit,
        "time_limit": req.time_limit or settings.time_limit,
    }
    try:
        mip = parse_instance(json.dumps(req.instance))
        if req.variant == "baseline":
            started = time.monotonic()
            outcome = solve_baseline(mip, SearchLimits(**limits))
            return SolveResponse(
                state=_BASELINE_STATES[outcome.status],
                variant="baseline",
                value=None if outcome.value is None else str(outcome.value),
                incumbent=None if outcome.incumbent is None else [str(v) for v in outcome.incumbent],
                nodes=outcome.nodes,
                time_sec=round(time.monotonic() - started, 6),
            )

        if req.variant == "eps":
            text = f"eps:{req.epsilon}" if req.epsilon else "eps"
        else:
            text = "delta" if req.delta is None else f"delta:{req.delta}"
        cfg = parse_variant(text, trace=req.trace, **limits)
        report = solve_db(mip, cfg)
    except DecBranchError as e:
        logger.info("solve request rejected: %s", e)
        raise HTTPException(status_code=400, detail=str(e))
    except Exception:
        logger.exception("solve request failed")
        raise HTTPException(status_code=500, detail="Internal server error")

    return SolveResponse(
        state=report.state.value,
        variant=report.variant,
        value=None if report.value is None else str(report.value),
        incumbent=None if report.incumbent is None else [str(v) for v in report.incumbent],
        nodes=report.nodes,
        subproblem_solves=report.subproblem_solves,
        time_sec=report.time_sec,
        delta=report.delta,
        trace=report.trace_lines() if req.trace else None,
    )


@router.post("/regularity", response_model=RegularityResponse)
def regularity_check(req: RegularityRequest) -> RegularityResponse:
    try:
        if not req.rows or not req.rows[0]:
            raise HTTPException(status_code=400, detail="matrix must be nonempty")
        if req.method == "brute":
            info = regularity.brute_force_minimal_delta(req.rows)
            return RegularityResponse(delta=info.delta, provenance=info.provenance.value)

        A = req.rows
        detset: Optional[int]
        try:
            detset = regularity.upper_bound_detset(A)
        except DecBranchError:
            detset = None
        return RegularityResponse(
            lower=regularity.lower_bound_delta(A),
            detset=detset,
            hadamard=regularity.upper_bound_hadamard(A),
            nonsquare=regularity.upper_bound_nonsquare(A) if len(A) != len(A[0]) else None,
        )
    except DecBranchError as e:
        raise HTTPException(status_code=400, detail=str(e))
