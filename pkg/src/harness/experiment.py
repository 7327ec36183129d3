from __future__ import annotations

import csv
import json
import logging
import math
from concurrent.futures import ProcessPoolExecutor, as_completed
from fractions import Fraction
from pathlib import Path
from typing import Dict, Iterable, List, Optional, Sequence, Tuple, Union

from tqdm import tqdm

from config import settings
from core.bnb import check_feasible, default_limits, solve_baseline
from core.decbranch import solve_db
from core.errors import GenerationError, HarnessError
from core.instance_io import load
from core.models import DbConfig, DecomposedMip, MipStatus, SearchLimits, SolveReport, SolveState, VariantKind
from harness.generators import generate
from harness.harness_models import (
    CSV_COLUMNS,
    ExperimentResult,
    ExperimentSummary,
    GenSpec,
    RunRecord,
    RunState,
)

logger = logging.getLogger(__name__)

PathLike = Union[str, Path]

# Delta rounding plus the four epsilon settings of the comparison study
DEFAULT_VARIANTS = "delta,eps:1/10,eps:1/100,eps:1/1000,eps:1/10000"


def classify(report: SolveReport, oracle_value: Fraction) -> RunState:
    """Exact classification of a solver report against the oracle optimum."""
    if not report.state.finished:
        return RunState.timelimit
    if report.state == SolveState.finished_nosol or report.value is None:
        return RunState.finished_nosol
    if report.value == oracle_value:
        return RunState.finished_opt
    if report.value > oracle_value:
        return RunState.finished_subopt
    raise HarnessError(
        f"solver value {report.value} is below the oracle optimum {oracle_value}; one of them is wrong"
    )


def _solve_cell(mip: DecomposedMip, cfg: DbConfig) -> SolveReport:
    return solve_db(mip, cfg)


def _oracle(mip: DecomposedMip, limits: SearchLimits) -> Optional[Fraction]:
    outcome = solve_baseline(mip, limits)
    if outcome.status != MipStatus.optimal:
        logger.warning("oracle returned %s on %s; instance excluded", outcome.status.value, mip.name)
        return None
    return outcome.value


def _record(mip: DecomposedMip, cfg: DbConfig, report: SolveReport, oracle_value: Fraction) -> RunRecord:
    if report.incumbent is not None and not check_feasible(mip, report.incumbent):
        raise HarnessError(f"{cfg.label} returned an infeasible incumbent on {mip.name}")
    return RunRecord(
        instance=mip.name,
        variant=cfg.label,
        state=classify(report, oracle_value),
        value=report.value,
        oracle_value=oracle_value,
        nodes=report.nodes,
        time_sec=report.time_sec,
    )


def _geometric_mean(ratios: List[float]) -> Optional[float]:
    if not ratios:
        return None
    return math.exp(math.fsum(math.log(r) for r in ratios) / len(ratios))


def summarize(records: Sequence[RunRecord], variants: Sequence[DbConfig], excluded: Sequence[str] = ()) -> ExperimentSummary:
    labels = [cfg.label for cfg in variants]
    counts = {label: {state.value: 0 for state in RunState} for label in labels}
    nodes: Dict[str, Dict[str, int]] = {}
    finished: Dict[Tuple[str, str], int] = {}
    for rec in records:
        counts.setdefault(rec.variant, {state.value: 0 for state in RunState})[rec.state.value] += 1
        nodes.setdefault(rec.instance, {})[rec.variant] = rec.nodes
        if rec.state != RunState.timelimit:
            finished[(rec.instance, rec.variant)] = rec.nodes

    reference = next((cfg.label for cfg in variants if cfg.variant == VariantKind.delta), None)
    ratios: Dict[str, Optional[float]] = {}
    if reference is not None:
        for cfg in variants:
            if cfg.variant != VariantKind.epsilon:
                continue
            pairs = [
                finished[(inst, reference)] / finished[(inst, cfg.label)]
                for inst in nodes
                if (inst, reference) in finished and (inst, cfg.label) in finished
            ]
            ratios[cfg.label] = _geometric_mean(pairs)

    return ExperimentSummary(
        variants=labels,
        state_counts=counts,
        nodes=nodes,
        excluded=list(excluded),
        reference_variant=reference,
        node_ratio=ratios,
    )


def run_experiment(
    instances: Sequence[DecomposedMip],
    variants: Sequence[DbConfig],
    limits: Optional[SearchLimits] = None,
    workers: Optional[int] = None,
    progress: bool = False,
) -> ExperimentResult:
    """
    Solve every (instance, variant) cell and classify it against the baseline
    optimum. Records come back ordered by instance, then variant, regardless of
    completion order.
    """
    limits = limits or default_limits()
    workers = settings.experiment_workers if workers is None else workers

    admitted: List[Tuple[DecomposedMip, Fraction]] = []
    excluded: List[str] = []
    for mip in instances:
        value = _oracle(mip, limits)
        if value is None:
            excluded.append(mip.name)
        else:
            admitted.append((mip, value))

    cells = [(i, k) for i in range(len(admitted)) for k in range(len(variants))]
    reports: Dict[Tuple[int, int], SolveReport] = {}
    bar = tqdm(total=len(cells), desc="experiment", unit="run", disable=not progress)
    if workers > 1 and len(cells) > 1:
        with ProcessPoolExecutor(max_workers=workers) as pool:
            futures = {pool.submit(_solve_cell, admitted[i][0], variants[k]): (i, k) for i, k in cells}
            for future in as_completed(futures):
                reports[futures[future]] = future.result()
                bar.update(1)
    else:
        for i, k in cells:
            reports[(i, k)] = _solve_cell(admitted[i][0], variants[k])
            bar.update(1)
    bar.close()

    records = [
        _record(admitted[i][0], variants[k], reports[(i, k)], admitted[i][1])
        for i, k in cells
    ]
    summary = summarize(records, variants, excluded)
    logger.info(
        "experiment finished: %d records over %d instances (%d excluded)",
        len(records), len(admitted), len(excluded),
    )
    return ExperimentResult(records=records, summary=summary)


def run_preselected(
    specs: Iterable[GenSpec],
    variants: Sequence[DbConfig],
    target: int,
    limits: Optional[SearchLimits] = None,
    max_instances: int = 200,
    progress: bool = False,
) -> ExperimentResult:
    """
    Generate instances one spec at a time and keep those on which at least one
    variant finishes within the limits, until `target` instances are kept or
    `max_instances` specs have been tried.
    """
    if not variants:
        raise HarnessError("preselection needs at least one variant")
    limits = limits or default_limits()

    records: List[RunRecord] = []
    excluded: List[str] = []
    skipped: List[str] = []
    kept = 0
    bar = tqdm(total=target, desc="preselect", unit="instance", disable=not progress)
    for count, spec in enumerate(specs):
        if kept >= target or count >= max_instances:
            break
        try:
            mip = generate(spec)
        except GenerationError as e:
            logger.warning("skipping seed %d: %s", spec.seed, e)
            excluded.append(spec.instance_name())
            continue
        result = run_experiment([mip], variants, limits=limits, workers=1)
        if not result.records:
            excluded.extend(result.summary.excluded)
            continue
        if all(rec.state == RunState.timelimit for rec in result.records):
            logger.info("skipping seed %d (%s): no variant finished", spec.seed, mip.name)
            skipped.append(mip.name)
            continue
        records.extend(result.records)
        kept += 1
        bar.update(1)
    bar.close()

    if kept < target:
        logger.warning("preselection kept %d of %d requested instances", kept, target)
    summary = summarize(records, variants, excluded)
    summary.skipped = skipped
    return ExperimentResult(records=records, summary=summary)


def scan_for_failures(
    specs: Iterable[GenSpec],
    cfg: DbConfig,
    max_instances: int = 200,
    limits: Optional[SearchLimits] = None,
) -> Optional[RunRecord]:
    """
    Generate and solve instances one at a time until `cfg` misses the oracle
    optimum (finished_nosol or finished_subopt). None if no failure occurs.
    """
    for count, spec in enumerate(specs):
        if count >= max_instances:
            break
        result = run_experiment([generate(spec)], [cfg], limits=limits, workers=1)
        for rec in result.records:
            if rec.state in (RunState.finished_nosol, RunState.finished_subopt):
                logger.info("%s fails on %s after %d instances", cfg.label, rec.instance, count + 1)
                return rec
    return None


# --- Files ---------------------------------------------------------------------------
def load_instances(directory: PathLike) -> List[DecomposedMip]:
    paths = sorted(Path(directory).glob("*.dmip"))
    if not paths:
        logger.warning("no .dmip instances under %s", directory)
    return [load(p) for p in paths]


def write_csv(records: Sequence[RunRecord], path: PathLike) -> Path:
    target = Path(path)
    target.parent.mkdir(parents=True, exist_ok=True)
    with target.open("w", newline="", encoding="utf-8") as f:
        writer = csv.writer(f)
        writer.writerow(CSV_COLUMNS)
        for rec in records:
            writer.writerow(rec.csv_row())
    return target


def write_summary(summary: ExperimentSummary, path: PathLike) -> Path:
    target = Path(path)
    target.parent.mkdir(parents=True, exist_ok=True)
    target.write_text(json.dumps(summary.model_dump(mode="json"), indent=2) + "\n", encoding="utf-8")
    return target


__all__ = [
    "DEFAULT_VARIANTS",
    "classify",
    "summarize",
    "run_experiment",
    "run_preselected",
    "scan_for_failures",
    "load_instances",
    "write_csv",
    "write_summary",
]
