from __future__ import annotations

import json
import logging
import sys
import time
from pathlib import Path
from typing import Any, Dict, List, Optional, Sequence

import click
from pydantic import ValidationError

from config import configure_logging, settings
from core import regularity
from core.bnb import solve_baseline
from core.decbranch import parse_variant, solve_db
from core.errors import CapExceededError, DecBranchError, DomainError
from core.instance_io import load, load_matrix, store
from core.models import DbConfig, MipStatus, SearchLimits, SolveState
from harness.experiment import (
    DEFAULT_VARIANTS,
    load_instances,
    run_experiment,
    run_preselected,
    write_csv,
    write_summary,
)
from harness.generators import DESK_SHAPES, SMALL_SHAPES, default_suite, generate
from harness.harness_models import GenSpec

logger = logging.getLogger(__name__)

_BASELINE_STATES = {
    MipStatus.optimal: SolveState.finished_opt,
    MipStatus.infeasible: SolveState.finished_nosol,
    MipStatus.node_limit: SolveState.nodelimit,
    MipStatus.time_limit: SolveState.timelimit,
}


def _variant(text: str, **overrides: Any) -> DbConfig:
    try:
        return parse_variant(text, **overrides)
    except DomainError as e:
        raise click.BadParameter(str(e), param_hint="variant")


def _matrix_from(path: str) -> List[List[int]]:
    """A .mat file as is; for an instance file, its continuous-variable matrix."""
    if Path(path).suffix == ".dmip":
        return load(path).continuous_matrix()
    return load_matrix(path)


@click.group()
@click.option("--log-level", default=None, help="Override DBRANCH_LOG_LEVEL.")
def cli(log_level: Optional[str]) -> None:
    """Exact decomposition branching for block-structured MILPs."""
    configure_logging(log_level.upper() if log_level else None)


@cli.command("generate")
@click.option("--model", "model", type=click.Choice(["misl", "cfl", "cls"], case_sensitive=False), required=True)
@click.option("--items", type=int, default=None, help="Lot sizing: number of items.")
@click.option("--periods", type=int, default=None, help="Lot sizing: number of periods.")
@click.option("--clients", type=int, default=None, help="Facility location: number of clients.")
@click.option("--facilities", type=int, default=None, help="Facility location: number of facilities.")
@click.option("--seed", type=int, default=0, show_default=True)
@click.option("--out", "out", type=click.Path(dir_okay=False), required=True)
def generate_cmd(model: str, items, periods, clients, facilities, seed: int, out: str) -> None:
    model = model.upper()
    if model == "CFL":
        mu, eta = clients, facilities
        if mu is None or eta is None:
            raise click.UsageError("cfl needs --clients and --facilities")
    else:
        mu, eta = (1 if model == "CLS" and items is None else items), periods
        if mu is None or eta is None:
            raise click.UsageError(f"{model.lower()} needs --items and --periods")
    try:
        spec = GenSpec(model=model, mu=mu, eta=eta, seed=seed)
    except ValidationError as e:
        raise click.UsageError(str(e.errors()[0].get("msg")))
    mip = generate(spec)
    path = store(mip, out)
    click.echo(f"{path} delta={mip.delta}")


@cli.command("solve")
@click.argument("path", type=click.Path(dir_okay=False))
@click.option("--variant", type=click.Choice(["delta", "eps", "baseline"]), default="delta", show_default=True)
@click.option("--epsilon", default=None, help="Exact rational, e.g. 1/10 (eps variant).")
@click.option("--delta", "delta", default="auto", show_default=True, help="auto or a positive integer.")
@click.option("--node-limit", type=int, default=None)
@click.option("--time-limit", type=float, default=None)
@click.option("--trace", is_flag=True, default=False)
@click.option("--json", "as_json", is_flag=True, default=False)
def solve_cmd(path, variant, epsilon, delta, node_limit, time_limit, trace, as_json) -> None:
    limits: Dict[str, Any] = {
        "node_limit": node_limit or settings.node_limit,
        "time_limit": time_limit or settings.time_limit,
    }
    mip = load(path)

    if variant == "baseline":
        started = time.monotonic()
        outcome = solve_baseline(mip, SearchLimits(**limits))
        payload: Dict[str, Any] = {
            "state": _BASELINE_STATES[outcome.status].value,
            "value": None if outcome.value is None else str(outcome.value),
            "nodes": outcome.nodes,
            "time_sec": round(time.monotonic() - started, 6),
            "delta": None,
            "variant": "baseline",
        }
        _emit(payload, as_json)
        return

    if variant == "eps":
        if epsilon is None:
            raise click.UsageError("--epsilon is required for the eps variant")
        cfg = _variant(f"eps:{epsilon}", trace=trace, **limits)
    elif delta == "auto":
        cfg = _variant("delta", trace=trace, **limits)
    else:
        cfg = _variant(f"delta:{delta}", trace=trace, **limits)

    report = solve_db(mip, cfg)
    payload = {
        "state": report.state.value,
        "value": None if report.value is None else str(report.value),
        "nodes": report.nodes,
        "time_sec": report.time_sec,
        "delta": report.delta.model_dump(mode="json") if report.delta else None,
        "variant": report.variant,
        "incumbent": None if report.incumbent is None else [str(v) for v in report.incumbent],
    }
    if trace:
        payload["trace"] = report.trace_lines()
    _emit(payload, as_json)


def _emit(payload: Dict[str, Any], as_json: bool) -> None:
    if as_json:
        click.echo(json.dumps(payload, indent=2))
        return
    for key in ("variant", "state", "value", "nodes", "time_sec"):
        click.echo(f"{key}: {payload[key] if payload[key] is not None else '-'}")
    if payload.get("delta"):
        click.echo(f"delta: {payload['delta']['delta']} ({payload['delta']['provenance']})")
    for line in payload.get("trace", []):
        click.echo(line)


@cli.command("regularity")
@click.argument("path", type=click.Path(dir_okay=False))
@click.option("--method", type=click.Choice(["brute", "bounds", "theorem"]), default="brute", show_default=True)
@click.option("--cap", type=int, default=None, help="Work cap for brute force (submatrices).")
def regularity_cmd(path: str, method: str, cap: Optional[int]) -> None:
    if method == "theorem":
        mip = load(path)
        model = str(mip.meta.get("model", "")).upper()
        if model not in regularity.ModelKind.__members__:
            raise DomainError(f"{path} carries no model metadata; use --method brute or bounds")
        info = regularity.delta_for_model(regularity.ModelKind(model), mip.meta.get("a"))
        click.echo(f"{info.delta} {info.provenance.value}")
        return

    A = _matrix_from(path)
    if method == "brute":
        info = regularity.brute_force_minimal_delta(A, work_cap=cap)
        click.echo(str(info.delta))
        return

    click.echo(f"lower: {regularity.lower_bound_delta(A)}")
    try:
        click.echo(f"detset: {regularity.upper_bound_detset(A)}")
    except CapExceededError as e:
        click.echo(f"detset: - ({e})")
    click.echo(f"hadamard: {regularity.upper_bound_hadamard(A)}")
    if len(A) != len(A[0]):
        click.echo(f"nonsquare: {regularity.upper_bound_nonsquare(A)}")


@cli.command("experiment")
@click.option("--dir", "directory", type=click.Path(file_okay=False), default=None, help="Directory of .dmip files.")
@click.option("--suite", type=click.IntRange(min=1), default=None, help="Generate and preselect this many instances instead of reading --dir.")
@click.option("--shapes", type=click.Choice(["desk", "small"]), default="desk", show_default=True, help="Instance shapes for --suite.")
@click.option("--seed", type=click.IntRange(min=0), default=0, show_default=True, help="First seed for --suite.")
@click.option("--max-instances", type=click.IntRange(min=1), default=200, show_default=True, help="Seeds tried by --suite.")
@click.option("--variants", "variants", default=DEFAULT_VARIANTS, show_default=True, help="Comma-separated variants.")
@click.option("--out", "out", type=click.Path(dir_okay=False), required=True, help="CSV output path.")
@click.option("--summary", "summary", type=click.Path(dir_okay=False), default=None, help="JSON summary path.")
@click.option("--workers", type=int, default=None)
@click.option("--node-limit", type=int, default=None)
@click.option("--time-limit", type=float, default=None)
def experiment_cmd(directory, suite, shapes, seed, max_instances, variants, out, summary, workers, node_limit, time_limit) -> None:
    limits: Dict[str, Any] = {
        "node_limit": node_limit or settings.node_limit,
        "time_limit": time_limit or settings.time_limit,
    }
    configs = [_variant(v, **limits) for v in _split(variants)]
    if suite is not None:
        specs = default_suite(max_instances, seed=seed, shapes=SMALL_SHAPES if shapes == "small" else DESK_SHAPES)
        result = run_preselected(specs, configs, suite, SearchLimits(**limits), max_instances=max_instances, progress=True)
    else:
        instances = load_instances(directory or settings.instance_dir)
        result = run_experiment(instances, configs, SearchLimits(**limits), workers=workers, progress=True)
    write_csv(result.records, out)
    summary_path = Path(summary) if summary else Path(out).with_suffix(".json")
    write_summary(result.summary, summary_path)
    click.echo(f"{len(result.records)} records -> {out}; summary -> {summary_path}")


def _split(text: str) -> List[str]:
    return [part.strip() for part in text.split(",") if part.strip()]


def main(argv: Optional[Sequence[str]] = None) -> int:
    """Entry point returning the process exit code: 0 ok, 1 usage, 2 runtime error."""
    try:
        cli.main(args=list(argv) if argv is not None else None, prog_name="dbranch", standalone_mode=False)
    except click.exceptions.Abort:
        click.echo("aborted", err=True)
        return 1
    except click.ClickException as e:
        e.show()
        return 1
    except (DecBranchError, OSError) as e:
        click.echo(f"error: {e}", err=True)
        return 2
    return 0


if __name__ == "__main__":
    sys.exit(main())
