from __future__ import annotations

import logging
import math
import numpy as np
from typing import Dict, Iterator, List, Optional, Sequence, Tuple

from config import settings
from core.bnb import default_limits, solve_mip
from core.errors import GenerationError
from core.exact import lcm_all
from core.instance_io import check_invariants, to_lp
from core.models import Block, DecomposedMip, MipStatus, Sense
from core.regularity import ModelKind
from harness.harness_models import GenRanges, GenSpec

logger = logging.getLogger(__name__)


class _Builder:
    """Accumulates rows of A x + B y (sense) g over fixed column counts."""

    def __init__(self, n: int, ell: int):
        self.n = n
        self.ell = ell
        self.A: List[List[int]] = []
        self.B: List[List[int]] = []
        self.g: List[int] = []
        self.senses: List[Sense] = []

    def add(self, x: Dict[int, int], y: Dict[int, int], sense: Sense, rhs: int) -> int:
        a_row = [0] * self.n
        b_row = [0] * self.ell
        for j, v in x.items():
            a_row[j] += v
        for j, v in y.items():
            b_row[j] += v
        self.A.append(a_row)
        self.B.append(b_row)
        self.g.append(rhs)
        self.senses.append(sense)
        return len(self.g) - 1


def _draw(rng: np.random.Generator, bounds: Tuple[int, int]) -> int:
    return int(rng.integers(bounds[0], bounds[1], endpoint=True))


# --- Lot sizing ------------------------------------------------------------------
def _lot_sizing(spec: GenSpec, rng: np.random.Generator, with_resource: bool) -> Tuple[DecomposedMip, List[int]]:
    """
    Items are blocks. Per item the continuous columns are stocks s_1..s_eta then
    productions x_1..x_eta (initial stock fixed at zero); y^i_t are setups.
    """
    mu, eta, ranges = spec.mu, spec.eta, spec.ranges
    n, ell = 2 * mu * eta, mu * eta
    rows = _Builder(n, ell)
    c, d = [0] * n, [0] * ell

    a = [int(v) for v in rng.choice(ranges.a_choices, size=mu)] if with_resource else []
    demand = [[_draw(rng, ranges.demand) for _ in range(eta)] for _ in range(mu)]

    blocks: List[Block] = []
    for i in range(mu):
        s_cols = [2 * eta * i + t for t in range(eta)]
        x_cols = [2 * eta * i + eta + t for t in range(eta)]
        y_cols = [eta * i + t for t in range(eta)]
        for t in range(eta):
            c[s_cols[t]] = _draw(rng, ranges.holding)
            c[x_cols[t]] = _draw(rng, ranges.production)
            d[y_cols[t]] = _draw(rng, ranges.setup)
        cap = _draw(rng, (max(demand[i]), 2 * sum(demand[i])))

        block_rows = []
        for t in range(eta):
            flow = {x_cols[t]: 1, s_cols[t]: -1}
            if t > 0:
                flow[s_cols[t - 1]] = 1
            block_rows.append(rows.add(flow, {}, Sense.eq, demand[i][t]))
        for t in range(eta):
            block_rows.append(rows.add({x_cols[t]: -1}, {y_cols[t]: cap}, Sense.ge, 0))
        for t in range(eta):
            block_rows.append(rows.add({}, {y_cols[t]: -1}, Sense.ge, -1))
        blocks.append(Block(index=i, x_cols=s_cols + x_cols, y_cols=y_cols, rows=block_rows))

    linking: List[int] = []
    if with_resource:
        setup_use = [_draw(rng, ranges.setup_resource) for _ in range(mu)]
        peak = max(sum(a[i] * demand[i][t] for i in range(mu)) for t in range(eta))
        capacity = math.ceil(ranges.resource_factor * peak)
        for t in range(eta):
            x = {2 * eta * i + eta + t: a[i] for i in range(mu)}
            y = {eta * i + t: setup_use[i] for i in range(mu)}
            linking.append(rows.add(x, y, Sense.le, capacity))

    mip = DecomposedMip(
        name=spec.instance_name(),
        c=c,
        d=d,
        A=rows.A,
        B=rows.B,
        g=rows.g,
        senses=rows.senses,
        blocks=blocks,
        linking_rows=linking,
        delta=lcm_all(a) if a else 1,
    )
    return mip, a


# --- Facility location -------------------------------------------------------------
def _facility_location(spec: GenSpec, rng: np.random.Generator) -> Tuple[DecomposedMip, List[int]]:
    """
    One block per client holding its assignment columns x^i_j; a last block
    holds every opening variable y_j together with the global capacity cut.
    Capacity rows are the linking rows. Half of the clients are single-sourced.
    """
    mu, eta, ranges = spec.mu, spec.eta, spec.ranges
    n, ell = mu * eta, eta
    rows = _Builder(n, ell)

    a = [int(v) for v in rng.choice(ranges.a_choices, size=mu)]
    c = [_draw(rng, ranges.transport) for _ in range(n)]
    d = [_draw(rng, ranges.fixed) for _ in range(ell)]
    total, biggest = sum(a), max(a)
    base = max(math.ceil(ranges.capacity_factor * total / eta), biggest)
    capacity = [base + _draw(rng, (0, biggest)) for _ in range(eta)]
    single = sorted(int(i) for i in rng.choice(mu, size=mu // 2, replace=False))

    blocks: List[Block] = []
    for i in range(mu):
        cols = [i * eta + j for j in range(eta)]
        row = rows.add({j: 1 for j in cols}, {}, Sense.eq, 1)
        blocks.append(Block(index=i, x_cols=cols, y_cols=[], rows=[row]))

    y_rows = [rows.add({}, {j: capacity[j] for j in range(eta)}, Sense.ge, total)]
    for j in range(eta):
        y_rows.append(rows.add({}, {j: -1}, Sense.ge, -1))
    blocks.append(Block(index=mu, x_cols=[], y_cols=list(range(eta)), rows=y_rows))

    linking = [
        rows.add({i * eta + j: a[i] for i in range(mu)}, {j: -capacity[j]}, Sense.le, 0)
        for j in range(eta)
    ]

    mip = DecomposedMip(
        name=spec.instance_name(),
        c=c,
        d=d,
        A=rows.A,
        B=rows.B,
        g=rows.g,
        senses=rows.senses,
        blocks=blocks,
        linking_rows=linking,
        integer_x=[i * eta + j for i in single for j in range(eta)],
        delta=lcm_all(a),
    )
    return mip, a


def _build(spec: GenSpec, rng: np.random.Generator) -> Tuple[DecomposedMip, List[int]]:
    if spec.model == ModelKind.MISL:
        return _lot_sizing(spec, rng, with_resource=True)
    if spec.model == ModelKind.CLS:
        return _lot_sizing(spec, rng, with_resource=False)
    return _facility_location(spec, rng)


def _is_feasible(mip: DecomposedMip) -> bool:
    zero = to_lp(mip).with_objective([0] * mip.num_vars)
    outcome = solve_mip(zero, mip.integer_columns(), default_limits())
    if outcome.status in (MipStatus.node_limit, MipStatus.time_limit):
        logger.info("feasibility check for %s hit %s; resampling", mip.name, outcome.status.value)
    return outcome.status == MipStatus.optimal


def generate(spec: GenSpec) -> DecomposedMip:
    """
    Seeded instance for the given spec. Draws are resampled from the same
    stream until the instance is feasible, so equal specs give equal instances.
    """
    rng = np.random.default_rng(spec.seed)
    for attempt in range(settings.generator_retries):
        mip, a = _build(spec, rng)
        mip.meta = {
            "model": spec.model.value,
            "seed": spec.seed,
            "a": a,
            "mu": spec.mu,
            "eta": spec.eta,
            "attempt": attempt,
            "ranges": spec.ranges.model_dump(mode="json"),
        }
        check_invariants(mip)
        if _is_feasible(mip):
            logger.info("generated %s (attempt %d, delta %s)", mip.name, attempt, mip.delta)
            return mip
        logger.info("discarding infeasible draw %d for %s", attempt, mip.name)
    raise GenerationError(
        f"no feasible {spec.model.value} instance for seed {spec.seed} after "
        f"{settings.generator_retries} attempts; loosen capacities (resource_factor, capacity_factor)"
    )


Shape = Tuple[ModelKind, int, int]

DESK_SHAPES: Tuple[Shape, ...] = (
    (ModelKind.MISL, 2, 3),
    (ModelKind.CFL, 6, 2),
    (ModelKind.MISL, 3, 3),
    (ModelKind.CFL, 6, 3),
    (ModelKind.MISL, 2, 4),
)

# Smaller instances for quick suites and tests.
SMALL_SHAPES: Tuple[Shape, ...] = (
    (ModelKind.MISL, 2, 2),
    (ModelKind.CFL, 3, 2),
    (ModelKind.MISL, 2, 3),
    (ModelKind.CFL, 4, 2),
)


def default_suite(
    count: int,
    seed: int = 0,
    shapes: Sequence[Shape] = DESK_SHAPES,
    ranges: Optional[GenRanges] = None,
) -> Iterator[GenSpec]:
    """Suite cycling through `shapes`, one seed per instance."""
    if not shapes:
        raise GenerationError("a suite needs at least one shape")
    for k in range(count):
        model, mu, eta = shapes[k % len(shapes)]
        yield GenSpec(model=model, mu=mu, eta=eta, seed=seed + k, ranges=ranges or GenRanges())


__all__ = ["generate", "default_suite", "DESK_SHAPES", "SMALL_SHAPES"]
