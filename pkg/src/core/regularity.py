from __future__ import annotations

import itertools
import logging
import math
from enum import Enum
from typing import Iterator, List, Optional, Sequence, Tuple

from config import settings
from core.errors import CapExceededError, DomainError
from core.exact import bareiss_det, lcm_all, scaled_inverse
from core.models import DeltaInfo, DeltaProvenance

logger = logging.getLogger(__name__)

IntMatrix = List[List[int]]


class ModelKind(str, Enum):
    CLS = "CLS"
    MISL = "MISL"
    CFL = "CFL"


def _shape(A: Sequence[Sequence[int]]) -> Tuple[int, int]:
    m = len(A)
    n = len(A[0]) if m else 0
    if any(len(r) != n for r in A):
        raise DomainError("ragged matrix")
    return m, n


def _transpose(A: Sequence[Sequence[int]]) -> IntMatrix:
    m, n = _shape(A)
    return [[A[i][j] for i in range(m)] for j in range(n)]


def _lcm_upto(k: int) -> int:
    return math.lcm(*range(1, max(1, k) + 1))


def submatrix_count(m: int, n: int) -> int:
    """Number of square submatrices of an m x n matrix (sizes 1..min(m, n))."""
    return sum(math.comb(m, w) * math.comb(n, w) for w in range(1, min(m, n) + 1))


def _square_submatrices(A: Sequence[Sequence[int]], max_size: Optional[int] = None) -> Iterator[IntMatrix]:
    m, n = _shape(A)
    top = min(m, n) if max_size is None else min(m, n, max_size)
    for w in range(1, top + 1):
        for rows in itertools.combinations(range(m), w):
            for cols in itertools.combinations(range(n), w):
                yield [[A[i][j] for j in cols] for i in rows]


def denominator_of_inverse(R: Sequence[Sequence[int]]) -> Optional[int]:
    """
    Least D with D * R^-1 integral, computed as |det R| / gcd(|det R|, adj R)
    without leaving the integers. None when R is singular.
    """
    if len(R) == 1:
        a = R[0][0]
        return abs(a) if a else None
    scaled = scaled_inverse(R)
    if scaled is None:
        return None
    d, X = scaled
    common = abs(d)
    for row in X:
        for v in row:
            common = math.gcd(common, v)
            if common == 1:
                return abs(d)
    return abs(d) // common


def lower_bound_delta(A: Sequence[Sequence[int]]) -> int:
    nonzero = [v for row in A for v in row if v]
    if not nonzero:
        raise DomainError("lower bound is undefined for an all-zero matrix")
    return lcm_all(nonzero)


def upper_bound_detset(A: Sequence[Sequence[int]], size_cap: Optional[int] = None) -> int:
    cap = settings.detset_cap if size_cap is None else size_cap
    m, n = _shape(A)
    if min(m, n) > cap:
        raise CapExceededError(
            "determinant-set bound needs every square submatrix; use the Hadamard bound instead",
            min(m, n),
            cap,
        )
    result = 1
    for R in _square_submatrices(A):
        d = bareiss_det(R)
        if d:
            result = math.lcm(result, abs(d))
    return result


def upper_bound_hadamard(A: Sequence[Sequence[int]]) -> int:
    """lcm{1..floor(prod_i max(1, ||a_i||))}, with the floor taken by integer square root."""
    product = 1
    for row in A:
        product *= max(1, sum(v * v for v in row))
    return _lcm_upto(math.isqrt(product))


def upper_bound_nonsquare(A: Sequence[Sequence[int]]) -> int:
    """lcm{1..floor(max_i ||a_i|| ** n')} with n' the smaller dimension."""
    m, n = _shape(A)
    if m == n:
        raise DomainError("matrix is square; use the determinant-set or Hadamard bound")
    rows = _transpose(A) if m < n else [list(r) for r in A]
    n_small = min(m, n)
    max_sq = max(sum(v * v for v in row) for row in rows)
    return _lcm_upto(math.isqrt(max_sq ** n_small))


def brute_force_minimal_delta(A: Sequence[Sequence[int]], work_cap: Optional[int] = None) -> DeltaInfo:
    cap = settings.brute_force_cap if work_cap is None else work_cap
    m, n = _shape(A)
    estimate = submatrix_count(m, n)
    if estimate > cap:
        raise CapExceededError("too many square submatrices for brute force", estimate, cap)
    logger.debug("brute force over %d submatrices of a %dx%d matrix", estimate, m, n)
    delta = 1
    for R in _square_submatrices(A):
        d_r = denominator_of_inverse(R)
        if d_r is not None and delta % d_r:
            delta = math.lcm(delta, d_r)
    return DeltaInfo(delta=delta, provenance=DeltaProvenance.brute_force_minimal)


def is_delta_regular(A: Sequence[Sequence[int]], delta: int, work_cap: Optional[int] = None) -> bool:
    """True iff delta * R^-1 is integral for every nonsingular square submatrix R."""
    if delta < 1:
        raise DomainError(f"delta must be positive, got {delta}")
    cap = settings.brute_force_cap if work_cap is None else work_cap
    m, n = _shape(A)
    estimate = submatrix_count(m, n)
    if estimate > cap:
        raise CapExceededError("too many square submatrices to verify regularity", estimate, cap)
    for R in _square_submatrices(A):
        d_r = denominator_of_inverse(R)
        if d_r is not None and delta % d_r:
            return False
    return True


def delta_for_model(kind: ModelKind, a: Optional[Sequence[int]] = None) -> DeltaInfo:
    kind = ModelKind(kind)
    if kind == ModelKind.CLS:
        return DeltaInfo(delta=1, provenance=DeltaProvenance.theorem_cls)
    if not a:
        raise DomainError(f"{kind.value} needs the coefficients a")
    if any(isinstance(v, bool) or not isinstance(v, int) or v < 1 for v in a):
        raise DomainError(f"{kind.value} coefficients must be integers >= 1, got {list(a)}")
    provenance = DeltaProvenance.theorem_misl if kind == ModelKind.MISL else DeltaProvenance.theorem_cfl
    return DeltaInfo(delta=lcm_all(a), provenance=provenance)


# --- Model matrices for the continuous variables --------------------------------------
_MAX_MODEL_CELLS = 2_000


def _flow_matrix(eta: int) -> IntMatrix:
    """The eta x (eta+1) matrix with rows e_t - e_{t+1}."""
    H = [[0] * (eta + 1) for _ in range(eta)]
    for t in range(eta):
        H[t][t] = 1
        H[t][t + 1] = -1
    return H


def build_model_matrix(kind: ModelKind, dims: Sequence[int], a: Optional[Sequence[int]] = None) -> IntMatrix:
    """
    Constraint matrix of the continuous variables for fixed integer variables,
    in >=-form with equations stacked as (M; -M).

    CLS: dims = (eta,), columns (s_0..s_eta, x_1..x_eta).
    MISL: dims = (mu, eta), columns (s^1, ..., s^mu, x^1, ..., x^mu).
    CFL: dims = (mu, eta), columns x^i_j client-major.
    """
    kind = ModelKind(kind)
    if kind == ModelKind.CLS:
        (eta,) = dims
        mu, coeffs = 1, None
    else:
        mu, eta = dims
        if a is None or len(a) != mu:
            raise DomainError(f"{kind.value} needs exactly {mu} coefficients a")
        coeffs = list(a)
    if mu < 1 or eta < 1:
        raise DomainError("dimensions must be positive")

    if kind == ModelKind.CFL:
        cols = mu * eta
        rows_needed = 2 * mu + eta
    else:
        cols = mu * (eta + 1) + mu * eta
        rows_needed = 3 * mu * eta + (eta if kind == ModelKind.MISL else 0)
    if cols * rows_needed > _MAX_MODEL_CELLS:
        raise DomainError(f"model matrix {rows_needed}x{cols} is too large for verification")

    if kind == ModelKind.CFL:
        demand = []
        for i in range(mu):
            row = [0] * cols
            for j in range(eta):
                row[i * eta + j] = 1
            demand.append(row)
        capacity = []
        for j in range(eta):
            row = [0] * cols
            for i in range(mu):
                row[i * eta + j] = -coeffs[i]
            capacity.append(row)
        return demand + [[-v for v in r] for r in demand] + capacity

    H = _flow_matrix(eta)
    s_width = mu * (eta + 1)
    flow: IntMatrix = []
    for i in range(mu):
        for t in range(eta):
            row = [0] * cols
            for k in range(eta + 1):
                row[i * (eta + 1) + k] = H[t][k]
            row[s_width + i * eta + t] = 1
            flow.append(row)
    negated = [[-v for v in r] for r in flow]
    bounds = []
    for i in range(mu):
        for t in range(eta):
            row = [0] * cols
            row[s_width + i * eta + t] = -1
            bounds.append(row)
    matrix = flow + negated + bounds
    if kind == ModelKind.MISL:
        for t in range(eta):
            row = [0] * cols
            for i in range(mu):
                row[s_width + i * eta + t] = -coeffs[i]
            matrix.append(row)
    return matrix


__all__ = [
    "ModelKind",
    "submatrix_count",
    "denominator_of_inverse",
    "lower_bound_delta",
    "upper_bound_detset",
    "upper_bound_hadamard",
    "upper_bound_nonsquare",
    "brute_force_minimal_delta",
    "is_delta_regular",
    "delta_for_model",
    "build_model_matrix",
]
