from __future__ import annotations

import math
from fractions import Fraction
from typing import Optional, Sequence

from core.errors import DomainError
from core.exact import RationalLike, dot, to_rational
from core.models import ConstraintOrigin, LocalConstraint, OriginKind, Sense


def _check_delta(delta: int) -> None:
    if isinstance(delta, bool) or not isinstance(delta, int) or delta < 1:
        raise DomainError(f"delta must be a positive integer, got {delta!r}")


def _origin(origin: Optional[ConstraintOrigin]) -> ConstraintOrigin:
    return origin or ConstraintOrigin(kind=OriginKind.user_cut)


def round_strict_greater(
    u: Sequence[int],
    w: Sequence[int],
    gamma: RationalLike,
    delta: int,
    origin: Optional[ConstraintOrigin] = None,
) -> LocalConstraint:
    """
    u.x + w.y > gamma  becomes  u.x + w.y >= (floor(delta*gamma) + 1) / delta.

    No point whose left-hand side lies in (1/delta)Z is cut off.
    """
    _check_delta(delta)
    g = to_rational(gamma)
    rhs = Fraction(math.floor(delta * g) + 1, delta)
    return LocalConstraint(u=list(u), w=list(w), sense=Sense.ge, rhs=rhs, origin=_origin(origin))


def round_strict_less(
    u: Sequence[int],
    w: Sequence[int],
    gamma: RationalLike,
    delta: int,
    origin: Optional[ConstraintOrigin] = None,
) -> LocalConstraint:
    """u.x + w.y < gamma  becomes  u.x + w.y <= (ceil(delta*gamma) - 1) / delta."""
    _check_delta(delta)
    g = to_rational(gamma)
    rhs = Fraction(math.ceil(delta * g) - 1, delta)
    return LocalConstraint(u=list(u), w=list(w), sense=Sense.le, rhs=rhs, origin=_origin(origin))


def strengthen_geq(
    u: Sequence[int],
    w: Sequence[int],
    gamma: RationalLike,
    delta: int,
    origin: Optional[ConstraintOrigin] = None,
) -> LocalConstraint:
    """u.x + w.y >= gamma  becomes  u.x + w.y >= ceil(delta*gamma) / delta."""
    _check_delta(delta)
    g = to_rational(gamma)
    rhs = Fraction(math.ceil(delta * g), delta)
    return LocalConstraint(u=list(u), w=list(w), sense=Sense.ge, rhs=rhs, origin=_origin(origin))


def epsilon_less(
    u: Sequence[int],
    w: Sequence[int],
    gamma: RationalLike,
    epsilon: RationalLike,
    origin: Optional[ConstraintOrigin] = None,
) -> LocalConstraint:
    """The epsilon reformulation: u.x + w.y < gamma  becomes  u.x + w.y <= gamma - epsilon."""
    eps = to_rational(epsilon)
    if eps <= 0:
        raise DomainError(f"epsilon must be positive, got {eps}")
    rhs = to_rational(gamma) - eps
    return LocalConstraint(u=list(u), w=list(w), sense=Sense.le, rhs=rhs, origin=_origin(origin))


def consistency_check_splitfree(
    v: Sequence[RationalLike],
    gamma_int: int,
    delta: int,
    points: Sequence[Sequence[RationalLike]],
) -> bool:
    """
    True iff no point lies strictly inside the split set
    {p | gamma_int < v.p < gamma_int + 1}.

    With v = delta*u for integral u and points in (1/delta)Z^n the set is
    lattice-free, which is what makes the rounding rules safe.
    """
    _check_delta(delta)
    vec = [to_rational(a) for a in v]
    low = Fraction(gamma_int)
    high = low + 1
    for point in points:
        value = dot(vec, [to_rational(p) for p in point])
        if low < value < high:
            return False
    return True


__all__ = [
    "round_strict_greater",
    "round_strict_less",
    "strengthen_geq",
    "epsilon_less",
    "consistency_check_splitfree",
]
