from __future__ import annotations

from typing import Optional


class DecBranchError(RuntimeError):
    pass


class DomainError(DecBranchError, ValueError):
    """Precondition or dimension failure on an otherwise well-typed call."""


class SingularMatrixError(DecBranchError):
    pass


class CapExceededError(DecBranchError):
    def __init__(self, message: str, estimate: int, cap: int):
        super().__init__(f"{message} (estimate {estimate}, cap {cap})")
        self.estimate = estimate
        self.cap = cap


class InstanceFormatError(DecBranchError):
    def __init__(self, message: str, line: Optional[int] = None, field: Optional[str] = None):
        where = []
        if line is not None:
            where.append(f"line {line}")
        if field:
            where.append(field)
        prefix = f"[{', '.join(where)}] " if where else ""
        super().__init__(f"{prefix}{message}")
        self.line = line
        self.field = field


class InvariantViolation(DecBranchError):
    def __init__(self, invariant: str, detail: str = ""):
        super().__init__(f"{invariant}: {detail}" if detail else invariant)
        self.invariant = invariant


class InfeasibleError(DecBranchError):
    pass


class UnboundedError(DecBranchError):
    pass


class DeltaResolutionError(DecBranchError):
    pass


class GenerationError(DecBranchError):
    pass


class HarnessError(DecBranchError):
    pass


__all__ = [
    "DecBranchError",
    "DomainError",
    "SingularMatrixError",
    "CapExceededError",
    "InstanceFormatError",
    "InvariantViolation",
    "InfeasibleError",
    "UnboundedError",
    "DeltaResolutionError",
    "GenerationError",
    "HarnessError",
]
