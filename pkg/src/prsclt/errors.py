"""Exception types shared across the package."""

from __future__ import annotations

__all__ = ["ValidationError", "ConvergenceError", "DegenerateLimitError", "ReplicationError"]


class ValidationError(ValueError):
    """An input object failed a structural check (symmetry, PSD, shape)."""


class ConvergenceError(RuntimeError):
    """An iterative solver stopped before reaching its tolerance."""

    def __init__(self, message: str, residual: float, iterations: int) -> None:
        super().__init__(f"{message} (residual={residual:.3e}, iterations={iterations})")
        self.residual = residual
        self.iterations = iterations


class DegenerateLimitError(ValueError):
    """A Gaussian limit with zero spread was used where a proper law is needed."""


class ReplicationError(RuntimeError):
    """A single Monte Carlo replication failed; carries its index and seed."""

    def __init__(self, index: int, seed: int, cause: BaseException) -> None:
        super().__init__(f"replication {index} (seed {seed}) failed: {cause!r}")
        self.index = index
        self.seed = seed
