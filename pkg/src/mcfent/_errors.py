"""Exception hierarchy shared by all mcfent modules"""

from typing import Any, Dict, Optional


__all__ = (
    'MCFError',
    'MeshError',
    'DomainError',
    'ConvergenceError',
    'PerturbationError',
    'PipelineError',
)


class MCFError(Exception):
    """Base class of every error raised by mcfent."""
    pass


class MeshError(MCFError, ValueError):
    """A surface violates its invariants (vertex count, orientation,
    simplicity, axis conditions)."""
    pass


class DomainError(MCFError, ValueError):
    """An operation was called outside its preconditions."""
    pass


class ConvergenceError(MCFError, RuntimeError):
    """A numerical procedure did not converge.

    `details` holds whatever the procedure knows about the failure, e.g.
    the scanned parameter interval of a shooting run.
    """
    def __init__(self, message: str,
                 details: Optional[Dict[str, Any]] = None):
        super().__init__(message)
        self.details = dict(details or {})


class PerturbationError(ConvergenceError):
    """Backtracking for an inward perturbation was exhausted, or the
    perturbation was refused.

    `failed_property` is 1 (entropy decrease), 2 (containment) or
    3 (positive rescaled mean curvature) for the property that failed on
    the last attempt; it is None when the perturbation was refused
    because the eigenvalue does not exceed one.
    """
    def __init__(self, message: str, failed_property: Optional[int],
                 details: Optional[Dict[str, Any]] = None):
        super().__init__(message, details)
        self.failed_property = failed_property


class PipelineError(MCFError, RuntimeError):
    """A pipeline stage failed.  `stage` names the stage and `report`
    holds the partial report assembled so far."""
    def __init__(self, stage: str, report: Any, message: str):
        super().__init__(f"pipeline stage '{stage}' failed: {message}")
        self.stage = stage
        self.report = report
