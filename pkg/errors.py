"""
Exception hierarchy shared by every trajscape module
"""
from typing import Optional


class TrajscapeError(Exception):
    """Base error. `stage` names the pipeline stage that failed, when known."""

    def __init__(self, message: str, stage: Optional[str] = None):
        super().__init__(message)
        self.stage = stage

    def __str__(self) -> str:
        message = super().__str__()
        return f"[{self.stage}] {message}" if self.stage else message


class ShapeError(TrajscapeError):
    """Array dimensions do not match the network or problem arity"""


class UsageError(TrajscapeError):
    """An operation was called out of order (e.g. backward without a forward cache)"""


class NumericalError(TrajscapeError):
    """A non-finite value appeared where finite numbers are required"""

    def __init__(self, message: str, index: Optional[int] = None, stage: Optional[str] = None):
        super().__init__(message, stage)
        self.index = index


class InvalidInputError(TrajscapeError):
    """Input violates a documented precondition (non-symmetric matrix, bad anchors, ...)"""


class ConfigError(TrajscapeError):
    """Experiment or component configuration is inconsistent"""


class DegenerateOutputError(TrajscapeError):
    """A network produced a (near) zero eigenvector prediction"""


class DegenerateBasisError(TrajscapeError):
    """A trajectory does not span two independent directions"""


class IllConditionedError(TrajscapeError):
    """A kernel system is too ill-conditioned to invert reliably"""

    def __init__(self, message: str, condition: float, stage: Optional[str] = None):
        super().__init__(f"{message} (condition estimate {condition:.3e})", stage)
        self.condition = condition


class OracleNotFoundError(TrajscapeError, KeyError):
    """Lookup of an oracle name that was never registered"""

    def __str__(self) -> str:
        return TrajscapeError.__str__(self)


class DuplicateOracleError(TrajscapeError):
    """Two oracles were registered under the same name"""


class FormatError(TrajscapeError):
    """An NVTJ container is malformed"""

    def __init__(
        self,
        message: str,
        offset: int,
        expected: Optional[int] = None,
        actual: Optional[int] = None,
    ):
        detail = f"{message} at byte offset {offset}"
        if expected is not None and actual is not None:
            detail += f" (expected {expected} bytes, got {actual})"
        super().__init__(detail)
        self.offset = offset
        self.expected = expected
        self.actual = actual


class TrainingAbortedError(TrajscapeError):
    """Training hit a non-finite loss"""

    def __init__(self, message: str, epoch: int, breakdown: Optional[dict] = None, stage: Optional[str] = None):
        if breakdown:
            parts = ", ".join(f"{name}={value!r}" for name, value in breakdown.items())
            message = f"{message} at epoch {epoch}: {parts}"
        else:
            message = f"{message} at epoch {epoch}"
        super().__init__(message, stage)
        self.epoch = epoch
        self.breakdown = breakdown or {}
