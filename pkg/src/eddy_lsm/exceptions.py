"""Exception hierarchy for the eddy-current LSM toolkit."""

from typing import Optional


class EddyLSMError(Exception):
    """Base class for all errors raised by eddy_lsm."""


class ConfigurationError(EddyLSMError, ValueError):
    """Run configuration is malformed or violates an invariant."""


class MeshError(EddyLSMError, ValueError):
    """Mesh construction, tagging or point location failed."""


class SingularPointError(EddyLSMError, ValueError):
    """Evaluation requested at (or too close to) a singular point."""


class FileFormatError(EddyLSMError, ValueError):
    """An artifact file could not be parsed."""

    def __init__(self, message: str, line: Optional[int] = None):
        self.line = line
        if line is not None:
            message = f"line {line}: {message}"
        super().__init__(message)


class NumericalError(EddyLSMError, RuntimeError):
    """A linear solve or factorization did not meet its accuracy contract."""

    def __init__(
        self,
        message: str,
        residual: Optional[float] = None,
        condition_estimate: Optional[float] = None,
    ):
        self.residual = residual
        self.condition_estimate = condition_estimate
        details = []
        if residual is not None:
            details.append(f"relative residual={residual:.3e}")
        if condition_estimate is not None:
            details.append(f"condition estimate={condition_estimate:.3e}")
        if details:
            message = f"{message} ({', '.join(details)})"
        super().__init__(message)
