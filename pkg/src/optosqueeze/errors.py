"""
Exception hierarchy shared by the model, sweep and CLI layers.

Every exception carries the process exit code the CLI reports for it.
"""

from typing import Any, Dict, Optional


class OptoSqueezeError(Exception):
    """Base class for all optosqueeze errors"""

    exit_code = 3

    def __init__(self, message: str, field: Optional[str] = None):
        super().__init__(message)
        self.message = message
        self.field = field

    def to_dict(self) -> Dict[str, Any]:
        """Machine-readable error envelope

        Returns:
            Dict with code, type, field and message
        """
        return {
            "error": {
                "code": self.exit_code,
                "type": type(self).__name__,
                "field": self.field,
                "message": self.message,
            }
        }


class ConfigError(OptoSqueezeError):
    """Invalid or incomplete configuration"""

    exit_code = 2


class NumericalError(OptoSqueezeError):
    """A numerical stage could not produce a trustworthy result"""

    exit_code = 3


class NoStableBranch(NumericalError):
    """Every steady-state root violates the stability conditions"""


class UnstableBranch(NumericalError):
    """Variances were requested on an unstable steady state"""


class TailNotConverged(NumericalError):
    """The frequency window reached its cap before the tail met the tolerance"""


class EigenSolverError(NumericalError):
    """The drift-matrix eigensolver failed on finite input"""
