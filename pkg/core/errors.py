"""
Exception hierarchy shared by the integrators, the stability tools and the CLI.
Input problems subclass ValueError, numerical failures subclass ArithmeticError.
"""

from typing import List, Optional


class PDSError(Exception):
    """Base class for every error raised by this package."""


class DimensionError(PDSError, ValueError):
    """Matrix or vector shapes do not conform."""


class ValidationError(PDSError, ValueError):
    """A matrix is not Metzler or not conservative."""

    def __init__(self, violations: List[str]):
        self.violations = list(violations)
        super().__init__("; ".join(self.violations) or "validation failed")


class ParameterError(PDSError, ValueError):
    """Scheme coefficients outside their admissible range."""


class DomainError(PDSError, ValueError):
    """A state vector with a nonpositive component."""


class StepSizeError(PDSError, ValueError):
    """Finite-difference perturbation leaves the positive orthant."""


class CalibrationError(PDSError, ValueError):
    """Target z is not a positive multiple of the eigenvalue."""


class UnknownProblemError(PDSError, KeyError):
    """No built-in test problem with the requested id."""

    def __str__(self):
        return str(self.args[0]) if self.args else "unknown problem"


class UnderdeterminedSteadyStateError(PDSError, ArithmeticError):
    """The stacked steady-state system has a nontrivial null space."""


class SingularMatrixError(PDSError, ArithmeticError):
    """Pivot below the singularity threshold during elimination."""


class ConvergenceError(PDSError, ArithmeticError):
    """QR iteration did not converge within the iteration cap."""

    def __init__(self, message: str, residual: Optional[float] = None):
        self.residual = residual
        if residual is not None:
            message = f"{message} (residual {residual:.3e})"
        super().__init__(message)


class StageGuardError(PDSError, ArithmeticError):
    """A Patankar weight (sigma) became nonpositive."""


class PoleError(PDSError, ArithmeticError):
    """A rational stability function was evaluated at a pole."""


class UndefinedLimitError(PDSError, ArithmeticError):
    """Limit at -infinity does not exist for these parameters."""


class InconsistencyError(PDSError, ArithmeticError):
    """Two independent evaluations of the same quantity disagree."""


class ContractViolationError(PDSError, ArithmeticError):
    """A fixed-point premise failed: y* moved by the step, or a kernel direction not fixed by J."""
