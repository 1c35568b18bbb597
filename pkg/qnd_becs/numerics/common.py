# numerics/common.py
import logging
import math
import warnings
from typing import Any, Dict, Iterable, List, Optional

import numpy as np

logger = logging.getLogger(__name__)

# Tolerances shared across modules
HERMITIAN_TOLERANCE = 1e-9
IMAGINARY_TOLERANCE = 1e-9
EIGENVALUE_CLAMP = 1e-12
DENOMINATOR_TOLERANCE = 1e-9
OUTCOME_IMPOSSIBLE_THRESHOLD = 1e-300
CANCELLATION_RATIO = 1e6
CANCELLATION_FLOOR = 1e-10


class QndSimulationError(Exception):
    """Base exception for all simulation errors"""

    def __init__(self, message: str, point: Optional[Dict[str, Any]] = None):
        self.point = point
        if point:
            message = f"{message} (at {format_point(point)})"
        super().__init__(message)


class OutcomeImpossibleError(QndSimulationError):
    """The requested photon outcome has vanishing probability"""
    pass


class IntegrityError(QndSimulationError):
    """Input operator or tensor violates a structural invariant"""
    pass


class EmptyConditionalError(QndSimulationError):
    """Projection onto a Fock state leaves an identically zero block"""
    pass


class NumericalError(QndSimulationError):
    """A numerical routine failed or lost its accuracy guarantee"""
    pass


class ConfigurationError(QndSimulationError):
    """Invalid configuration of a computation or sweep"""
    pass


class ConfigValidationError(ConfigurationError):
    """Sweep configuration rejected; carries every error found"""

    def __init__(self, errors: List[str]):
        self.errors = list(errors)
        super().__init__("Invalid configuration:\n  " + "\n  ".join(self.errors))


class OutputError(QndSimulationError):
    """Output location cannot be written"""
    pass


class CancellationWarning(RuntimeWarning):
    """Alternating sum lost most of its significant digits"""
    pass


def configure_logging(level: str = "INFO") -> None:
    """Configure root logging once for command-line use."""
    logging.basicConfig(
        level=getattr(logging, level.upper(), logging.INFO),
        format="%(asctime)s %(levelname)s %(name)s: %(message)s",
    )


def format_point(point: Dict[str, Any]) -> str:
    return ", ".join(f"{key}={value}" for key, value in point.items())


def compensated_sum(
    terms: Iterable[float], label: str = "alternating sum", floor: float = 0.0
) -> float:
    """
    Sum signed terms with compensated summation and flag heavy cancellation.

    Args:
        terms: Real terms of the sum
        label: Name used in the cancellation warning
        floor: Results with magnitude at or below this are treated as exact
            zeros and never warn

    Returns:
        The correctly rounded sum
    """
    values = list(terms)
    if not values:
        return 0.0
    total = math.fsum(values)
    largest = max(abs(v) for v in values)
    if largest > 0.0 and abs(total) * CANCELLATION_RATIO < largest and abs(total) > floor:
        warnings.warn(
            f"{label}: cancellation of {largest / abs(total):.3g}x the result",
            CancellationWarning,
            stacklevel=2,
        )
    return total


def check_hermitian(matrix: np.ndarray, what: str = "matrix", tolerance: float = HERMITIAN_TOLERANCE) -> None:
    """Raise IntegrityError when a square matrix is not Hermitian within tolerance."""
    if matrix.ndim != 2 or matrix.shape[0] != matrix.shape[1]:
        raise IntegrityError(f"{what} must be square, got shape {matrix.shape}")
    deviation = float(np.max(np.abs(matrix - matrix.conj().T))) if matrix.size else 0.0
    if deviation > tolerance:
        logger.error(f"Error checking hermiticity of {what}: deviation {deviation:.3e}")
        raise IntegrityError(f"{what} is not Hermitian (deviation {deviation:.3e})")


def real_part(value: complex, what: str = "value", tolerance: float = IMAGINARY_TOLERANCE) -> float:
    """Return the real part of a scalar that must be real up to tolerance."""
    if abs(np.imag(value)) > tolerance:
        raise IntegrityError(f"{what} has imaginary residue {abs(np.imag(value)):.3e}")
    return float(np.real(value))
