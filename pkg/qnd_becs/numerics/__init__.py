from .common import (
    CancellationWarning,
    ConfigValidationError,
    ConfigurationError,
    EmptyConditionalError,
    IntegrityError,
    NumericalError,
    OutcomeImpossibleError,
    OutputError,
    QndSimulationError,
)

__all__ = [
    "CancellationWarning",
    "ConfigValidationError",
    "ConfigurationError",
    "EmptyConditionalError",
    "IntegrityError",
    "NumericalError",
    "OutcomeImpossibleError",
    "OutputError",
    "QndSimulationError",
]
