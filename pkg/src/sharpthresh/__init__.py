"""Sharp thresholds of Boolean functions and bounded-depth circuits."""

__version__ = "0.1.0"

from .circuit import Circuit, CircuitBuilder, CircuitError, compose, deserialize, evaluate, measure, serialize
from .oracle import FunctionOracle

__all__ = [
    "Circuit", "CircuitBuilder", "CircuitError", "FunctionOracle",
    "compose", "deserialize", "evaluate", "measure", "serialize", "__version__",
]
