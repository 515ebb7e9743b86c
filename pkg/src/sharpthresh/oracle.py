"""Boolean functions as batch evaluators with optional closed forms."""
from __future__ import annotations

from dataclasses import dataclass, field
from typing import Callable, Optional

import numpy as np

from .circuit import Circuit

Evaluator = Callable[[np.ndarray], np.ndarray]


@dataclass(frozen=True)
class FunctionOracle:
    """A Boolean function on ``{0,1}^width``.

    ``evaluate`` maps a ``(batch, width)`` bit array to a length-``batch``
    boolean array. ``expectation`` is an optional exact formula ``p -> E_p f``.
    ``sampler`` optionally replaces the default product-measure sampler; it
    is called as ``sampler(p, rng, count)`` and returns ``count`` values of
    ``f(X)``, ``X ~ Bern(p)^width``. Custom samplers must draw from ``rng``
    so that the same stream at two biases gives monotonically coupled
    samples, and a longer draw must extend a shorter one. For a monotone
    function ``increasing`` tells whether ``E_p f`` rises or falls with p.
    """

    name: str
    width: int
    evaluate: Evaluator
    monotone: Optional[bool] = None
    expectation: Optional[Callable[[float], float]] = None
    sampler: Optional[Callable[[float, np.random.Generator, int], np.ndarray]] = None
    increasing: bool = True
    meta: dict = field(default_factory=dict, compare=False)

    def __call__(self, x) -> np.ndarray:
        x = np.asarray(x)
        if x.ndim == 1:
            return self.evaluate(x[None, :].astype(bool))[0]
        if x.shape[-1] != self.width:
            raise ValueError(f"{self.name}: expected width {self.width}, got {x.shape[-1]}")
        return np.asarray(self.evaluate(x.astype(bool, copy=False)), dtype=bool)

    def sample(self, p: float, rng: np.random.Generator, count: int) -> np.ndarray:
        if self.sampler is not None:
            return np.asarray(self.sampler(p, rng, count), dtype=bool)
        out = np.empty(count, dtype=bool)
        # rows are drawn in order, so a longer draw extends a shorter one
        step = max(1, (1 << 20) // max(self.width, 1))
        for a in range(0, count, step):
            m = min(step, count - a)
            out[a:a + m] = self(rng.random((m, self.width)) < p)
        return out


def from_circuit(circuit: Circuit, name: str = "circuit", output: int = 0, **kw) -> FunctionOracle:
    """Wrap one output of a circuit as an oracle."""
    def evaluate(x):
        return circuit.evaluate_batch(x)[:, output]
    kw.setdefault("meta", {})["circuit"] = circuit
    return FunctionOracle(name=name, width=circuit.input_width, evaluate=evaluate, **kw)


def from_truth_table(table, name: str = "table", **kw) -> FunctionOracle:
    """Oracle from a truth table indexed by ``sum_i x_i 2^i``."""
    table = np.asarray(table, dtype=bool)
    width = int(table.size).bit_length() - 1
    if 1 << width != table.size:
        raise ValueError("truth table length must be a power of two")
    weights = 1 << np.arange(width, dtype=np.int64)

    def evaluate(x):
        return table[x.astype(np.int64) @ weights]
    return FunctionOracle(name=name, width=width, evaluate=evaluate, **kw)


def constant(width: int, value: bool) -> FunctionOracle:
    v = bool(value)
    return FunctionOracle(
        name=f"const{int(v)}", width=width,
        evaluate=lambda x: np.full(x.shape[0], v),
        monotone=True, expectation=lambda p: float(v),
    )
