"""Depth and size lower-bound formulas evaluated on window data.

All logarithms are base 2. The universal constants ``c1, c2`` are unknown
and default to 1, so every value is meaningful only up to those constants.
"""
from __future__ import annotations

import math
from dataclasses import dataclass

BETA_EXPONENT = 0.01
WINDOW_RATIO_LIMIT = 0.1


@dataclass(frozen=True)
class BoundInput:
    N: int
    epsilon: float
    delta: float
    p_c: float
    d: float | None = None
    c1: float = 1.0
    c2: float = 1.0

    def __post_init__(self):
        for name in ("epsilon", "p_c"):
            v = getattr(self, name)
            if not 0.0 < v < 1.0:
                raise ValueError(f"{name} must lie in (0, 1), got {v}")
        if not 0.0 < self.delta <= 1.0:
            raise ValueError(f"delta must lie in (0, 1], got {self.delta}")
        if self.N < 2:
            raise ValueError("N must be >= 2")

    @property
    def beta(self) -> float:
        return min(self.p_c, 1.0 - self.p_c)

    @property
    def beta_small(self) -> bool:
        """Proxy for ``beta = N^(-Omega(1))``: ``beta <= N^(-0.01)``."""
        return self.beta <= self.N ** -BETA_EXPONENT

    @property
    def window_ratio(self) -> float:
        return self.epsilon * math.log2(1.0 / self.beta) / (1.0 - self.p_c)

    @property
    def window_small(self) -> bool:
        """Proxy for ``epsilon = o((1 - p_c) / log(1/beta))``."""
        return self.window_ratio <= WINDOW_RATIO_LIMIT

    @property
    def hypotheses_hold(self) -> bool:
        return self.beta_small and self.window_small

    @classmethod
    def from_report(cls, report, N: int | None = None, **kw) -> "BoundInput":
        """Build from a :class:`~sharpthresh.thresholds.ThresholdReport`."""
        return cls(N=N if N is not None else report.width, epsilon=report.epsilon,
                   delta=report.delta, p_c=report.p_c, **kw)


def key_quantity(b: BoundInput) -> float:
    """``delta (1 - p_c) / (epsilon log2(1/beta))``."""
    return b.delta * (1.0 - b.p_c) / (b.epsilon * math.log2(1.0 / b.beta))


@dataclass(frozen=True)
class DepthBound:
    value: float
    key: float
    trivial: bool


def _depth(N: int, q: float, offset: float) -> DepthBound:
    if N < 16:
        raise ValueError("depth bound needs N >= 16 so that log log N >= 2")
    value = math.log2(q) / (2.0 * math.log2(math.log2(N))) - offset
    return DepthBound(value, q, q <= 1.0)


def depth_bound(b: BoundInput) -> DepthBound:
    """``log2(Q) / (2 log2 log2 N) - 3``."""
    return _depth(b.N, key_quantity(b), 3.0)


@dataclass(frozen=True)
class SizeBound:
    log2_value: float
    key: float
    d: float

    @property
    def value(self) -> float:
        return 2.0 ** self.log2_value if self.log2_value < 1024 else math.inf


def _size(q: float, d: float, shift: float, c1: float, c2: float) -> SizeBound:
    if d < 0:
        raise ValueError("d must be >= 0")
    log2_v = math.log2(c1) + c2 * q ** (1.0 / (d + shift)) / math.log(2.0)
    return SizeBound(log2_v, q, d)


def size_bound(b: BoundInput, d: float | None = None) -> SizeBound:
    """``c1 exp(c2 Q^(1/(d+3)))``, returned through its base-2 logarithm."""
    d = b.d if d is None else d
    if d is None:
        raise ValueError("size bound needs a depth d")
    return _size(key_quantity(b), d, 3.0, b.c1, b.c2)


@dataclass(frozen=True)
class AoNBounds:
    ratio: float
    depth_rhs: float
    size_log2_rhs: float
    hypothesis_ok: bool


def aon_ratio(epsilon: float, p_it: float) -> float:
    beta = min(p_it, 1.0 - p_it)
    return (1.0 - p_it) / (epsilon * math.log2(1.0 / beta))


def aon_bounds(N: int, epsilon: float, p_it: float, d: float, c1: float = 1.0,
               c2: float = 1.0) -> AoNBounds:
    """Depth and size bounds from the All-or-Nothing window (exponent ``d+6``, offset 6)."""
    if not 0.0 < p_it < 1.0 or not 0.0 < epsilon < 1.0:
        raise ValueError("epsilon and p_it must lie in (0, 1)")
    q = aon_ratio(epsilon, p_it)
    depth = _depth(N, q, 6.0).value
    size = _size(q, d, 6.0, c1, c2).log2_value
    beta = min(p_it, 1.0 - p_it)
    ok = epsilon < (1.0 - p_it) / math.log2(1.0 / beta)
    return AoNBounds(q, depth, size, ok)


def mirrored(b: BoundInput) -> BoundInput:
    """The same bound input seen through input negation: ``p_c -> 1 - p_c``, rescaled window."""
    return BoundInput(N=b.N, epsilon=b.epsilon * b.p_c / (1.0 - b.p_c), delta=b.delta,
                      p_c=1.0 - b.p_c, d=b.d, c1=b.c1, c2=b.c2)
