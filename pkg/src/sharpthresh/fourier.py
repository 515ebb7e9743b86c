"""Exact p-biased Fourier analysis by enumeration of the whole cube.

Inputs are indexed by the integer ``sum_i x_i 2^i`` and subsets of ``[N]``
by the same bitmask convention. The orthonormal basis under ``P_p`` is
``chi_S(x) = prod_{i in S} (x_i - p) / sqrt(p(1-p))``.
"""
from __future__ import annotations

import io
from dataclasses import dataclass, field

import numpy as np

from .circuit import Circuit
from .oracle import FunctionOracle, from_circuit

EXACT_LIMIT = 22
DENSE_LIMIT = 16


class WidthError(ValueError):
    """Input width is beyond exact enumeration; use Monte Carlo instead."""


def _check(width: int, p: float | None = None, limit: int = EXACT_LIMIT):
    if width > limit:
        raise WidthError(f"width {width} exceeds exact enumeration limit {limit}")
    if p is not None and not 0.0 < p < 1.0:
        raise ValueError(f"bias p must lie in (0, 1), got {p}")


def cube(width: int, start: int = 0, stop: int | None = None) -> np.ndarray:
    """Rows ``x`` of ``{0,1}^width`` for indices ``start..stop-1``."""
    stop = 1 << width if stop is None else stop
    idx = np.arange(start, stop, dtype=np.int64)
    return ((idx[:, None] >> np.arange(width)) & 1).astype(bool)


def truth_table(f: FunctionOracle, limit: int = EXACT_LIMIT, chunk: int = 1 << 16) -> np.ndarray:
    _check(f.width, limit=limit)
    total = 1 << f.width
    out = np.empty(total, dtype=bool)
    for a in range(0, total, chunk):
        b = min(total, a + chunk)
        out[a:b] = f(cube(f.width, a, b))
    return out


def popcounts(width: int) -> np.ndarray:
    return np.bitwise_count(np.arange(1 << width, dtype=np.uint64)).astype(np.int64)


def product_weights(width: int, p: float) -> np.ndarray:
    """``P_p(x)`` for every ``x`` in index order."""
    k = popcounts(width)
    return np.exp(k * np.log(p) + (width - k) * np.log1p(-p))


def _as_table(f) -> np.ndarray:
    if isinstance(f, FunctionOracle):
        return truth_table(f)
    if isinstance(f, Circuit):
        return truth_table(from_circuit(f))
    return np.asarray(f, dtype=bool)


def _width(table: np.ndarray) -> int:
    return int(table.size).bit_length() - 1


def expectation_exact(f, p: float) -> float:
    """``E_p f`` by summing over all ``2^N`` inputs."""
    table = _as_table(f)
    width = _width(table)
    _check(width, p)
    return float(np.sum(product_weights(width, p)[table]))


def derivative_exact(f, p: float) -> float:
    """``d/dp E_p f`` from the closed-form sum over the cube."""
    table = _as_table(f)
    width = _width(table)
    _check(width, p)
    k = popcounts(width)
    w = product_weights(width, p)
    score = k / p - (width - k) / (1.0 - p)
    return float(np.sum((w * score)[table]))


def biased_transform(values: np.ndarray, p: float) -> np.ndarray:
    """Coefficients ``E_p[g chi_S]`` for a real function ``g`` given on the cube.

    Applies the 2x2 map ``[[1-p, p], [-s, s]]``, ``s = sqrt(p(1-p))``,
    along every coordinate (a biased Walsh-Hadamard butterfly).
    """
    v = np.array(values, dtype=np.float64)
    width = _width(v)
    s = np.sqrt(p * (1.0 - p))
    for i in range(width):
        v = v.reshape(-1, 2, 1 << i)
        lo, hi = v[:, 0, :].copy(), v[:, 1, :].copy()
        v[:, 0, :] = (1.0 - p) * lo + p * hi
        v[:, 1, :] = s * (hi - lo)
    return v.reshape(-1)


def influences_exact(f, p: float) -> np.ndarray:
    """``(I_i)_p f = p(1-p) P_p[f(x^{-i},1) != f(x^{-i},0)]`` for every i."""
    table = _as_table(f)
    width = _width(table)
    _check(width, p)
    w = product_weights(width, p)
    out = np.empty(width)
    for i in range(width):
        t = table.reshape(-1, 2, 1 << i)
        flips = t[:, 0, :] != t[:, 1, :]
        # weight of x^{-i} is P_p(x with x_i = 0) / (1 - p)
        out[i] = np.sum(w.reshape(-1, 2, 1 << i)[:, 0, :][flips]) / (1.0 - p)
    return p * (1.0 - p) * out


def is_monotone(f) -> bool:
    table = _as_table(f)
    for i in range(_width(table)):
        t = table.reshape(-1, 2, 1 << i)
        if np.any(t[:, 0, :] & ~t[:, 1, :]):
            return False
    return True


@dataclass
class SpectrumReport:
    p: float
    width: int
    coefficients: np.ndarray | dict
    influences: np.ndarray
    total_influence: float
    expectation: float
    derivative: float
    degree_weights: np.ndarray = field(repr=False)

    def coefficient(self, subset) -> float:
        mask = subset if isinstance(subset, (int, np.integer)) else sum(1 << i for i in subset)
        if isinstance(self.coefficients, dict):
            return float(self.coefficients.get(int(mask), 0.0))
        return float(self.coefficients[mask])

    def items(self):
        """``(mask, coefficient)`` pairs in mask order (nonzero only when sparse)."""
        if isinstance(self.coefficients, dict):
            return sorted(self.coefficients.items())
        return list(enumerate(self.coefficients.tolist()))

    @property
    def parseval_sum(self) -> float:
        return float(self.degree_weights.sum())

    @property
    def spectral_total_influence(self) -> float:
        """``sum_S |S| fhat(S)^2``."""
        return float(np.arange(self.width + 1) @ self.degree_weights)

    def tail_mass(self, k: int) -> float:
        """``sum_{|S| > k} fhat(S)^2``."""
        return float(self.degree_weights[k + 1:].sum()) if k < self.width else 0.0

    def to_text(self) -> str:
        buf = io.StringIO()
        buf.write(f"# p={self.p!r} width={self.width}\n")
        buf.write("subset_bitmask,coefficient\n")
        for mask, c in self.items():
            buf.write(f"{mask},{c!r}\n")
        return buf.getvalue()


def spectrum(f, p: float) -> SpectrumReport:
    table = _as_table(f)
    width = _width(table)
    _check(width, p)
    coeffs = biased_transform(table.astype(np.float64), p)
    degree_weights = np.bincount(popcounts(width), weights=coeffs ** 2, minlength=width + 1)
    infl = influences_exact(table, p)
    if width > DENSE_LIMIT:
        nz = np.flatnonzero(np.abs(coeffs) > 1e-15)
        stored = dict(zip(nz.tolist(), coeffs[nz].tolist()))
    else:
        stored = coeffs
    return SpectrumReport(
        p=p, width=width, coefficients=stored, influences=infl,
        total_influence=float(infl.sum()), expectation=expectation_exact(table, p),
        derivative=derivative_exact(table, p), degree_weights=degree_weights,
    )


@dataclass(frozen=True)
class RussoMargulis:
    lhs: float
    rhs: float
    monotone: bool

    @property
    def holds(self) -> bool:
        return self.lhs <= self.rhs + 1e-9


def russo_margulis_check(f, p: float) -> RussoMargulis:
    """Compare ``|d/dp E_p f|`` with ``I_p(f) / (p(1-p))``."""
    table = _as_table(f)
    lhs = abs(derivative_exact(table, p))
    rhs = float(influences_exact(table, p).sum()) / (p * (1.0 - p))
    mono = is_monotone(table) if _width(table) <= 12 else False
    return RussoMargulis(lhs=lhs, rhs=rhs, monotone=mono)


@dataclass(frozen=True)
class LMNTail:
    k: int
    tail_mass: float
    bound: float
    ratio: float
    violated: bool


def lmn_tail(c: Circuit, p: float, k: int, report: SpectrumReport | None = None) -> LMNTail:
    """Fourier tail above degree k against ``size * 2^(-p(1-p) k^(1/(depth+2)) / 5)``.

    The inequality holds only up to an unspecified universal constant, so a
    violation is flagged rather than raised.
    """
    m = c.measure()
    if report is None:
        report = spectrum(from_circuit(c), p)
    tail = report.tail_mass(k)
    bound = m.size * 2.0 ** (-p * (1 - p) * max(k, 0) ** (1.0 / (m.depth + 2)) / 5.0)
    ratio = tail / bound if bound > 0 else np.inf
    return LMNTail(k=k, tail_mass=tail, bound=bound, ratio=ratio, violated=tail > bound)
