"""Explicit circuit constructions.

All builders return :class:`~sharpthresh.circuit.Circuit` objects in
input-negation normal form: debiasing layer, tribes and iterated tribes,
input negation, the equality augmentation, depth-2 circuits for monotone
graph-inclusion properties, and the depth-4 estimator for graph properties
without a sharp threshold.
"""
from __future__ import annotations

import functools
import math
import warnings
from dataclasses import dataclass, field
from itertools import combinations, permutations
from typing import Sequence

import numpy as np

from . import graphs
from .circuit import Circuit, CircuitBuilder, compose, dual, negate_inputs

__all__ = [
    "DebiasSpec", "debias_layer", "tribes", "tribes_width", "tribes_expectation",
    "iterated_tribes", "iterated_tribes_expectation", "negate_inputs", "equality_augment",
    "monotone_property_circuit", "placements", "ConverseSpec", "converse_estimator",
    "PRESETS", "parse_minimal_elements", "format_minimal_elements",
]


# -- debiasing layer -------------------------------------------------------

@dataclass(frozen=True)
class DebiasSpec:
    """Parameters of the AND-block debiasing layer.

    ``block_width = ceil(log2(1/p0))`` and ``p1 = p0**(1/block_width)`` so
    that an AND of ``block_width`` bits of bias ``p1`` has bias ``p0``. With
    ``gamma`` set, ``r`` solves ``(p1 - r)**block_width = p0 * (1 - gamma)``.
    """

    N: int
    p0: float
    gamma: float | None = None

    def __post_init__(self):
        if not 0.0 < self.p0 <= 0.5:
            raise ValueError(f"p0 must lie in (0, 1/2], got {self.p0}")
        if self.N < 1:
            raise ValueError("N must be >= 1")
        if self.gamma is not None and not 0.0 < self.gamma < 1.0:
            raise ValueError("gamma must lie in (0, 1)")

    @property
    def block_width(self) -> int:
        # guard against log2 landing a hair above an integer
        return max(1, math.ceil(math.log2(1.0 / self.p0) - 1e-12))

    @property
    def p1(self) -> float:
        return self.p0 ** (1.0 / self.block_width)

    @property
    def r(self) -> float | None:
        if self.gamma is None:
            return None
        return self.p1 - (self.p0 * (1.0 - self.gamma)) ** (1.0 / self.block_width)


def debias_layer(spec: DebiasSpec) -> Circuit:
    """Depth-1 circuit: output i is the AND of input block i."""
    w = spec.block_width
    b = CircuitBuilder(spec.N * w)
    outs = [b.and_(b.input(i * w + j) for j in range(w)) for i in range(spec.N)]
    return b.build(outs)


# -- tribes ----------------------------------------------------------------

def tribes_expectation(N: int, w: int, p):
    p = np.asarray(p, dtype=float)
    return 1.0 - (1.0 - p ** w) ** (N // w)


@functools.lru_cache(maxsize=256)
def tribes_width(N: int, p_target: float = 0.5) -> int:
    """Block width minimising ``|E_p[tribes] - 1/2|`` at ``p = p_target``."""
    w = np.arange(1, N + 1)
    errs = np.abs(1.0 - (1.0 - p_target ** w) ** (N // w) - 0.5)
    return int(np.argmin(errs)) + 1


def tribes(N: int, p_target: float = 0.5) -> Circuit:
    """OR of ``N // w`` disjoint ANDs of width ``w``; leftover inputs unused."""
    if N < 4:
        raise ValueError("tribes needs N >= 4")
    w = tribes_width(N, p_target)
    b = CircuitBuilder(N)
    ands = [b.and_(b.input(t * w + j) for j in range(w)) for t in range(N // w)]
    return b.build([b.or_(ands)])


def _block_size(N: int, d: int) -> int:
    m = int(round(N ** (2.0 / d)))
    while m ** (d // 2) > N:
        m -= 1
    while (m + 1) ** (d // 2) <= N:
        m += 1
    return m


def iterated_tribes(N: int, d: int) -> Circuit:
    """``d/2``-fold composition of tribes on ``m = floor(N^(2/d))`` bits (depth d)."""
    if d < 2 or d % 2:
        raise ValueError("d must be an even integer >= 2")
    m = _block_size(N, d)
    if m < 4:
        raise ValueError(f"block size N^(2/d) = {m} is below 4")
    t = tribes(m)
    levels = d // 2
    width = m ** levels
    b = CircuitBuilder(N)
    sigs = [b.input(i) for i in range(width)]
    for _ in range(levels):
        sigs = [b.embed(t, sigs[g * m:(g + 1) * m])[0] for g in range(len(sigs) // m)]
    return b.build(sigs)


def iterated_tribes_expectation(N: int, d: int, p):
    m = _block_size(N, d)
    w = tribes_width(m)
    q = np.asarray(p, dtype=float)
    for _ in range(d // 2):
        q = tribes_expectation(m, w, q)
    return q


# -- equality augmentation --------------------------------------------------

def equality_augment(c: Circuit) -> Circuit:
    """Circuit on ``(X, S)`` that is 1 iff ``c(X) == S`` bitwise.

    Inputs ``0..N_in-1`` feed ``c``; the next ``N`` inputs are ``S``. The
    complement of each output comes from the De Morgan dual of ``c``.
    """
    n_out = c.num_outputs
    n_in = c.input_width
    b = CircuitBuilder(n_in + n_out)
    xs = [b.input(i) for i in range(n_in)]
    nxs = [b.neg(i) for i in range(n_in)]
    pos = b.embed(c, xs, nxs)
    neg = b.embed(dual(c), xs, nxs)
    eq = []
    for i in range(n_out):
        s, ns = b.input(n_in + i), b.neg(n_in + i)
        eq.append(b.or_([b.and_([pos[i], s]), b.and_([neg[i], ns])]))
    return b.build([b.and_(eq)])


# -- monotone graph properties ---------------------------------------------

Graph = Sequence[tuple[int, int]]

PRESETS: dict[str, list[list[tuple[int, int]]]] = {
    "edge": [[(0, 1)]],
    "triangle": [[(0, 1), (1, 2), (0, 2)]],
    "k4": [[(a, b) for a, b in combinations(range(4), 2)]],
    "path2": [[(0, 1), (1, 2)]],
}


def _canon(H: Graph) -> tuple[int, list[tuple[int, int]]]:
    verts = sorted({v for e in H for v in e})
    relabel = {v: i for i, v in enumerate(verts)}
    edges = sorted({tuple(sorted((relabel[a], relabel[b]))) for a, b in H})
    if any(a == b for a, b in edges):
        raise ValueError("self-loops are not allowed in minimal elements")
    return len(verts), edges


def placements(H: Graph, n: int) -> list[tuple[int, ...]]:
    """Distinct edge-index sets of copies of ``H`` inside ``K_n``."""
    v, edges = _canon(H)
    if not edges:
        raise ValueError("minimal elements must have at least one edge")
    if v > n:
        return []
    patterns = sorted({tuple(sorted(tuple(sorted((pi[a], pi[b]))) for a, b in edges))
                       for pi in permutations(range(v))})
    out = set()
    for subset in combinations(range(n), v):
        for pat in patterns:
            out.add(tuple(sorted(graphs.edge_index(n, subset[a], subset[b]) for a, b in pat)))
    return sorted(out)


class EmptyPropertyWarning(UserWarning):
    pass


def _property_terms(b: CircuitBuilder, minimal_elements, n: int, cache: dict) -> list[int]:
    terms: list[int] = []
    for H in minimal_elements:
        key = tuple(_canon(H)[1])
        if key not in cache:
            cache[key] = [b.and_(b.input(e) for e in pl) for pl in placements(H, n)]
        terms.extend(cache[key])
    return sorted(set(terms))


def monotone_property_circuit(minimal_elements, n: int) -> Circuit:
    """OR over all placements of each minimal element of the AND of its edges."""
    N = graphs.num_edges(n)
    b = CircuitBuilder(N)
    terms = _property_terms(b, minimal_elements, n, {})
    if not terms:
        warnings.warn("no placements: property circuit is constant 0", EmptyPropertyWarning)
        return b.build([b.const(0)])
    return b.build([b.or_(terms)])


def parse_minimal_elements(text: str) -> list[list[tuple[int, int]]]:
    """One graph per line as ``u-v`` edge tokens over labels ``0..v-1``; ``#`` comments."""
    out = []
    for lineno, raw in enumerate(text.splitlines(), 1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        g = []
        for tok in line.split():
            try:
                a, b = tok.split("-")
                g.append((int(a), int(b)))
            except ValueError:
                raise ValueError(f"line {lineno}: bad edge token {tok!r}") from None
        out.append(g)
    return out


def format_minimal_elements(elements) -> str:
    return "".join(" ".join(f"{a}-{b}" for a, b in g) + "\n" for g in elements)


# -- converse estimator ----------------------------------------------------

MAX_PROBE_BLOCKS = 20


@dataclass
class ConverseSpec:
    """Parameters of the depth-4 estimator for a graph property.

    ``minimal_element_lists[i]`` lists the minimal graphs of ``g_i``
    (one list per grid point ``q_i``). ``K`` defaults to ``floor(1/p_c)``.
    The interval for ``g_i`` is ``(b(q_i) - C0, b(q_{i+1}) + C0)``, with the
    last grid point reusing the final gap. With ``open_ends`` the first
    interval extends down to 0 and the last up to 1.
    """

    n: int
    p_c: float
    S_blocks: int
    q_points: Sequence[float]
    minimal_element_lists: Sequence
    K: int | None = None
    C0: float | None = None
    open_ends: bool = True
    intervals: list[tuple[float, float]] | None = field(default=None)

    def __post_init__(self):
        if self.K is None:
            self.K = int(math.floor(1.0 / self.p_c))
        q = np.asarray(self.q_points, dtype=float)
        if q.ndim != 1 or q.size < 2 or np.any(np.diff(q) <= 0):
            raise ValueError("q_points must be a strictly increasing list of >= 2 values")
        if len(self.minimal_element_lists) != q.size:
            raise ValueError("need one minimal-element list per grid point")
        if self.C0 is None:
            bq = self.b(q)
            c0 = float(np.min(np.diff(bq))) / 4.0
            self.C0 = min(c0, float(bq[0]) / 2.0 * (1 - 1e-9))
        if self.intervals is None:
            self.intervals = self._default_intervals()

    @property
    def N(self) -> int:
        return graphs.num_edges(self.n)

    @property
    def M(self) -> int:
        return len(self.q_points) - 1

    def b(self, p):
        """Bias of an OR of K bits of bias p."""
        return 1.0 - (1.0 - np.asarray(p, dtype=float)) ** self.K

    def _default_intervals(self):
        bq = self.b(np.asarray(self.q_points))
        out = []
        for i in range(self.M + 1):
            j = min(i + 1, self.M)
            out.append((float(bq[i] - self.C0), float(bq[j] + self.C0)))
        if self.open_ends:
            out[0] = (-math.inf, out[0][1])
            out[-1] = (out[-1][0], math.inf)
        return out

    def selected(self, count: int) -> list[int]:
        """Indices i with ``count / S_blocks`` inside interval i."""
        x = count / self.S_blocks
        return [i for i, (lo, hi) in enumerate(self.intervals) if lo < x < hi]

    def validate(self):
        if self.K < 1:
            raise ValueError("K must be >= 1")
        if self.S_blocks < 1:
            raise ValueError("S_blocks must be >= 1")
        if self.S_blocks * self.K > self.N:
            raise ValueError(f"probe reads S*K = {self.S_blocks * self.K} > N = {self.N} bits")
        if self.S_blocks > MAX_PROBE_BLOCKS:
            raise ValueError(f"S_blocks > {MAX_PROBE_BLOCKS} would need 2^S count gates")
        if self.S_blocks >= math.log2(self.N):
            raise ValueError(f"S_blocks must be below log2 N = {math.log2(self.N):.2f}")
        if not 0.0 < self.C0:
            raise ValueError("C0 must be positive")
        for H in (H for lst in self.minimal_element_lists for H in lst):
            _canon(H)
        # the union of intervals must cover [b(q_0) - C0, b(q_M) + C0]
        bq = self.b(np.asarray(self.q_points))
        lo_need, hi_need = float(bq[0] - self.C0), float(bq[-1] + self.C0)
        reach = lo_need
        for lo, hi in sorted(self.intervals):
            if lo > reach + 1e-15 and lo > lo_need:
                break
            reach = max(reach, hi)
        if reach < hi_need or min(lo for lo, _ in self.intervals) > lo_need:
            raise ValueError("intervals do not cover [b(q_0) - C0, b(q_M) + C0]")


def converse_estimator(spec: ConverseSpec) -> Circuit:
    """Depth-4 circuit choosing among the ``g_i`` by a probe of the first ``S*K`` bits.

    Layer 1 holds the ORs of the S probe blocks and, for each block, the AND
    of its negated bits (the block's complement), plus the placement ANDs of
    every ``g_i``. Layer 2 has one AND per configuration of the S block bits.
    Layer 3 has, for each count k, the OR of the configurations whose count
    differs from k together with the placement terms of every ``g_i`` whose
    interval contains ``k/S``; it is 1 iff ``Q != k`` or some selected
    ``g_i`` fires. Layer 4 is the AND over k of those gates, which equals
    the OR over selected ``g_i`` at the actual count ``Q``.
    """
    spec.validate()
    S, K = spec.S_blocks, spec.K
    b = CircuitBuilder(spec.N)
    block_or = [b.or_(b.input(m * K + j) for j in range(K)) for m in range(S)]
    block_nor = [b.and_(b.neg(m * K + j) for j in range(K)) for m in range(S)]
    cache: dict = {}
    terms = [_property_terms(b, lst, spec.n, cache) for lst in spec.minimal_element_lists]

    configs_by_count: list[list[int]] = [[] for _ in range(S + 1)]
    for sigma in range(1 << S):
        lits = [block_or[m] if (sigma >> m) & 1 else block_nor[m] for m in range(S)]
        configs_by_count[sigma.bit_count()].append(b.and_(lits))

    count_gates = []
    for k in range(S + 1):
        others = [g for kk in range(S + 1) if kk != k for g in configs_by_count[kk]]
        chosen = sorted({t for i in spec.selected(k) for t in terms[i]})
        count_gates.append(b.or_(others + chosen))
    return b.build([b.and_(count_gates)])


def converse_reference(spec: ConverseSpec, x: np.ndarray, g_values: np.ndarray) -> np.ndarray:
    """Direct evaluation of the estimator's semantics (test oracle).

    ``g_values[:, i]`` holds ``g_i`` on each row of ``x``.
    """
    S, K = spec.S_blocks, spec.K
    probe = x[:, :S * K].reshape(len(x), S, K).any(axis=2)
    q = probe.sum(axis=1)
    out = np.zeros(len(x), dtype=bool)
    for r, count in enumerate(q.tolist()):
        sel = spec.selected(count)
        out[r] = bool(sel) and bool(g_values[r, sel].any())
    return out


def compose_debias(c: Circuit, p0: float) -> Circuit:
    """``c`` applied after a debiasing layer on its inputs."""
    return compose(c, debias_layer(DebiasSpec(c.input_width, p0)))

