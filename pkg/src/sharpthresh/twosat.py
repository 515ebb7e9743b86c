"""Random 2-SAT as a Boolean function of clause-indicator bits.

Literals are coded internally as ``2*v`` (``x_v``) and ``2*v + 1``
(``not x_v``) for ``v = 0..n-1``; the public API uses signed 1-based
integers (``+3`` is ``x_3``, ``-3`` its negation). The clause universe is
every unordered pair of strictly distinct, non-complementary literals,
``2n(n-1)`` clauses, ordered lexicographically by ``(a, b)`` with ``a < b``.
"""
from __future__ import annotations

from dataclasses import dataclass
from functools import lru_cache

import numpy as np
from scipy.sparse import csr_matrix
from scipy.sparse.csgraph import connected_components
from scipy.stats import binom


def universe_size(n: int) -> int:
    return 2 * n * (n - 1)


def _code(n: int, lit: int) -> int:
    v = abs(int(lit))
    if lit == 0 or v > n:
        raise ValueError(f"literal {lit} out of range for n={n}")
    return 2 * (v - 1) + (lit < 0)


def _signed(code: int) -> int:
    v = code // 2 + 1
    return -v if code & 1 else v


@lru_cache(maxsize=32)
def _row_starts(n: int) -> np.ndarray:
    """Index of the first clause whose smaller literal code is ``a``."""
    a = np.arange(2 * n)
    per_row = (2 * n - a - 1) - (a % 2 == 0)
    starts = np.zeros(2 * n + 1, dtype=np.int64)
    np.cumsum(per_row, out=starts[1:])
    starts.setflags(write=False)
    return starts


def _pair_index(n: int, a, b):
    a, b = np.minimum(a, b), np.maximum(a, b)
    return _row_starts(n)[a] + (b - a - 1) - (a % 2 == 0)


def _pair_unindex(n: int, idx):
    idx = np.asarray(idx, dtype=np.int64)
    starts = _row_starts(n)
    a = np.searchsorted(starts, idx, side="right") - 1
    b = a + 1 + (idx - starts[a]) + (a % 2 == 0)
    return a, b


def clause_index(n: int, pair) -> int:
    """Index of the clause ``(l1 or l2)`` given as signed literals."""
    l1, l2 = pair
    a, b = _code(n, l1), _code(n, l2)
    if a == b or a ^ 1 == b:
        raise ValueError(f"clause {pair} needs strictly distinct, non-complementary literals")
    return int(_pair_index(n, a, b))


def clause_unindex(n: int, index: int) -> tuple[int, int]:
    if not 0 <= index < universe_size(n):
        raise ValueError(f"clause index {index} out of range for n={n}")
    a, b = _pair_unindex(n, index)
    return _signed(int(a)), _signed(int(b))


@dataclass(frozen=True)
class TwoSatFormula:
    n: int
    clause_bits: np.ndarray

    @classmethod
    def from_clauses(cls, n: int, clauses) -> "TwoSatFormula":
        bits = np.zeros(universe_size(n), dtype=bool)
        for c in clauses:
            bits[clause_index(n, c)] = True
        return cls(n, bits)

    def clauses(self) -> list[tuple[int, int]]:
        return [clause_unindex(self.n, int(i)) for i in np.flatnonzero(self.clause_bits)]

    def literal_pairs(self) -> tuple[np.ndarray, np.ndarray]:
        return _pair_unindex(self.n, np.flatnonzero(self.clause_bits))


def _unsat_mask(n: int, a_list, b_list) -> np.ndarray:
    """Satisfiability of many formulas at once via one block-diagonal implication graph."""
    m = len(a_list)
    nodes = 2 * n
    sizes = np.array([len(a) for a in a_list], dtype=np.int64)
    if sizes.sum() == 0:
        return np.zeros(m, dtype=bool)
    offset = np.repeat(np.arange(m, dtype=np.int64) * nodes, sizes)
    a = np.concatenate(a_list).astype(np.int64) + offset
    b = np.concatenate(b_list).astype(np.int64) + offset
    # (a or b) gives not a -> b and not b -> a; complement flips the low bit
    src = np.concatenate([a ^ 1, b ^ 1])
    dst = np.concatenate([b, a])
    # canonical CSR built directly: one sort of (src, dst) keys, duplicates dropped
    size = m * nodes
    key = src * size + dst
    key.sort()
    key = key[np.concatenate([[True], key[1:] != key[:-1]])]
    src, dst = np.divmod(key, size)
    indptr = np.zeros(size + 1, dtype=np.int32)
    np.cumsum(np.bincount(src, minlength=size), out=indptr[1:])
    g = csr_matrix((np.ones(dst.size, dtype=np.int8), dst.astype(np.int32), indptr),
                   shape=(size, size))
    g.has_sorted_indices = True
    g.has_canonical_format = True
    _, labels = connected_components(g, directed=True, connection="strong")
    labels = labels.reshape(m, n, 2)
    return np.any(labels[:, :, 0] == labels[:, :, 1], axis=1)


def satisfiable_pairs(n: int, a, b) -> bool:
    return not _unsat_mask(n, [np.asarray(a)], [np.asarray(b)])[0]


def two_sat_satisfiable(formula: TwoSatFormula) -> bool:
    """Unsatisfiable iff some ``x`` and ``not x`` share a strongly connected component."""
    a, b = formula.literal_pairs()
    return satisfiable_pairs(formula.n, a, b)


def satisfiable_batch(n: int, clause_bits: np.ndarray) -> np.ndarray:
    rows = [np.flatnonzero(r) for r in np.asarray(clause_bits, dtype=bool)]
    pairs = [_pair_unindex(n, r) for r in rows]
    return ~_unsat_mask(n, [p[0] for p in pairs], [p[1] for p in pairs])


def brute_force_satisfiable(n: int, clauses) -> bool:
    """Try all ``2^n`` assignments (test oracle; small n only)."""
    codes = [(_code(n, x), _code(n, y)) for x, y in clauses]
    for mask in range(1 << n):
        def true(c):
            return bool((mask >> (c // 2)) & 1) != bool(c & 1)
        if all(true(a) or true(b) for a, b in codes):
            return True
    return False


# -- coupled random formulas ----------------------------------------------

_CHUNK = 256


def _distinct_prefix(rng: np.random.Generator, universe: int, count: int) -> np.ndarray:
    """First ``count`` distinct values of an i.i.d. uniform stream (a uniform random subset).

    The stream is consumed in fixed chunks, so a longer prefix always
    extends a shorter one.
    """
    chunks = -(-count // _CHUNK)
    stream = rng.integers(0, universe, size=chunks * _CHUNK)
    while True:
        _, first = np.unique(stream, return_index=True)
        if first.size >= count:
            break
        stream = np.concatenate([stream, rng.integers(0, universe, size=_CHUNK)])
    first.sort()
    return stream[first[:count]]


def _trial_draws(rng: np.random.Generator, count: int):
    """Per-trial ``(V_t, stream seed)`` drawn in fixed blocks so that prefixes agree."""
    blocks = -(-count // _CHUNK)
    v = np.empty(blocks * _CHUNK)
    seeds = np.empty(blocks * _CHUNK, dtype=np.int64)
    for i in range(blocks):
        sl = slice(i * _CHUNK, (i + 1) * _CHUNK)
        v[sl] = rng.random(_CHUNK)
        seeds[sl] = rng.integers(0, 2**63 - 1, size=_CHUNK)
    return v[:count], seeds[:count]


class CoupledSampler:
    """Sampler for ``f = SAT`` under ``P_p`` with monotone coupling across ``p``.

    Trial t draws a uniform ``V_t`` and its own clause stream; at bias p the
    formula is the first ``M_t(p) = F^{-1}_{Bin(N,p)}(V_t)`` distinct clauses
    of the stream. This has the exact ``P_p`` law and is monotone in p per
    trial, so each trial is summarised by its critical count ``m*_t`` (the
    shortest unsatisfiable prefix) and ``f_t(p) = [M_t(p) < m*_t]``. Critical
    counts are memoised per random stream, which makes repeated evaluation
    at many biases (bisection, sweeps) cheap.
    """

    def __init__(self, n: int, cache_size: int = 64):
        self.n = n
        self.universe = universe_size(n)
        self.cache_size = cache_size
        self._cache: dict = {}

    def __call__(self, p: float, rng: np.random.Generator, count: int) -> np.ndarray:
        key = repr(rng.bit_generator.state)
        v, seeds = _trial_draws(rng, count)
        crit = self._cache.get(key)
        if crit is None or crit.size < count:
            done = 0 if crit is None else crit.size
            extra = self.critical_counts(seeds[done:].tolist())
            crit = extra if crit is None else np.concatenate([crit, extra])
            if len(self._cache) >= self.cache_size:
                self._cache.pop(next(iter(self._cache)))
            self._cache[key] = crit
        m = binom.ppf(v, self.universe, p).astype(np.int64)
        return m < crit[:count]

    def _unsat(self, prefixes, lengths) -> np.ndarray:
        a = [prefixes[i][0][:m] for i, m in enumerate(lengths)]
        b = [prefixes[i][1][:m] for i, m in enumerate(lengths)]
        return _unsat_mask(self.n, a, b)

    def _prefixes(self, seeds, lengths):
        out = []
        for s, m in zip(seeds, lengths):
            out.append(_pair_unindex(self.n, _distinct_prefix(np.random.default_rng(s), self.universe, int(m))))
        return out

    def critical_counts(self, seeds) -> np.ndarray:
        """Shortest unsatisfiable prefix length for each trial stream."""
        seeds = list(seeds)
        t = len(seeds)
        if t == 0:
            return np.zeros(0, dtype=np.int64)
        if self.n < 2:
            return np.full(t, np.iinfo(np.int64).max)
        lo = np.zeros(t, dtype=np.int64)          # satisfiable prefix length
        hi = np.full(t, -1, dtype=np.int64)       # unsatisfiable prefix length
        probe = np.full(t, min(max(4, 2 * self.n), self.universe), dtype=np.int64)
        prefixes: list = [None] * t
        while True:
            open_ = np.flatnonzero(hi < 0)
            if open_.size == 0:
                break
            for i, pre in zip(open_, self._prefixes([seeds[i] for i in open_], probe[open_])):
                prefixes[i] = pre
            uns = self._unsat([prefixes[i] for i in open_], probe[open_])
            hi[open_[uns]] = probe[open_[uns]]
            sat = open_[~uns]
            lo[sat] = probe[sat]
            if np.any(probe[sat] >= self.universe):
                # the full universe is always unsatisfiable for n >= 2
                raise RuntimeError("full clause universe reported satisfiable")
            probe[sat] = np.minimum(2 * probe[sat], self.universe)
        while True:
            open_ = np.flatnonzero(hi - lo > 1)
            if open_.size == 0:
                return hi
            mid = (lo[open_] + hi[open_]) // 2
            uns = self._unsat([prefixes[i] for i in open_], mid)
            hi[open_[uns]] = mid[uns]
            lo[open_[~uns]] = mid[~uns]


def direct_sample(n: int, p: float, rng: np.random.Generator, count: int) -> np.ndarray:
    """Same draws as ``CoupledSampler`` but evaluated without memoisation."""
    universe = universe_size(n)
    v, seeds = _trial_draws(rng, count)
    m = binom.ppf(v, universe, p).astype(np.int64)
    idx = [_distinct_prefix(np.random.default_rng(s), universe, mt)
           for mt, s in zip(m.tolist(), seeds.tolist())]
    a, b = _pair_unindex(n, np.concatenate(idx))
    cuts = np.cumsum(m)[:-1]
    return ~_unsat_mask(n, np.split(a, cuts), np.split(b, cuts))


# -- text format (DIMACS CNF) --------------------------------------------

def format_dimacs(formula: TwoSatFormula) -> str:
    cl = formula.clauses()
    lines = [f"p cnf {formula.n} {len(cl)}"] + [f"{a} {b} 0" for a, b in cl]
    return "\n".join(lines) + "\n"


def parse_dimacs(text: str) -> TwoSatFormula:
    n = None
    clauses = []
    for lineno, raw in enumerate(text.splitlines(), 1):
        line = raw.strip()
        if not line or line.startswith("c"):
            continue
        if line.startswith("p"):
            parts = line.split()
            if len(parts) != 4 or parts[1] != "cnf":
                raise ValueError(f"line {lineno}: bad header {raw!r}")
            n = int(parts[2])
            continue
        lits = [int(t) for t in line.split()]
        if not lits or lits[-1] != 0 or len(lits) != 3:
            raise ValueError(f"line {lineno}: expected 'l1 l2 0', got {raw!r}")
        clauses.append((lits[0], lits[1]))
    if n is None:
        raise ValueError("missing 'p cnf' header")
    return TwoSatFormula.from_clauses(n, clauses)
