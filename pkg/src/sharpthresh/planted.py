"""Hidden subset recovery for the planted k-clique.

The observation is ``Y = S or X`` where S is the edge set of a uniformly
random k-vertex clique and X is a G(n, p) noise graph. Since every k-clique
of Y is equally likely to be the planted one, exact recovery succeeds iff
Y has a single k-clique.
"""
from __future__ import annotations

import csv
import io
import math
from dataclasses import dataclass, field
from typing import Sequence

import numpy as np
from scipy.special import gammaln, logsumexp

from . import graphs
from .thresholds import _map, chunk_rng, wilson_interval

MAX_N = 30
CLIQUE_CAP = 10**7


def _check_n(n: int):
    if n > MAX_N:
        raise ValueError(f"n={n} exceeds exact clique enumeration limit {MAX_N}")


def log_binom(n, k):
    return gammaln(np.asarray(n) + 1.0) - gammaln(np.asarray(k) + 1.0) - gammaln(np.asarray(n) - np.asarray(k) + 1.0)


@dataclass(frozen=True)
class PlantedInstance:
    n: int
    k: int
    p: float
    vertices: tuple[int, ...]
    S: np.ndarray
    X: np.ndarray
    seed: int | None = None

    @property
    def Y(self) -> np.ndarray:
        return self.S | self.X

    @property
    def planted_mask(self) -> int:
        return sum(1 << v for v in self.vertices)


def sample_instance(n: int, k: int, p: float, seed=None) -> PlantedInstance:
    """``seed`` may be an int or a ``numpy.random.Generator``."""
    if k > n:
        raise ValueError(f"k={k} exceeds n={n}")
    if not 0.0 <= p < 1.0:
        raise ValueError("p must lie in [0, 1)")
    rng = seed if isinstance(seed, np.random.Generator) else np.random.default_rng(seed)
    verts = tuple(sorted(rng.choice(n, size=k, replace=False).tolist()))
    X = graphs.gnp(n, p, rng)
    return PlantedInstance(n, k, p, verts, graphs.clique_edges(n, verts), X,
                           seed if isinstance(seed, int) else None)


def count_cliques(Y, n: int, k: int, cap: int = CLIQUE_CAP) -> int:
    _check_n(n)
    return int(graphs.count_k_cliques(graphs.adjacency_bitsets(n, Y), k, cap=cap).sum())


def count_cliques_by_overlap(Y, n: int, k: int, vertices: Sequence[int], cap: int = CLIQUE_CAP) -> np.ndarray:
    """``Z_l`` for ``l = 0..k``: k-cliques sharing exactly l vertices with the planted set."""
    _check_n(n)
    mask = sum(1 << v for v in vertices)
    return graphs.count_k_cliques(graphs.adjacency_bitsets(n, Y), k, planted=mask, cap=cap)


@dataclass(frozen=True)
class Recovery:
    estimate: tuple[int, ...]
    success: bool
    ambiguous: bool
    z: int | None                # None when the count overflowed


def map_recover(Y, n: int, k: int, truth: Sequence[int] | None = None, rng=None,
                cap: int = CLIQUE_CAP) -> Recovery:
    """Posterior draw: a uniformly random k-clique of Y.

    Success requires Y to have exactly one k-clique equal to ``truth``
    (when given). A count beyond ``cap`` is scored as an ambiguous failure.
    """
    _check_n(n)
    adj = graphs.adjacency_bitsets(n, Y)
    try:
        z = int(graphs.count_k_cliques(adj, k, cap=cap).sum())
    except graphs.CliqueOverflow:
        return Recovery((), False, True, None)
    if z == 0:
        raise ValueError("observation has no k-clique; planted instances always contain one")
    rng = np.random.default_rng(rng) if not isinstance(rng, np.random.Generator) else rng
    pick = int(rng.integers(z)) if z > 1 else 0
    for i, c in enumerate(graphs.iter_k_cliques(adj, k)):
        if i == pick:
            est = c
            break
    ok = z == 1 and (truth is None or tuple(sorted(truth)) == est)
    return Recovery(est, ok, z > 1, z)


def recovery_succeeds(Y, n: int, k: int) -> bool:
    """Uniqueness of the k-clique (the planted one is always present)."""
    try:
        return int(graphs.count_k_cliques(graphs.adjacency_bitsets(n, Y), k, cap=1).sum()) == 1
    except graphs.CliqueOverflow:
        return False


def p_it_analytic(n: int, k: int) -> float:
    """``C(n,k)^(-1/C(k,2))`` in log space."""
    if k < 2 or k > n:
        raise ValueError("need 2 <= k <= n")
    return float(math.exp(-float(log_binom(n, k)) / (k * (k - 1) / 2)))


def first_moment_terms(n: int, k: int, eps: float) -> np.ndarray:
    """Log of each summand, l = 0..k-1, of the first-moment bound."""
    if not 0.0 < eps < 1.0:
        raise ValueError("eps must lie in (0, 1)")
    if k < 2 or k > n:
        raise ValueError("need 2 <= k <= n")
    ell = np.arange(k)
    e_kk = k * (k - 1) / 2
    e_ll = ell * (ell - 1) / 2
    with np.errstate(divide="ignore"):
        lc = log_binom(k, ell) + np.where(n - k >= k - ell, log_binom(n - k, np.minimum(k - ell, n - k)), -np.inf)
        lc = np.where(n - k >= k - ell, lc, -np.inf)
    return (e_kk - e_ll) * math.log1p(-eps) + lc + (-1.0 + ell ** 2 / k ** 2) * float(log_binom(n, k))


def first_moment_bound(n: int, k: int, eps: float) -> float:
    """Upper bound on the expected number of non-planted k-cliques at ``p = (1-eps) p_it``."""
    return float(np.exp(logsumexp(first_moment_terms(n, k, eps))))


def expected_overlap_counts(n: int, k: int, p: float) -> np.ndarray:
    """Exact ``E[Z_l]`` under the planted law, l = 0..k."""
    ell = np.arange(k + 1)
    e = k * (k - 1) / 2 - ell * (ell - 1) / 2
    valid = n - k >= k - ell
    lc = np.where(valid, log_binom(k, ell) + log_binom(n - k, np.where(valid, k - ell, 0)), -np.inf)
    return np.exp(lc + e * math.log(p))


def null_clique_mean(n: int, k: int, p: float) -> float:
    return float(np.exp(float(log_binom(n, k)) + k * (k - 1) / 2 * math.log(p)))


def likelihood_ratio(Y, n: int, k: int, p: float) -> float:
    """Planted-to-null likelihood of Y: ``Z(Y) / (C(n,k) p^C(k,2))``."""
    z = count_cliques(Y, n, k)
    if z == 0:
        return 0.0
    return float(math.exp(math.log(z) - float(log_binom(n, k)) - k * (k - 1) / 2 * math.log(p)))


# -- All-or-Nothing curves --------------------------------------------------

AUTO_FACTORS = (0.2, 0.4, 0.6, 0.8, 1.0, 1.2, 1.5, 2.0)


def auto_grid(n: int, k: int) -> list[float]:
    p_it = p_it_analytic(n, k)
    grid = sorted({round(min(f * p_it, 0.98), 12) for f in AUTO_FACTORS} | {0.99})
    return grid


@dataclass
class AoNCurve:
    n: int
    k: int
    p_grid: list[float]
    success: list[float]
    ci: list[tuple[float, float]]
    p_it_analytic: float
    trials: int
    seed: int
    meta: dict = field(default_factory=dict)

    def crosses(self, hi: float = 0.9, lo: float = 0.1) -> bool:
        """Some grid point reaches ``hi`` before a later one drops to ``lo``."""
        first_hi = next((i for i, s in enumerate(self.success) if s >= hi), None)
        return first_hi is not None and any(s <= lo for s in self.success[first_hi + 1:])

    def to_csv(self) -> str:
        buf = io.StringIO()
        w = csv.writer(buf, lineterminator="\n")
        w.writerow(["n", "k", "p", "success", "ci_lo", "ci_hi", "trials", "p_it_analytic"])
        for p, s, (lo, hi) in zip(self.p_grid, self.success, self.ci):
            w.writerow([self.n, self.k, repr(p), repr(s), repr(lo), repr(hi), self.trials, repr(self.p_it_analytic)])
        return buf.getvalue()


def aon_curve(n: int, k: int, p_grid, trials: int = 300, seed: int = 0, jobs: int = 1) -> AoNCurve:
    """Exact-recovery frequency at each p; trial t at grid point i uses stream ``(seed, i, t)``."""
    _check_n(n)
    p_grid = list(map(float, p_grid))
    if any(b <= a for a, b in zip(p_grid, p_grid[1:])):
        raise ValueError("p_grid must be strictly increasing")

    def point(i):
        p = p_grid[i]
        wins = 0
        for t in range(trials):
            rng = np.random.default_rng(np.random.SeedSequence(seed, spawn_key=(i, t)))
            inst = sample_instance(n, k, p, rng)
            wins += recovery_succeeds(inst.Y, n, k)
        return wins
    wins = _map(point, range(len(p_grid)), jobs)
    return AoNCurve(n, k, p_grid, [w / trials for w in wins],
                    [wilson_interval(w, trials) for w in wins], p_it_analytic(n, k), trials, seed)


def null_statistics(n: int, k: int, p: float, draws: int, seed: int = 0, jobs: int = 1) -> np.ndarray:
    """Clique counts ``Z`` of ``draws`` null graphs G(n, p)."""
    def run(task):
        i, m = task
        rng = chunk_rng(seed, i)
        return [count_cliques(graphs.gnp(n, p, rng), n, k) for _ in range(m)]
    tasks = [(i, min(256, draws - 256 * i)) for i in range(-(-draws // 256))]
    return np.array([z for part in _map(run, tasks, jobs) for z in part], dtype=np.float64)


def planted_overlap_statistics(n: int, k: int, p: float, draws: int, seed: int = 0,
                               jobs: int = 1) -> np.ndarray:
    """Rows ``Z_0..Z_k`` for ``draws`` planted instances."""
    def run(task):
        i, m = task
        rng = chunk_rng(seed, i)
        out = []
        for _ in range(m):
            inst = sample_instance(n, k, p, rng)
            out.append(count_cliques_by_overlap(inst.Y, n, k, inst.vertices))
        return out
    tasks = [(i, min(256, draws - 256 * i)) for i in range(-(-draws // 256))]
    return np.array([z for part in _map(run, tasks, jobs) for z in part], dtype=np.float64)
