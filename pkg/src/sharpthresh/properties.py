"""Boolean function oracles for the threshold experiments.

Every factory returns a :class:`FunctionOracle`; :func:`oracle_catalog`
maps short names to factories taking a size parameter.
"""
from __future__ import annotations

from typing import Callable

import numpy as np
from scipy.stats import binom

from . import graphs, twosat
from .constructions import iterated_tribes, iterated_tribes_expectation, tribes_expectation, tribes_width
from .oracle import FunctionOracle, from_circuit, from_truth_table


def majority(N: int) -> FunctionOracle:
    if N < 1 or N % 2 == 0:
        raise ValueError(f"majority is defined for odd N only, got {N}")
    half = N // 2

    def evaluate(x):
        return x.sum(axis=1) > half
    return FunctionOracle(
        name=f"maj{N}", width=N, evaluate=evaluate, monotone=True,
        expectation=lambda p: float(binom.sf(half, N, p)),
        sampler=lambda p, rng, count: _binomial_sampler(N, half, p, rng, count),
    )


def _binomial_sampler(N, half, p, rng, count):
    # symmetric functions only need the Hamming weight; uniforms keep the coupling
    return binom.ppf(rng.random(count), N, p) > half


def dictator(N: int = 1) -> FunctionOracle:
    return FunctionOracle(
        name=f"dictator{N}", width=N, evaluate=lambda x: x[:, 0].copy(),
        monotone=True, expectation=lambda p: float(p),
    )


def and_k(k: int) -> FunctionOracle:
    return FunctionOracle(
        name=f"and{k}", width=k, evaluate=lambda x: x.all(axis=1),
        monotone=True, expectation=lambda p: float(p) ** k,
    )


def or_k(k: int) -> FunctionOracle:
    return FunctionOracle(
        name=f"or{k}", width=k, evaluate=lambda x: x.any(axis=1),
        monotone=True, expectation=lambda p: 1.0 - (1.0 - float(p)) ** k,
    )


def parity(k: int) -> FunctionOracle:
    return FunctionOracle(
        name=f"parity{k}", width=k, evaluate=lambda x: (x.sum(axis=1) % 2).astype(bool),
        monotone=False, expectation=lambda p: (1.0 - (1.0 - 2.0 * float(p)) ** k) / 2.0,
    )


def tribes(N: int, p_target: float = 0.5) -> FunctionOracle:
    w = tribes_width(N, p_target)
    t = N // w

    def evaluate(x):
        return x[:, :t * w].reshape(len(x), t, w).all(axis=2).any(axis=1)

    def sampler(p, rng, count):
        # P(block fires) = p^w; only the block indicators matter
        out = np.empty(count, dtype=bool)
        step = max(1, (1 << 20) // t)
        for a in range(0, count, step):
            m = min(step, count - a)
            out[a:a + m] = (rng.random((m, t)) < p ** w).any(axis=1)
        return out
    return FunctionOracle(
        name=f"tribes{N}", width=N, evaluate=evaluate, monotone=True,
        expectation=lambda p: float(tribes_expectation(N, w, p)),
        sampler=sampler, meta={"block_width": w},
    )


def iterated_tribes_oracle(N: int, d: int) -> FunctionOracle:
    c = iterated_tribes(N, d)
    return from_circuit(
        c, name=f"itribes{N}_d{d}", monotone=True,
        expectation=lambda p: float(iterated_tribes_expectation(N, d, p)),
    )


def clique(n: int, k: int) -> FunctionOracle:
    """``[G contains a k-clique]`` on the ``C(n,2)`` edge bits of G."""
    if k == 3:
        return triangle(n)

    def evaluate(x):
        return np.array([graphs.has_k_clique(n, row, k) for row in x], dtype=bool)
    return FunctionOracle(name=f"clique{n}_{k}", width=graphs.num_edges(n),
                          evaluate=evaluate, monotone=True, meta={"n": n, "k": k})


def triangle(n: int) -> FunctionOracle:
    i, j = graphs.edge_pairs(n)

    def evaluate(x):
        a = np.zeros((len(x), n, n), dtype=np.float32)
        a[:, i, j] = x
        a[:, j, i] = x
        # some edge (i, j) with a common neighbour
        common = a @ a
        return np.any((common > 0) & (a > 0), axis=(1, 2))
    return FunctionOracle(name=f"triangle{n}", width=graphs.num_edges(n),
                          evaluate=evaluate, monotone=True, meta={"n": n, "k": 3})


def independent_set(n: int, k: int) -> FunctionOracle:
    """``[alpha(G) >= k]``, monotone decreasing in the edges."""
    def evaluate(x):
        return np.array([graphs.independence_number(n, row, target=k) >= k for row in x], dtype=bool)
    return FunctionOracle(name=f"indep{n}_{k}", width=graphs.num_edges(n), evaluate=evaluate,
                          monotone=True, increasing=False, meta={"n": n, "k": k})


def two_sat(n: int) -> FunctionOracle:
    """Satisfiability of the formula whose clauses are the 1-bits (decreasing)."""
    def evaluate(x):
        return twosat.satisfiable_batch(n, x)
    return FunctionOracle(
        name=f"twosat{n}", width=twosat.universe_size(n), evaluate=evaluate,
        monotone=True, increasing=False, sampler=twosat.CoupledSampler(n), meta={"n": n},
    )


def random_function(N: int, seed: int = 0) -> FunctionOracle:
    table = np.random.default_rng(seed).random(1 << N) < 0.5
    return from_truth_table(table, name=f"random{N}_{seed}", monotone=None)


def oracle_catalog() -> dict[str, Callable[..., FunctionOracle]]:
    """Name -> factory; each factory takes the size parameter first."""
    return dict(_CATALOG)


_CATALOG: dict[str, Callable[..., FunctionOracle]] = {
    "maj": majority,
    "dictator": dictator,
    "and": and_k,
    "or": or_k,
    "parity": parity,
    "tribes": tribes,
    "itribes": iterated_tribes_oracle,
    "clique": clique,
    "triangle": triangle,
    "indep": independent_set,
    "twosat": two_sat,
    "random": random_function,
}


def get_oracle(name: str, size: int, **params) -> FunctionOracle:
    try:
        factory = _CATALOG[name]
    except KeyError:
        raise KeyError(f"unknown oracle {name!r}; known: {', '.join(sorted(_CATALOG))}") from None
    return factory(size, **params)
