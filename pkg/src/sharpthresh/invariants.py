"""Built-in invariant suites, run by ``sharpthresh verify``.

Each check returns ``(name, ok, detail)``. They are small exhaustive or
closed-form checks, quick enough to run on every invocation.
"""
from __future__ import annotations

import itertools
import math

import numpy as np

from . import bounds, constructions, fourier, properties, twosat
from .circuit import compose, deserialize, identity, random_layered, serialize
from .constructions import DebiasSpec, debias_layer

Check = tuple[str, bool, str]


def debias_pushforward(N: int, p0: float, bias: float) -> float:
    """Total-variation distance between the exact output law and ``Bern(q)^N``.

    Inputs have bias ``bias``; ``q = bias ** block_width``.
    """
    spec = DebiasSpec(N, p0)
    c = debias_layer(spec)
    width = c.input_width
    x = fourier.cube(width)
    weights = fourier.product_weights(width, bias)
    out = c.evaluate_batch(x)
    idx = out.astype(np.int64) @ (1 << np.arange(N))
    law = np.bincount(idx, weights=weights, minlength=1 << N)
    target = fourier.product_weights(N, bias ** spec.block_width)
    return 0.5 * float(np.abs(law - target).sum())


def check_debias() -> list[Check]:
    out = []
    for N, p0 in itertools.product((1, 2, 3), (0.5, 0.25, 0.1)):
        spec = DebiasSpec(N, p0, gamma=1e-3)
        tv = debias_pushforward(N, p0, spec.p1)
        # perturbed bias: outputs must be Bern(p0 (1 - gamma))
        q = (spec.p1 - spec.r) ** spec.block_width
        out.append((f"debias N={N} p0={p0}", tv < 1e-12 and abs(q - p0 * (1 - 1e-3)) < 1e-12,
                    f"tv={tv:.2e}"))
    return out


def check_circuits() -> list[Check]:
    out = []
    a = random_layered(3, [4, 3], 2, n_outputs=3, seed=1)
    b = random_layered(3, [5, 3], 2, n_outputs=3, seed=2)
    c = random_layered(3, [4, 2, 1], 2, n_outputs=1, seed=3)
    x = fourier.cube(3)
    left = compose(c, compose(a, b)).evaluate_batch(x)
    right = compose(compose(c, a), b).evaluate_batch(x)
    out.append(("compose associativity", bool(np.array_equal(left, right)), ""))
    seq = c.evaluate_batch(a.evaluate_batch(b.evaluate_batch(x)))
    out.append(("compose equals sequential", bool(np.array_equal(left, seq)), ""))
    t = constructions.tribes(16)
    out.append(("serialize round trip", serialize(deserialize(serialize(t))) == serialize(t), ""))
    y = np.random.default_rng(0).random((256, 16)) < 0.5
    wired = compose(identity(1), t)
    out.append(("identity wiring", bool(np.array_equal(wired.evaluate_batch(y), t.evaluate_batch(y))), ""))
    return out


def check_constructions() -> list[Check]:
    out = []
    for n in (1, 2, 3):
        e = constructions.equality_augment(identity(n))
        x = fourier.cube(2 * n)
        want = np.all(x[:, :n] == x[:, n:], axis=1)
        out.append((f"equality augment N={n}", bool(np.array_equal(e.evaluate_batch(x)[:, 0], want)), ""))
    c = random_layered(8, [6, 4, 1], 3, seed=4)
    x = fourier.cube(8)
    neg = constructions.negate_inputs(c)
    ok = np.array_equal(neg.evaluate_batch(x), c.evaluate_batch(~x)) and neg.measure() == c.measure()
    out.append(("negation wrapper", bool(ok), ""))
    return out


def fourier_corpus():
    corpus = [properties.dictator(3), properties.and_k(3), properties.or_k(4), properties.parity(3)]
    corpus += [properties.majority(n) for n in (3, 5, 7)]
    corpus += [properties.tribes(8), properties.random_function(6, seed=1)]
    return corpus


def check_fourier() -> list[Check]:
    out = []
    for f in fourier_corpus():
        table = fourier.truth_table(f)
        for p in (0.1, 0.5, 0.9):
            r = fourier.spectrum(table, p)
            pars = abs(r.parseval_sum - r.expectation) < 1e-9
            spec = abs(r.spectral_total_influence - r.total_influence) < 1e-9
            rm = fourier.russo_margulis_check(table, p)
            rm_ok = rm.holds and (not rm.monotone or abs(rm.lhs - rm.rhs) < 1e-9)
            out.append((f"{f.name} p={p}", pars and spec and rm_ok, ""))
    return out


def check_twosat() -> list[Check]:
    rng = np.random.default_rng(7)
    bad = 0
    for _ in range(200):
        n = int(rng.integers(2, 6))
        bits = rng.random(twosat.universe_size(n)) < 0.2
        f = twosat.TwoSatFormula(n, bits)
        bad += twosat.two_sat_satisfiable(f) != twosat.brute_force_satisfiable(n, f.clauses())
    return [("2-SAT vs brute force", bad == 0, f"{bad} mismatches")]


def check_bounds() -> list[Check]:
    rng = np.random.default_rng(11)
    worst = 0.0
    for _ in range(100):
        p_c = float(rng.uniform(0.05, 0.5))
        eps = float(rng.uniform(1e-4, 0.1))
        b = bounds.BoundInput(N=1 << 12, epsilon=eps, delta=float(rng.uniform(0.1, 0.9)), p_c=p_c)
        q1, q2 = bounds.key_quantity(b), bounds.key_quantity(bounds.mirrored(b))
        worst = max(worst, abs(q1 - q2) / q1)
    k = bounds.key_quantity(bounds.BoundInput(N=1 << 20, epsilon=1e-4, delta=1.0, p_c=0.5))
    return [("mirror symmetry", worst < 1e-12, f"max rel diff {worst:.1e}"),
            ("key quantity", math.isclose(k, 5000, rel_tol=1e-9), f"{k}")]


SUITES = {
    "circuit": check_circuits,
    "constructions": check_constructions,
    "debias": check_debias,
    "fourier": check_fourier,
    "twosat": check_twosat,
    "bounds": check_bounds,
}


def run(names=None) -> list[Check]:
    names = list(SUITES) if not names or names == ["all"] else names
    out = []
    for name in names:
        if name not in SUITES:
            raise KeyError(f"unknown suite {name!r}; known: {', '.join(SUITES)}")
        out.extend((f"{name}: {n}", ok, d) for n, ok, d in SUITES[name]())
    return out

