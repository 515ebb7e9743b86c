"""Acceptance criteria 1-11, each printing one PASS/FAIL line.

The Monte Carlo criteria (6-9) build a canonical JSON record of every
number they check. Criterion 11 regenerates those records with one and
eight workers and compares bytes against the first run.
"""
import json
import math
import time
from concurrent.futures import ThreadPoolExecutor

import numpy as np
import pytest

from sharpthresh import constructions, fourier, graphs, planted, properties
from sharpthresh.circuit import identity, random_layered
from sharpthresh.constructions import DebiasSpec
from sharpthresh.invariants import debias_pushforward
from sharpthresh.oracle import FunctionOracle
from sharpthresh.thresholds import (
    chunk_rng, disagreement, find_p_alpha, fit_loglog, window, window_scaling_exponent,
)
from sharpthresh import bounds

SEED = 1
_first_runs: dict[str, bytes] = {}


@pytest.fixture
def report(capsys):
    def emit(num, ok, detail, elapsed, limit):
        bound = f"limit {limit}s" if limit is not None else "no time limit"
        line = f"criterion {num}: {'PASS' if ok else 'FAIL'} ({elapsed:.2f}s, {bound}) {detail}"
        with capsys.disabled():
            print("\n" + line)
    return emit


def canon(doc) -> bytes:
    return json.dumps(doc, sort_keys=True).encode()


def chunked(fn, draws, seed, jobs, chunk=100):
    """Apply ``fn(rng, m)`` to fixed-size chunks, each seeded by its index."""
    tasks = [(i, min(chunk, draws - chunk * i)) for i in range(-(-draws // chunk))]

    def run(task):
        return fn(chunk_rng(seed, task[0]), task[1])
    if jobs == 1:
        parts = [run(t) for t in tasks]
    else:
        with ThreadPoolExecutor(jobs) as ex:
            parts = list(ex.map(run, tasks))
    return [v for part in parts for v in part]


# -- 1 ---------------------------------------------------------------------

def test_criterion_1_debias(report):
    t0 = time.perf_counter()
    worst_tv, worst_id = 0.0, 0.0
    for N in (1, 2, 3):
        for p0 in (0.5, 0.25, 0.1):
            s = DebiasSpec(N, p0, gamma=1e-3)
            worst_tv = max(worst_tv, debias_pushforward(N, p0, s.p1))
            worst_id = max(worst_id, abs((s.p1 - s.r) ** s.block_width - p0 * (1 - 1e-3)))
    dt = time.perf_counter() - t0
    ok = worst_tv < 1e-12 and worst_id < 1e-12 and dt < 1
    report(1, ok, f"max TV {worst_tv:.1e}, perturbed identity error {worst_id:.1e}", dt, 1)
    assert ok


# -- 2 and 3 ---------------------------------------------------------------

def monotone_corpus():
    out = [properties.dictator(3)]
    out += [properties.and_k(k) for k in (2, 3, 5)]
    out += [properties.or_k(k) for k in (2, 3, 5)]
    out += [properties.majority(n) for n in (3, 5, 7, 9, 11)]
    out += [properties.tribes(n) for n in (4, 8, 16)]
    out += [properties.clique(4, 3), properties.clique(5, 3), properties.clique(5, 4)]
    return out


def random_corpus():
    """100 random functions on 2..8 bits, monotone in neither direction."""
    out, seed = [], 0
    while len(out) < 100:
        f = properties.random_function(2 + seed % 7, seed=seed)
        t = fourier.truth_table(f)
        if not fourier.is_monotone(t) and not fourier.is_monotone(~t):
            out.append(f)
        seed += 1
    return out


PS = (0.1, 0.3, 0.5, 0.7, 0.9)


def test_criterion_2_russo_margulis(report):
    t0 = time.perf_counter()
    worst = 0.0
    for f in monotone_corpus():
        table = fourier.truth_table(f)
        assert fourier.is_monotone(table)
        for p in PS:
            rm = fourier.russo_margulis_check(table, p)
            worst = max(worst, abs(rm.lhs - rm.rhs))
    strict = 0
    funcs = random_corpus()
    for f in funcs:
        table = fourier.truth_table(f)
        assert not fourier.is_monotone(table)
        rm = fourier.russo_margulis_check(table, 0.3)
        strict += rm.lhs < rm.rhs
    dt = time.perf_counter() - t0
    ok = worst < 1e-9 and strict == len(funcs) and dt < 10
    report(2, ok, f"monotone max gap {worst:.1e}, strict on {strict}/{len(funcs)} non-monotone", dt, 10)
    assert ok


def test_criterion_3_spectral(report):
    t0 = time.perf_counter()
    worst = 0.0
    corpus = monotone_corpus() + random_corpus() + [properties.parity(n) for n in (3, 6)]
    for f in corpus:
        table = fourier.truth_table(f)
        for p in PS:
            r = fourier.spectrum(table, p)
            worst = max(worst, abs(r.parseval_sum - r.expectation),
                        abs(r.spectral_total_influence - r.total_influence))
    dt = time.perf_counter() - t0
    ok = worst < 1e-9 and dt < 10
    report(3, ok, f"max identity error {worst:.1e} over {len(corpus)} functions", dt, 10)
    assert ok


# -- 4 and 5 ---------------------------------------------------------------

def test_criterion_4_majority(report):
    t0 = time.perf_counter()
    fit = window_scaling_exponent(properties.majority, [101, 301, 1001, 3001, 10001], xi=0.25)
    dt = time.perf_counter() - t0
    ok = -0.6 <= fit.slope <= -0.4 and dt < 5
    report(4, ok, f"slope {fit.slope:.4f}", dt, 5)
    assert ok


def closed_form(name, N, expectation):
    return FunctionOracle(name, N, None, monotone=True, expectation=expectation)


def test_criterion_5_tribes(report):
    t0 = time.perf_counter()
    Ns = [2 ** k for k in range(8, 21)]
    prod = []
    for N in Ns:
        prod.append(window(properties.tribes(N)).epsilon * math.log2(N))
    slopes, last = {}, {}
    for d in (2, 4):
        eps = [window(closed_form(f"itribes_d{d}", N, lambda p, N=N, d=d: float(
            constructions.iterated_tribes_expectation(N, d, p)))).epsilon for N in Ns]
        slopes[d] = fit_loglog(Ns, eps)[0]
        last[d] = eps[-1]
    dt = time.perf_counter() - t0
    spread = max(prod) / min(prod)
    ok = spread < 3 and slopes[4] < slopes[2] and last[4] < last[2] and dt < 5
    report(5, ok, f"eps*log2N in [{min(prod):.3f}, {max(prod):.3f}] (ratio {spread:.3f}); "
           f"iterated slopes d=2 {slopes[2]:.3f}, d=4 {slopes[4]:.3f}", dt, 5)
    assert ok


# -- 6: 2-SAT --------------------------------------------------------------

TWOSAT_SIZES = [100, 200, 400, 800, 1600]


def run_twosat(jobs):
    fit = window_scaling_exponent(lambda n: properties.get_oracle("twosat", n), TWOSAT_SIZES, xi=0.3,
                                  samples=2000, budget=2000, seed=SEED, jobs=jobs)
    density = {}
    for n, r in zip(TWOSAT_SIZES, fit.reports):
        density[n] = r.p_c * 2 * (n - 1)          # m/n with N = 2n(n-1) clause slots
    return {"slope": fit.slope, "epsilons": fit.epsilons, "density": {str(k): v for k, v in density.items()},
            "sizes": TWOSAT_SIZES,
            "p_points": [{repr(a): v.p for a, v in r.p_points.items()} for r in fit.reports]}


def first_run(name, fn):
    if name not in _first_runs:
        t0 = time.perf_counter()
        doc = fn(1)
        _first_runs[name] = canon(doc)
        _first_runs[name + ":time"] = time.perf_counter() - t0
    return json.loads(_first_runs[name]), _first_runs[name + ":time"]


def test_criterion_6a_twosat_crossing(report):
    doc, dt = first_run("twosat", run_twosat)
    d800 = doc["density"]["800"]
    ok = 0.9 <= d800 <= 1.1 and dt < 600
    report("6a", ok, f"crossing density m/n at n=800: {d800:.4f} (all: "
           + ", ".join(f"{n}:{doc['density'][str(n)]:.3f}" for n in doc["sizes"]) + ")", dt, 600)
    assert ok


def test_criterion_6b_twosat_window(report):
    doc, dt = first_run("twosat", run_twosat)
    ok = -0.48 <= doc["slope"] <= -0.18 and dt < 600
    report("6b", ok, f"window slope {doc['slope']:.4f}", dt, 600)
    assert ok


# -- 7: isolated vertices and independence number ---------------------------

def run_independence(jobs):
    n, p = 40, 5 / 40

    def isolated(rng, m):
        return [graphs.count_isolated_vertices(n, graphs.gnp(n, p, rng)) for _ in range(m)]

    def coupled(rng, m):
        out = []
        for _ in range(m):
            g1 = graphs.gnp(n, p, rng)
            g2 = graphs.gnp(n, p, rng)
            out.append((graphs.independence_number(n, g1), graphs.independence_number(n, g1 | g2)))
        return out
    iso = np.array(chunked(isolated, 4000, SEED, jobs), dtype=float)
    pairs = chunked(coupled, 500, SEED + 1, jobs)
    alpha = np.array([a for a, _ in pairs], dtype=float)
    return {
        "iso_mean": float(iso.mean()), "iso_se": float(iso.std(ddof=1) / math.sqrt(len(iso))),
        "iso_expected": n * (1 - p) ** (n - 1),
        "union_violations": sum(u > a for a, u in pairs),
        "alpha_sd": float(alpha.std(ddof=1)), "alpha_mean": float(alpha.mean()),
    }


def test_criterion_7_independence(report):
    doc, dt = first_run("independence", run_independence)
    gap = abs(doc["iso_mean"] - doc["iso_expected"])
    ok = (gap <= 3 * doc["iso_se"] and doc["union_violations"] == 0
          and doc["alpha_sd"] <= 2 * math.sqrt(40) and dt < 120)
    report(7, ok, f"isolated mean {doc['iso_mean']:.4f} vs {doc['iso_expected']:.4f} "
           f"(SE {doc['iso_se']:.4f}); union violations {doc['union_violations']}/500; "
           f"sd(alpha) {doc['alpha_sd']:.3f}", dt, 120)
    assert ok


# -- 8: planted clique -----------------------------------------------------

def run_planted(jobs):
    k = 5
    out = {}
    for n in (20, 25, 30):
        p_it = planted.p_it_analytic(n, k)
        z = planted.null_statistics(n, k, p_it, draws=3000, seed=SEED, jobs=jobs)

        def lr(rng, m):
            return [planted.likelihood_ratio(graphs.gnp(n, p_it, rng), n, k, p_it) for _ in range(m)]
        ratios = np.array(chunked(lr, 3000, SEED + 1, jobs))
        p = 0.7 * p_it
        rows = planted.planted_overlap_statistics(n, k, p, draws=1000, seed=SEED + 2, jobs=jobs)
        extra = rows[:, :k].sum(axis=1)
        curve = planted.aon_curve(n, k, planted.auto_grid(n, k), trials=300, seed=SEED, jobs=jobs)
        out[str(n)] = {
            "null_mean": float(z.mean()), "null_se": float(z.std(ddof=1) / math.sqrt(len(z))),
            "null_expected": planted.null_clique_mean(n, k, p_it),
            "lr_mean": float(ratios.mean()), "lr_se": float(ratios.std(ddof=1) / math.sqrt(len(ratios))),
            "fm_bound": planted.first_moment_bound(n, k, 0.3),
            "extra_mean": float(extra.mean()), "extra_se": float(extra.std(ddof=1) / math.sqrt(len(extra))),
            "aon_success": curve.success, "aon_crosses": curve.crosses(),
        }
    return out


def test_criterion_8_planted(report):
    doc, dt = first_run("planted", run_planted)
    parts = []
    ok = dt < 600
    for n, r in doc.items():
        a = abs(r["null_mean"] - r["null_expected"]) <= 3 * r["null_se"]
        b = abs(r["lr_mean"] - 1.0) <= 3 * r["lr_se"]
        c = r["fm_bound"] >= r["extra_mean"] - 3 * r["extra_se"]
        d = r["aon_crosses"]
        ok = ok and a and b and c and d
        parts.append(f"n={n}: null {'ok' if a else 'BAD'}, LR {r['lr_mean']:.3f}, "
                     f"bound {r['fm_bound']:.3g} vs {r['extra_mean']:.3g}, AoN {'crosses' if d else 'NO'}")
    report(8, ok, "; ".join(parts), dt, 600)
    assert ok


# -- 9: constructions ------------------------------------------------------

def run_converse(jobs):
    n = 60
    tri = properties.triangle(n)
    lo = find_p_alpha(tri, 0.1, samples=2000, budget=8000, seed=SEED, jobs=jobs).p
    mid = find_p_alpha(tri, 0.5, samples=2000, budget=8000, seed=SEED, jobs=jobs).p
    hi = find_p_alpha(tri, 0.9, samples=2000, budget=8000, seed=SEED, jobs=jobs).p
    grid = np.linspace(lo, hi, 5).tolist()
    spec = constructions.ConverseSpec(n=n, p_c=mid, S_blocks=10, q_points=grid,
                                      minimal_element_lists=[constructions.PRESETS["triangle"]] * 5)
    c = constructions.converse_estimator(spec)
    agree = [1.0 - disagreement(c, tri, p, 2000, SEED, jobs).estimate for p in grid]
    m = c.measure()
    return {"grid": grid, "agreement": agree, "size": m.size, "depth": m.depth}


def equality_exhaustive():
    bad = 0
    for N in range(1, 7):
        for c in (identity(N), random_layered(N, [2 * N, N], 2, n_outputs=N, seed=N)):
            if c.num_outputs != N:
                continue
            e = constructions.equality_augment(c)
            x = fourier.cube(c.input_width + N)
            want = np.all(c.evaluate_batch(x[:, :c.input_width]) == x[:, c.input_width:], axis=1)
            bad += int(np.count_nonzero(e.evaluate_batch(x)[:, 0] != want))
    return bad


def test_criterion_9_constructions(report):
    t0 = time.perf_counter()
    bad = equality_exhaustive()
    doc, dt = first_run("converse", run_converse)
    dt += time.perf_counter() - t0
    ok = bad == 0 and min(doc["agreement"]) >= 0.85 and doc["depth"] == 4 and dt < 300
    report(9, ok, f"equality mismatches {bad}; converse agreement "
           + ", ".join(f"{a:.3f}" for a in doc["agreement"])
           + f" (size {doc['size']}, depth {doc['depth']})", dt, 300)
    assert ok


# -- 10: bounds ------------------------------------------------------------

def test_criterion_10_bounds(report):
    t0 = time.perf_counter()
    k = bounds.key_quantity(bounds.BoundInput(N=1 << 20, epsilon=1e-4, delta=1.0, p_c=0.5))
    b = bounds.BoundInput(N=1 << 20, epsilon=2.0 ** -31, delta=1.0, p_c=0.5, d=2)
    q = bounds.key_quantity(b)
    size = bounds.size_bound(b).log2_value
    rng = np.random.default_rng(0)
    worst = 0.0
    for _ in range(100):
        p_c = float(rng.uniform(0.01, 0.99))
        eps = float(rng.uniform(1e-5, 0.01)) * min(1.0, (1 - p_c) / p_c)
        bi = bounds.BoundInput(N=1 << 16, epsilon=eps, delta=float(rng.uniform(0.05, 1)), p_c=p_c)
        q1, q2 = bounds.key_quantity(bi), bounds.key_quantity(bounds.mirrored(bi))
        worst = max(worst, abs(q1 - q2) / q1)
    dt = time.perf_counter() - t0
    ok = k == 5000 and q == 2.0 ** 30 and abs(size - 64 / math.log(2)) < 1e-6 and worst < 1e-12 and dt < 1
    report(10, ok, f"key {k!r}; log2 size {size:.9f} vs {64 / math.log(2):.9f}; "
           f"symmetry rel err {worst:.1e}", dt, 1)
    assert ok


# -- 11: reproducibility ---------------------------------------------------

RUNNERS = {"twosat": run_twosat, "independence": run_independence, "planted": run_planted,
           "converse": run_converse}


def test_criterion_11_reproducible(report):
    t0 = time.perf_counter()
    same = {}
    for name, fn in RUNNERS.items():
        first_run(name, fn)
        a = canon(fn(1))
        b = canon(fn(8))
        same[name] = (a == _first_runs[name], b == _first_runs[name])
    dt = time.perf_counter() - t0
    ok = all(x and y for x, y in same.values())
    report(11, ok, "; ".join(f"{k}: rerun {'same' if x else 'DIFF'}, jobs=8 {'same' if y else 'DIFF'}"
                             for k, (x, y) in same.items()), dt, None)
    assert ok
