"""Threshold location, window measurement and window-scaling fits.

Expectations come from, in order of preference, an oracle's closed form,
exact enumeration (width up to ``fourier.EXACT_LIMIT``), or seeded Monte
Carlo. Monte Carlo runs are split into fixed-size chunks whose random
streams depend only on ``(seed, chunk index)``, so results do not depend on
the number of worker threads. The same seed is used at every bias, which
couples the samples across p (common random numbers).
"""
from __future__ import annotations

import csv
import io
import math
from concurrent.futures import ThreadPoolExecutor
from dataclasses import asdict, dataclass, field
from typing import Callable, Sequence

import numpy as np
from scipy.special import expit, logit
from scipy.stats import linregress, norm

from . import fourier
from .circuit import Circuit
from .oracle import FunctionOracle

CHUNK = 1024
Z95 = float(norm.ppf(0.975))
SHARP_RATIO = 5.0
COARSE_RATIO = 2.0


class ThresholdUndetermined(RuntimeError):
    """A threshold point could not be located within the sample budget."""


def wilson_interval(successes: int, n: int, z: float = Z95) -> tuple[float, float]:
    if n == 0:
        return 0.0, 1.0
    phat = successes / n
    denom = 1.0 + z * z / n
    centre = (phat + z * z / (2 * n)) / denom
    half = z * math.sqrt(phat * (1 - phat) / n + z * z / (4 * n * n)) / denom
    lo = 0.0 if successes == 0 else max(0.0, centre - half)
    hi = 1.0 if successes == n else min(1.0, centre + half)
    return lo, hi


@dataclass(frozen=True)
class Estimate:
    p: float
    estimate: float
    ci_lo: float
    ci_hi: float
    samples: int
    seed: int
    exact: bool = False

    def contains(self, value: float) -> bool:
        return self.ci_lo <= value <= self.ci_hi


def chunk_rng(seed: int, index: int) -> np.random.Generator:
    return np.random.default_rng(np.random.SeedSequence(seed, spawn_key=(index,)))


def _map(fn, items, jobs: int):
    items = list(items)
    if jobs <= 1 or len(items) <= 1:
        return [fn(x) for x in items]
    with ThreadPoolExecutor(max_workers=jobs) as pool:
        return list(pool.map(fn, items))


def _chunked(samples: int):
    return [(i, min(CHUNK, samples - i * CHUNK)) for i in range(-(-samples // CHUNK))]


def sample_successes(f: FunctionOracle, p: float, samples: int, seed: int, jobs: int = 1) -> int:
    def run(task):
        i, m = task
        return int(np.count_nonzero(f.sample(p, chunk_rng(seed, i), m)))
    return sum(_map(run, _chunked(samples), jobs))


def estimate_expectation(f: FunctionOracle, p: float, samples: int = 10_000, seed: int = 0,
                         jobs: int = 1) -> Estimate:
    """Monte Carlo mean of ``f`` under ``P_p`` with a 95% Wilson interval."""
    if not 0.0 < p < 1.0:
        raise ValueError(f"bias p must lie in (0, 1), got {p}")
    if samples < 100:
        raise ValueError("need at least 100 samples")
    k = sample_successes(f, p, samples, seed, jobs)
    lo, hi = wilson_interval(k, samples)
    return Estimate(p=float(p), estimate=k / samples, ci_lo=lo, ci_hi=hi, samples=samples, seed=seed)


def exact_curve(f: FunctionOracle) -> Callable[[float], float] | None:
    """A deterministic ``p -> E_p f`` when one is available."""
    if f.expectation is not None:
        return lambda p: float(f.expectation(p))
    if f.width <= fourier.EXACT_LIMIT:
        table = fourier.truth_table(f)
        return lambda p: float(np.sum(fourier.product_weights(f.width, p)[table]))
    return None


def sweep(f: FunctionOracle, p_grid: Sequence[float], samples: int = 10_000, seed: int = 0,
          jobs: int = 1, exact: bool = True) -> list[Estimate]:
    """Expectation at each grid point; the same seed at every p couples the samples."""
    curve = exact_curve(f) if exact else None
    if curve is not None:
        return [Estimate(float(p), curve(p), curve(p), curve(p), 0, seed, exact=True) for p in p_grid]
    return [estimate_expectation(f, float(p), samples, seed, jobs) for p in p_grid]


# -- locating p_alpha ------------------------------------------------------

@dataclass
class PAlpha:
    alpha: float
    p: float
    bracket: tuple[float, float]
    status: str                      # "ok" or "undetermined"
    method: str                      # "analytic", "exact" or "montecarlo"
    samples: int = 0
    forced: int = 0                  # bisection steps decided inside the CI
    ci: tuple[float, float] | None = None


LOGIT_RANGE = 40.0


def _bisect(decide, alpha, tol, max_iter=200):
    """Bisection in logit(p) so that thresholds near 0 or 1 are resolved relatively.

    ``decide(p)`` returns +1 if the root lies above p, -1 if below, 0 on a tie.
    """
    lo, hi = -LOGIT_RANGE, LOGIT_RANGE
    for _ in range(max_iter):
        if hi - lo <= tol:
            break
        mid = 0.5 * (lo + hi)
        s = decide(float(expit(mid)))
        if s == 0:
            lo = hi = mid
            break
        if s > 0:
            lo = mid
        else:
            hi = mid
    return float(expit(lo)), float(expit(hi))


def find_p_alpha(f: FunctionOracle, alpha: float, tol: float = 1e-9, samples: int = 2000,
                 budget: int = 64_000, seed: int = 0, jobs: int = 1, rtol: float = 1e-3,
                 exact: bool = True) -> PAlpha:
    """The bias at which ``E_p f = alpha`` for a monotone ``f``.

    With a deterministic expectation, bisection runs until the bracket is
    below ``tol`` in logit(p). Otherwise Monte Carlo bisection doubles the
    sample count at a point while the Wilson interval still contains
    ``alpha`` (up to ``budget`` samples), then falls back to the point
    estimate; it stops at relative bracket width ``rtol``.
    """
    if f.monotone is False:
        raise ValueError(f"{f.name} is flagged non-monotone")
    if not 0.0 < alpha < 1.0:
        raise ValueError("alpha must lie in (0, 1)")
    sign = 1 if f.increasing else -1
    curve = exact_curve(f) if exact else None
    if curve is not None:
        def decide(p):
            e = curve(p)
            return 0 if e == alpha else (sign if e < alpha else -sign)
        lo, hi = _bisect(decide, alpha, tol)
        method = "analytic" if f.expectation is not None else "exact"
        return PAlpha(alpha, 0.5 * (lo + hi), (lo, hi), "ok", method)

    used = 0
    forced = 0
    inside: list[float] = []

    def decide(p):
        nonlocal used, forced
        n = samples
        while True:
            est = estimate_expectation(f, p, n, seed, jobs)
            if not est.contains(alpha):
                break
            if 2 * n > budget:
                forced += 1
                inside.append(p)
                break
            n *= 2
        used += n
        e = est.estimate
        return 0 if e == alpha else (sign if e < alpha else -sign)

    lo, hi = _bisect(decide, alpha, rtol)
    ci = (min(inside + [lo]), max(inside + [hi]))
    return PAlpha(alpha, 0.5 * (lo + hi), (lo, hi), "ok", "montecarlo", samples=used, forced=forced, ci=ci)


# -- windows ---------------------------------------------------------------

@dataclass
class ThresholdReport:
    name: str
    width: int
    xi: float
    p_points: dict[float, PAlpha]
    p_c: float
    epsilon: float
    delta: float
    beta: float
    classification: str
    symmetrized: bool = False
    sweep: list[Estimate] = field(default_factory=list)
    seed: int = 0
    samples: int = 0

    @property
    def absolute_width(self) -> float:
        return abs(self.p_points[1 - self.xi].p - self.p_points[self.xi].p)

    def to_dict(self) -> dict:
        return {
            "name": self.name, "width": self.width, "xi": self.xi, "p_c": self.p_c,
            "epsilon": self.epsilon, "delta": self.delta, "beta": self.beta,
            "classification": self.classification, "symmetrized": self.symmetrized,
            "seed": self.seed, "samples": self.samples,
            "p_points": {repr(a): asdict(v) for a, v in sorted(self.p_points.items())},
            "sweep": [asdict(e) for e in self.sweep],
        }


def classify(epsilon: float, delta: float) -> str:
    """Finite-size label from the jump-to-window ratio (a reporting convention)."""
    r = delta / epsilon if epsilon > 0 else math.inf
    if r >= SHARP_RATIO:
        return "sharp"
    if r <= COARSE_RATIO:
        return "coarse"
    return "undetermined"


def window(f: FunctionOracle, xi: float = 0.25, symmetrize: bool = False, **kw) -> ThresholdReport:
    """``p_c = p_{1/2}``, ``epsilon = |p_{1-xi} - p_xi| / (2 p_c)``, ``delta = 1 - 2 xi``.

    With ``symmetrize`` and ``p_c > 1/2`` the window is reported as
    ``epsilon * p_c / (1 - p_c)``, the window of the input-negated function.
    """
    if not 0.0 < xi < 0.5:
        raise ValueError("xi must lie in (0, 1/2)")
    pts = {a: find_p_alpha(f, a, **kw) for a in (xi, 0.5, 1.0 - xi)}
    bad = [a for a, r in pts.items() if r.status != "ok"]
    if bad:
        raise ThresholdUndetermined(f"{f.name}: p_alpha undetermined for alpha in {bad}")
    p_c = pts[0.5].p
    eps = abs(pts[1.0 - xi].p - pts[xi].p) / (2.0 * p_c)
    sym = symmetrize and p_c > 0.5
    if sym:
        eps = eps * p_c / (1.0 - p_c)
    delta = 1.0 - 2.0 * xi
    return ThresholdReport(
        name=f.name, width=f.width, xi=xi, p_points=pts, p_c=p_c, epsilon=eps, delta=delta,
        beta=min(p_c, 1.0 - p_c), classification=classify(eps, delta), symmetrized=sym,
        seed=kw.get("seed", 0), samples=kw.get("samples", 0),
    )


@dataclass
class ScalingFit:
    slope: float
    stderr: float
    intercept: float
    sizes: list[int]
    epsilons: list[float]
    reports: list[ThresholdReport] = field(default_factory=list, repr=False)

    def within(self, target: float, tol: float) -> bool:
        return abs(self.slope - target) <= tol


def fit_loglog(sizes, values) -> tuple[float, float, float]:
    res = linregress(np.log(np.asarray(sizes, float)), np.log(np.asarray(values, float)))
    return float(res.slope), float(res.stderr), float(res.intercept)


def window_scaling_exponent(family: Callable[[int], FunctionOracle], sizes: Sequence[int],
                            xi: float = 0.25, **kw) -> ScalingFit:
    """Least-squares slope of ``log epsilon`` against ``log size``."""
    if len(sizes) < 4:
        raise ValueError("need at least 4 sizes")
    reports = [window(family(s), xi, **kw) for s in sizes]
    eps = [r.epsilon for r in reports]
    slope, stderr, intercept = fit_loglog(sizes, eps)
    return ScalingFit(slope, stderr, intercept, list(sizes), eps, reports)


# -- agreement on average --------------------------------------------------

@dataclass(frozen=True)
class Agreement:
    p1: float
    p2: float
    disagreement1: Estimate
    disagreement2: Estimate

    @property
    def worst(self) -> float:
        return max(self.disagreement1.estimate, self.disagreement2.estimate)


def disagreement(c, f: FunctionOracle, p: float, samples: int, seed: int, jobs: int = 1) -> Estimate:
    """Monte Carlo ``P_p[c(X) != f(X)]`` on shared input draws."""
    cf = c if isinstance(c, FunctionOracle) else None

    def evaluate_c(x):
        if cf is not None:
            return cf(x)
        return c.evaluate_batch(x)[:, 0]

    def run(task):
        i, m = task
        x = chunk_rng(seed, i).random((m, f.width)) < p
        return int(np.count_nonzero(evaluate_c(x) != f(x)))
    k = sum(_map(run, _chunked(samples), jobs))
    lo, hi = wilson_interval(k, samples)
    return Estimate(float(p), k / samples, lo, hi, samples, seed)


def agrees_on_average(c: Circuit, f: FunctionOracle, xi: float = 0.1, samples: int = 2000,
                      seed: int = 0, jobs: int = 1, **kw) -> Agreement:
    """Disagreement of ``c`` with ``f`` at the points where ``E_p f`` is xi and 1-xi."""
    if c.input_width != f.width:
        raise ValueError(f"width mismatch: circuit {c.input_width}, oracle {f.width}")
    p1 = find_p_alpha(f, xi, seed=seed, jobs=jobs, **kw).p
    p2 = find_p_alpha(f, 1.0 - xi, seed=seed, jobs=jobs, **kw).p
    return Agreement(p1, p2, disagreement(c, f, p1, samples, seed, jobs),
                     disagreement(c, f, p2, samples, seed, jobs))


# -- export ----------------------------------------------------------------

SWEEP_COLUMNS = ("family", "size", "p", "estimate", "ci_lo", "ci_hi", "samples", "seed")


def sweep_csv(rows: Sequence[tuple[str, int, Estimate]]) -> str:
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(SWEEP_COLUMNS)
    for family, size, e in rows:
        w.writerow([family, size, repr(e.p), repr(e.estimate), repr(e.ci_lo), repr(e.ci_hi), e.samples, e.seed])
    return buf.getvalue()


def read_sweep_csv(text: str) -> list[dict]:
    lines = [ln for ln in text.splitlines() if ln and not ln.startswith("#")]
    out = []
    for row in csv.DictReader(lines):
        out.append({
            "family": row["family"], "size": int(row["size"]), "p": float(row["p"]),
            "estimate": float(row["estimate"]), "ci_lo": float(row["ci_lo"]),
            "ci_hi": float(row["ci_hi"]), "samples": int(row["samples"]), "seed": int(row["seed"]),
        })
    return out
