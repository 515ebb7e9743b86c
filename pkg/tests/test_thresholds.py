import math

import numpy as np
import pytest

from sharpthresh import properties, thresholds
from sharpthresh.oracle import FunctionOracle, constant
from sharpthresh.thresholds import (
    Estimate, agrees_on_average, classify, estimate_expectation, find_p_alpha, read_sweep_csv,
    sweep, sweep_csv, wilson_interval, window, window_scaling_exponent,
)
from sharpthresh.circuit import CircuitBuilder


def mc_only(f):
    """Hide the closed form and force Monte Carlo."""
    return FunctionOracle(f.name, f.width, f.evaluate, f.monotone, None, f.sampler, f.increasing)


def test_wilson_against_closed_form():
    # independent computation from the textbook formula
    k, n, z = 37, 120, 1.959963984540054
    ph = k / n
    c = (ph + z * z / (2 * n)) / (1 + z * z / n)
    h = z * math.sqrt(ph * (1 - ph) / n + z * z / (4 * n * n)) / (1 + z * z / n)
    assert wilson_interval(k, n) == pytest.approx((c - h, c + h), abs=1e-12)
    lo, hi = wilson_interval(0, 100)
    assert lo == 0.0 and hi > 0


def test_constant_oracle():
    for v in (False, True):
        e = estimate_expectation(constant(8, v), 0.3, samples=500)
        assert e.estimate == float(v)


def test_and2_estimate():
    e = estimate_expectation(mc_only(properties.and_k(2)), 0.5, samples=100_000, seed=3)
    assert abs(e.estimate - 0.25) < 3 * math.sqrt(0.25 * 0.75 / 1e5)
    assert e.ci_lo < 0.25 < e.ci_hi


def test_input_checks():
    f = properties.and_k(2)
    with pytest.raises(ValueError):
        estimate_expectation(f, 0.5, samples=50)
    with pytest.raises(ValueError):
        estimate_expectation(f, 1.0)


def test_deterministic_and_jobs_independent():
    f = mc_only(properties.tribes(256))
    a = estimate_expectation(f, 0.5, samples=5000, seed=11)
    b = estimate_expectation(f, 0.5, samples=5000, seed=11, jobs=1)
    c = estimate_expectation(f, 0.5, samples=5000, seed=11, jobs=8)
    assert a == b == c
    assert estimate_expectation(f, 0.5, samples=5000, seed=12) != a


def test_common_random_numbers_monotone():
    f = mc_only(properties.majority(51))
    vals = [e.estimate for e in sweep(f, np.linspace(0.3, 0.7, 9), samples=2000, seed=1)]
    assert vals == sorted(vals)


def test_maj101_p_half():
    r = find_p_alpha(properties.majority(101), 0.5)
    assert r.p == pytest.approx(0.5, abs=1e-9)
    assert r.method == "analytic"


@pytest.mark.parametrize("N", [1, 5, 40])
def test_or_root(N):
    r = find_p_alpha(properties.or_k(N), 0.5, tol=1e-12)
    assert r.p == pytest.approx(1 - 2 ** (-1 / N), rel=1e-9)


def test_tribes_root():
    f = properties.tribes(1024)
    r = find_p_alpha(f, 0.5, tol=1e-12)
    assert abs(f.expectation(r.p) - 0.5) < 1e-6


def test_exact_table_path():
    f = FunctionOracle("and3", 3, lambda x: x.all(axis=1), monotone=True)
    r = find_p_alpha(f, 0.5, tol=1e-12)
    assert r.method == "exact"
    assert r.p == pytest.approx(0.5 ** (1 / 3), rel=1e-9)


def test_non_monotone_rejected():
    with pytest.raises(ValueError):
        find_p_alpha(properties.parity(5), 0.5)


def test_decreasing_function():
    f = properties.independent_set(8, 4)
    r = find_p_alpha(mc_only(f), 0.5, samples=2000, seed=0)
    lo = estimate_expectation(mc_only(f), r.p * 0.8, 4000, seed=1).estimate
    hi = estimate_expectation(mc_only(f), r.p * 1.25, 4000, seed=1).estimate
    assert lo > 0.5 > hi


def test_monte_carlo_close_to_exact():
    f = properties.majority(41)
    mc = find_p_alpha(mc_only(f), 0.25, samples=4000, seed=2)
    ex = find_p_alpha(f, 0.25)
    assert abs(mc.p - ex.p) < 0.01
    assert mc.method == "montecarlo" and mc.samples > 0


def test_classification():
    assert classify(0.01, 0.5) == "sharp"
    assert classify(0.5, 0.5) == "coarse"
    assert classify(0.15, 0.5) == "undetermined"
    assert window(properties.dictator(9)).classification == "coarse"
    assert window(properties.majority(1001)).classification == "sharp"


def test_window_dictator_values():
    r = window(properties.dictator(1), xi=0.25)
    assert r.p_c == pytest.approx(0.5)
    assert r.epsilon == pytest.approx(0.5, abs=1e-8)
    assert r.delta == 0.5


def test_window_symmetrize():
    f = properties.and_k(4)
    plain = window(f)
    sym = window(f, symmetrize=True)
    assert plain.p_c > 0.5 and sym.symmetrized
    assert sym.epsilon == pytest.approx(plain.epsilon * plain.p_c / (1 - plain.p_c))
    with pytest.raises(ValueError):
        window(f, xi=0.5)


def test_scaling_majority():
    fit = window_scaling_exponent(properties.majority, [101, 401, 1601, 6401])
    assert fit.within(-0.5, 0.05)


def test_scaling_dictator_flat():
    fit = window_scaling_exponent(properties.dictator, [1, 10, 100, 1000])
    assert abs(fit.slope) < 1e-6
    with pytest.raises(ValueError):
        window_scaling_exponent(properties.dictator, [1, 2, 3])


def test_agrees_on_average_self_and_constant():
    f = properties.majority(101)
    b = CircuitBuilder(101)
    # a majority circuit is large; the constant circuit is the interesting case
    zero = b.build([b.const(0)])
    a = agrees_on_average(zero, f, xi=0.1, samples=20_000, seed=0)
    assert a.disagreement1.estimate == pytest.approx(0.1, abs=0.01)
    assert a.disagreement2.estimate == pytest.approx(0.9, abs=0.01)
    d = thresholds.disagreement(f, f, 0.5, 2000, 0)
    assert d.estimate == 0.0


def test_agreement_width_mismatch():
    b = CircuitBuilder(3)
    with pytest.raises(ValueError):
        agrees_on_average(b.build([b.input(0)]), properties.majority(5))


def test_sweep_csv_round_trip():
    f = mc_only(properties.majority(11))
    rows = [("maj", 11, e) for e in sweep(f, [0.2, 0.5, 0.8], samples=500, seed=4)]
    back = read_sweep_csv("# header\n" + sweep_csv(rows))
    assert [r["estimate"] for r in back] == [e.estimate for _, _, e in rows]
    assert back[0]["family"] == "maj" and back[0]["size"] == 11


def test_estimate_contains():
    e = Estimate(0.5, 0.5, 0.4, 0.6, 100, 0)
    assert e.contains(0.45) and not e.contains(0.7)
