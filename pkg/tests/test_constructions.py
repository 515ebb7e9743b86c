import itertools
import math
import warnings

import numpy as np
import pytest
from scipy.stats import binom

from sharpthresh import constructions as C, graphs, properties
from sharpthresh.circuit import CircuitBuilder, identity, random_layered
from sharpthresh.fourier import cube, product_weights
from sharpthresh.invariants import debias_pushforward


# -- debias ----------------------------------------------------------------

def test_debias_quarter():
    s = C.DebiasSpec(4, 0.25)
    assert s.block_width == 2
    assert s.p1 == pytest.approx(0.5, abs=1e-15)


def test_debias_third():
    s = C.DebiasSpec(4, 1 / 3)
    assert s.block_width == 2
    assert s.p1 == pytest.approx(3 ** -0.5, abs=1e-14)   # 0.5773502691896258
    assert 0.5 <= s.p1 < 2 ** -0.5


@pytest.mark.parametrize("p0", [0.5, 0.3, 0.25, 0.1, 0.01, 1e-4])
def test_debias_p1_range(p0):
    s = C.DebiasSpec(1, p0)
    assert 0.5 <= s.p1 < 2 ** -0.5 or (p0 == 0.5 and s.p1 == 0.5)
    assert abs(s.p1 ** s.block_width - p0) < 1e-12


def test_debias_errors():
    with pytest.raises(ValueError):
        C.DebiasSpec(2, 0.6)
    with pytest.raises(ValueError):
        C.DebiasSpec(2, 0.0)


def test_debias_n2_exact_law():
    assert debias_pushforward(2, 0.25, 0.5) < 1e-12


def test_debias_perturbed_identity():
    for p0 in (0.5, 0.25, 0.1):
        s = C.DebiasSpec(3, p0, gamma=1e-3)
        tv = debias_pushforward(3, p0, s.p1 - s.r)
        # the outputs must now be Bern(p0 (1 - gamma))^3; compare laws directly
        c = C.debias_layer(s)
        x = cube(c.input_width)
        law = np.bincount(c.evaluate_batch(x).astype(int) @ [1, 2, 4],
                          weights=product_weights(c.input_width, s.p1 - s.r), minlength=8)
        assert np.abs(law - product_weights(3, p0 * (1 - 1e-3))).sum() < 1e-12
        assert tv < 1e-12
        # first order: r = p1 * gamma / block_width
        assert s.r * s.block_width / 1e-3 == pytest.approx(s.p1, rel=2e-3)


def test_debias_layer_shape():
    c = C.debias_layer(C.DebiasSpec(5, 0.1))
    assert c.input_width == 20 and c.num_outputs == 5
    assert c.measure().depth == 1 and c.measure().size == 5


# -- tribes ----------------------------------------------------------------

def test_tribes_width_n8():
    # E_{1/2} for w = 1..8 from the closed form; w = 2 is closest to 1/2
    vals = [1 - (1 - 2.0 ** -w) ** (8 // w) for w in range(1, 9)]
    assert int(np.argmin(np.abs(np.array(vals) - 0.5))) + 1 == C.tribes_width(8) == 2
    e = C.tribes_expectation(8, 2, 0.5)
    assert 0.25 < e < 0.75


def test_tribes_extremes():
    t = C.tribes(8)
    assert t.evaluate([1] * 8).tolist() == [1]
    assert t.evaluate([0] * 8).tolist() == [0]
    with pytest.raises(ValueError):
        C.tribes(3)


def test_tribes_closed_form_matches_enumeration():
    t = C.tribes(8)
    w = C.tribes_width(8)
    x = cube(8)
    for p in (0.3, 0.5, 0.8):
        exact = float(product_weights(8, p)[t.evaluate_batch(x)[:, 0]].sum())
        assert abs(exact - C.tribes_expectation(8, w, p)) < 1e-12


def test_iterated_tribes_d2_is_tribes():
    a, b = C.iterated_tribes(64, 2), C.tribes(64)
    x = np.random.default_rng(0).random((4000, 64)) < 0.5
    assert a.measure() == b.measure()
    assert np.array_equal(a.evaluate_batch(x), b.evaluate_batch(x))


def test_iterated_tribes_d4():
    c = C.iterated_tribes(256, 4)
    m = c.measure()
    assert m.depth == 4 and m.size <= 2 * 256
    with pytest.raises(ValueError):
        C.iterated_tribes(256, 3)
    with pytest.raises(ValueError):
        C.iterated_tribes(9, 4)


def test_iterated_tribes_expectation_matches_circuit():
    c = C.iterated_tribes(256, 4)
    rng = np.random.default_rng(0)
    p = 0.5
    x = rng.random((40_000, 256)) < p
    mc = c.evaluate_batch(x)[:, 0].mean()
    exact = float(C.iterated_tribes_expectation(256, 4, p))
    assert abs(mc - exact) < 4 * math.sqrt(exact * (1 - exact) / 40_000)


# -- negation --------------------------------------------------------------

def test_negate_involution():
    c = random_layered(10, [8, 4, 1], 3, seed=3)
    x = cube(10)
    assert np.array_equal(C.negate_inputs(C.negate_inputs(c)).evaluate_batch(x), c.evaluate_batch(x))
    assert C.negate_inputs(c).measure() == c.measure()


@pytest.mark.parametrize("p", [0.1, 0.5, 0.9])
def test_negate_and2_expectation(p):
    b = CircuitBuilder(2)
    c = b.build([b.and_([b.input(0), b.input(1)])])
    n = C.negate_inputs(c)
    e = float(product_weights(2, p)[n.evaluate_batch(cube(2))[:, 0]].sum())
    assert abs(e - (1 - p) ** 2) < 1e-15


# -- equality augmentation -------------------------------------------------

def test_equality_identity_n3():
    e = C.equality_augment(identity(3))
    x = cube(6)
    assert np.array_equal(e.evaluate_batch(x)[:, 0], np.all(x[:, :3] == x[:, 3:], axis=1))


def test_equality_constant_zero():
    b = CircuitBuilder(3)
    z = b.const(0)
    c = b.build([z, z, z])
    e = C.equality_augment(c)
    x = cube(6)
    assert np.array_equal(e.evaluate_batch(x)[:, 0], ~x[:, 3:].any(axis=1))


def test_equality_depth():
    c = random_layered(3, [3, 3], 2, n_outputs=3, seed=0)
    assert c.depth == 2
    e = C.equality_augment(c)
    assert e.depth == 5
    assert e.size <= 2 * c.size + 3 * 3 + 1


@pytest.mark.parametrize("seed", range(4))
def test_equality_random_exhaustive(seed):
    c = random_layered(6, [6, 6], 3, n_outputs=6, seed=seed)
    e = C.equality_augment(c)
    x = cube(12)
    want = np.all(c.evaluate_batch(x[:, :6]) == x[:, 6:], axis=1)
    assert np.array_equal(e.evaluate_batch(x)[:, 0], want)


# -- monotone property circuits -------------------------------------------

def test_edge_property_is_or():
    c = C.monotone_property_circuit(C.PRESETS["edge"], 5)
    x = np.random.default_rng(0).random((300, 10)) < 0.1
    assert np.array_equal(c.evaluate_batch(x)[:, 0], x.any(axis=1))
    assert c.measure().depth == 2


def test_triangle_property_n5():
    c = C.monotone_property_circuit(C.PRESETS["triangle"], 5)
    assert c.size == 10 + 1           # C(5,3) placements + the OR gate
    rng = np.random.default_rng(1)
    for _ in range(50):
        e = rng.random(10) < 0.4
        adj = graphs.adjacency_matrix(5, e)
        want = any(adj[a, b] and adj[b, c_] and adj[a, c_] for a, b, c_ in itertools.combinations(range(5), 3))
        assert bool(c.evaluate(e)[0]) == want


@pytest.mark.parametrize("name,n,count", [
    ("edge", 6, 15),          # n(n-1)/2
    ("triangle", 6, 20),      # C(6,3)
    ("k4", 6, 15),            # C(6,4)
    ("path2", 5, 30),         # n!/(n-3)!/|Aut| = 60/2
])
def test_placement_counts(name, n, count):
    assert len(C.placements(C.PRESETS[name][0], n)) == count


def test_empty_property_warns():
    with warnings.catch_warnings(record=True) as w:
        warnings.simplefilter("always")
        c = C.monotone_property_circuit([], 4)
    assert any(issubclass(x.category, C.EmptyPropertyWarning) for x in w)
    assert c.evaluate_batch(cube(6)).sum() == 0


def test_minimal_element_text_round_trip():
    text = "# triangle and a path\n0-1 1-2 0-2\n0-1 1-2\n"
    els = C.parse_minimal_elements(text)
    assert els == [[(0, 1), (1, 2), (0, 2)], [(0, 1), (1, 2)]]
    assert C.parse_minimal_elements(C.format_minimal_elements(els)) == els
    with pytest.raises(ValueError):
        C.parse_minimal_elements("0-1 2+3")


# -- converse estimator ----------------------------------------------------

def small_spec(**kw):
    args = dict(n=8, p_c=0.25, S_blocks=3, q_points=[0.15, 0.3],
                minimal_element_lists=[C.PRESETS["triangle"]] * 2)
    args.update(kw)
    return C.ConverseSpec(**args)


def test_converse_degenerate_equals_triangle():
    spec = small_spec()
    est = C.converse_estimator(spec)
    tri = properties.triangle(8)
    x = np.random.default_rng(0).random((2000, 28)) < 0.3
    assert np.array_equal(est.evaluate_batch(x)[:, 0], tri(x))
    assert est.depth == 4


def test_converse_matches_reference_semantics():
    spec = small_spec(q_points=[0.1, 0.2, 0.35], open_ends=False,
                      minimal_element_lists=[C.PRESETS["edge"], C.PRESETS["triangle"], C.PRESETS["k4"]])
    est = C.converse_estimator(spec)
    rng = np.random.default_rng(2)
    x = rng.random((3000, 28)) < rng.uniform(0.05, 0.6, size=(3000, 1))
    g = np.stack([properties.or_k(28)(x), properties.triangle(8)(x), properties.clique(8, 4)(x)], axis=1)
    assert np.array_equal(est.evaluate_batch(x)[:, 0], C.converse_reference(spec, x, g))


def test_converse_count_layer_audit():
    spec = small_spec(n=10, S_blocks=3)
    est = C.converse_estimator(spec)
    lev = est.levels
    logic = np.isin(est.kinds, [4, 5])
    assert np.count_nonzero(logic & ((lev == 2) | (lev == 3))) == 2 ** 3 + 3 + 1
    assert np.count_nonzero(logic & (lev == 4)) == 1


def test_converse_validation():
    with pytest.raises(ValueError):
        C.converse_estimator(small_spec(S_blocks=5))          # S >= log2 N
    with pytest.raises(ValueError):
        C.converse_estimator(small_spec(S_blocks=2, p_c=0.02))  # S*K > N
    with pytest.raises(ValueError):
        small_spec(q_points=[0.3, 0.2])
    with pytest.raises(ValueError):
        C.converse_estimator(small_spec(intervals=[(0.0, 0.1), (0.5, 0.9)]))


def test_probe_statistics_binomial():
    # Q ~ Bin(16, 1/2); probability that Q/16 lands in (0.25, 0.75)
    q = np.arange(17)
    inside = (q / 16 > 0.25) & (q / 16 < 0.75)
    assert binom.pmf(q, 16, 0.5)[inside].sum() >= 0.92


def test_bias_map_increasing():
    spec = small_spec()
    p = np.linspace(0.001, 0.999, 500)
    assert np.all(np.diff(spec.b(p)) > 0)


def test_default_margin():
    spec = small_spec(q_points=[0.1, 0.2, 0.3], minimal_element_lists=[C.PRESETS["edge"]] * 3)
    bq = spec.b(np.array([0.1, 0.2, 0.3]))
    assert spec.C0 == pytest.approx(min(np.min(np.diff(bq)) / 4, bq[0] / 2))
