import numpy as np
import pytest
from hypothesis import given, strategies as st

from hardylab import trig
from hardylab.trig import TrigPoly, TrigPoly2D


def random_poly(rng, degree, analytic=True):
    lo = 0 if analytic else -degree
    j = np.arange(lo, degree + 1)
    return TrigPoly(j, rng.normal(size=j.size) + 1j * rng.normal(size=j.size))


def mean_abs_fine(f, M=1 << 16):
    # independent oracle: direct evaluation on a fine grid
    t = 2 * np.pi * np.arange(M) / M
    return np.mean(np.abs(trig.eval_points(f, t)))


@st.composite
def polys(draw, max_degree=8, analytic=False):
    deg = draw(st.integers(1, max_degree))
    lo = 0 if analytic else -deg
    re = draw(st.lists(st.floats(-3, 3), min_size=deg - lo + 1, max_size=deg - lo + 1))
    im = draw(st.lists(st.floats(-3, 3), min_size=deg - lo + 1, max_size=deg - lo + 1))
    return TrigPoly(np.arange(lo, deg + 1), np.array(re) + 1j * np.array(im))


def test_basic_norms():
    e = TrigPoly.monomial(1)
    assert trig.lp_norm(e, 1).value == pytest.approx(1.0, abs=1e-12)
    assert trig.lp_norm(e, 2).value == pytest.approx(1.0, abs=1e-12)
    assert trig.lp_norm(trig.fejer(7), 1).value == pytest.approx(1.0, abs=1e-9)
    one_plus = TrigPoly([0, 1], [1.0, 1.0])
    r = trig.lp_norm(one_plus, 1)
    assert r.value == pytest.approx(4 / np.pi, abs=1e-5)
    assert abs(r.value - 4 / np.pi) <= max(r.error, 1e-6)


def test_eval_grid_matches_direct_evaluation(rng):
    f = random_poly(rng, 12, analytic=False)
    M = 256
    t = 2 * np.pi * np.arange(M) / M
    np.testing.assert_allclose(trig.eval_grid(f, M), trig.eval_points(f, t), atol=1e-10)


def test_undersized_grid_rejected():
    with pytest.raises(ValueError):
        trig.eval_grid(TrigPoly.monomial(100), 64)


def test_fejer_kernel():
    assert trig.fejer(1).allclose(TrigPoly.monomial(0))
    for d in (1, 2, 5, 17):
        assert trig.eval_points(trig.fejer(d), [0.0])[0].real == pytest.approx(d)
        assert trig.eval_grid(trig.fejer(d)).real.min() >= -1e-9
    for d in (4, 16, 64):
        assert trig.fejer_lower_constant(d) <= 4


def test_vallee_poussin_reproduces_low_degree(rng):
    f = random_poly(rng, 6, analytic=False)
    assert trig.convolve(trig.vallee_poussin(6), f).allclose(f)


def test_periodize_examples(rng):
    N = 3
    f = TrigPoly([1, N], [1.0, 1.0])
    assert trig.periodize(f, N).allclose(TrigPoly.monomial(N))
    C = 4
    assert trig.periodize(trig.fejer(C * N), N).allclose(trig.fejer(C).dilate(N))


def test_periodize_equals_translate_average(rng):
    f = random_poly(rng, 20, analytic=False)
    N, M = 5, 320
    t = 2 * np.pi * np.arange(M) / M
    avg = np.mean([trig.eval_points(f, t + 2 * np.pi * k / N) for k in range(N)], axis=0)
    np.testing.assert_allclose(trig.eval_grid(trig.periodize(f, N), M), avg, atol=1e-12)


@given(polys(), st.integers(1, 4), st.integers(1, 3))
def test_periodize_properties(f, N, r):
    p = trig.periodize(f, N)
    assert trig.periodize(p, N).allclose(p)
    assert trig.periodize(trig.periodize(f, N), N * r).allclose(trig.periodize(f, N * r))
    assert trig.lp_norm(p, 2).value <= trig.lp_norm(f, 2).value + 1e-12
    l1f = trig.lp_norm(f, 1, grid=1024)
    l1p = trig.lp_norm(p, 1, grid=1024)
    assert l1p.value <= l1f.value + l1f.error + l1p.error + 1e-9
    assert trig.periodize(TrigPoly.monomial(0, 2.5), N).allclose(TrigPoly.monomial(0, 2.5))


def test_step_average(rng):
    np.testing.assert_allclose(trig.step_average(TrigPoly.monomial(0, 2.0), 7), 2.0)
    assert trig.step_average(TrigPoly.monomial(1), 1)[0] == pytest.approx(0.0, abs=1e-14)
    f = random_poly(rng, 10, analytic=False)
    N = 100
    # oracle: fine-grid interval means
    M = N * 256
    vals = trig.eval_points(f, 2 * np.pi * (np.arange(M) + 0.5) / M).reshape(N, -1).mean(axis=1)
    np.testing.assert_allclose(trig.step_average(f, N), vals, atol=1e-4)


@pytest.mark.parametrize("p", [1.0, 2.0])
def test_step_average_bound(rng, p):
    for _ in range(5):
        f = random_poly(rng, 10, analytic=False)
        lhs, rhs = trig.step_average_bound(f, 100, p)
        assert lhs.value <= rhs.value + lhs.error + rhs.error


def test_bernstein_ratio():
    assert trig.bernstein_ratio(TrigPoly.monomial(5)) == pytest.approx(5.0, rel=1e-9)
    sin3 = TrigPoly([-3, 3], [-0.5j, 0.5j])
    assert trig.bernstein_ratio(sin3) == pytest.approx(3.0, rel=1e-6)
    assert trig.bernstein_ratio(TrigPoly([0, 1], [1.0, 0.5])) <= 1 + 1e-9
    with pytest.raises(ValueError):
        trig.bernstein_ratio(TrigPoly.zero())


@given(polys())
def test_bernstein_bound_property(f):
    if trig.lp_norm(f, 2).value < 1e-6:
        return
    assert trig.bernstein_ratio(f) <= f.degree + 1e-6 * max(1, f.degree)


@given(polys(6), polys(6))
def test_bernstein_of_l2_pair(f1, f2):
    # |(f1, f2)| as a function, via its values; derivative by the chain rule
    M = 4096
    t = 2 * np.pi * np.arange(M) / M
    v1, v2 = trig.eval_points(f1, t), trig.eval_points(f2, t)
    d1, d2 = trig.eval_points(trig.derivative(f1), t), trig.eval_points(trig.derivative(f2), t)
    mod = np.sqrt(np.abs(v1) ** 2 + np.abs(v2) ** 2)
    if mod.mean() < 1e-3 or min(np.abs(v1).mean(), np.abs(v2).mean()) < 1e-3:
        return
    dmod = np.sqrt(np.abs(d1) ** 2 + np.abs(d2) ** 2)
    ber = lambda a, b: np.mean(b) / np.mean(a)
    lhs = ber(mod, dmod)
    rhs = np.hypot(ber(np.abs(v1), np.abs(d1)), ber(np.abs(v2), np.abs(d2)))
    assert lhs <= rhs * (1 + 1e-3) + 1e-6


def test_sawtooth_convolution(rng):
    N = 4
    out = trig.sawtooth_conv(TrigPoly.monomial(N), N)
    assert out.allclose(TrigPoly.monomial(N, -1.0))
    assert trig.sawtooth_conv(TrigPoly.monomial(0, 3.0), N).allclose(TrigPoly.zero())
    f = random_poly(rng, 12, analytic=False)
    mean = TrigPoly.monomial(0, f.coeff(0))
    assert trig.sawtooth_conv(f, 3).allclose(mean - trig.periodize(f, 3), atol=1e-12)


@given(polys(10), st.integers(1, 5))
def test_sawtooth_identity_property(f, N):
    mean = TrigPoly.monomial(0, f.coeff(0))
    assert trig.sawtooth_conv(f, N, check=False).allclose(mean - trig.periodize(f, N), atol=1e-10)


def test_lacunary_sign_projection(rng):
    f = TrigPoly([1, 2, 4], [1.0, 1.0, 1.0])
    assert trig.lacunary_sign_projection(f, [1, 2, 4], [1, 1, 1]).allclose(f)
    assert trig.lacunary_sign_projection(f, [1, 2, 4], [1, -1, 1]).allclose(TrigPoly([1, 2, 4], [1.0, -1.0, 1.0]))
    with pytest.raises(ValueError):
        trig.lacunary_sign_projection(TrigPoly([-1, 1], [1, 1]), [1], [1])


def test_paley_constant_is_moderate(rng):
    worst = 0.0
    for _ in range(5):
        f = random_poly(rng, 1024)
        lac = sum(abs(f.coeff(2**k)) ** 2 for k in range(11)) ** 0.5
        worst = max(worst, lac / trig.lp_norm(f, 1).value)
    assert np.isfinite(worst) and worst < 2.0


def test_shear():
    f = TrigPoly2D.monomial(2, 3)
    assert trig.shear(f, np.eye(2, dtype=int)).allclose(f)
    L = np.array([[1, 1], [1, -1]])
    assert trig.shear(f, L).allclose(TrigPoly2D.monomial(5, -1))


def test_shear_preserves_l1_for_unimodular(rng):
    freqs = rng.integers(0, 6, size=(8, 2))
    f = TrigPoly2D(freqs, rng.normal(size=8) + 1j * rng.normal(size=8))
    g = trig.shear(f, np.array([[1, 1], [0, 1]]))
    a = np.abs(trig.eval_grid(f, 128)).mean()
    b = np.abs(trig.eval_grid(g, 128)).mean()
    assert a == pytest.approx(b, rel=1e-9)


def test_multiplier_mask():
    d, N = (2, 6), (1, 2)
    assert trig.multiplier_B(TrigPoly2D.monomial(1, 5), d, N).is_zero
    f = TrigPoly2D.monomial(2, 4)
    assert trig.multiplier_B(f, d, N).allclose(f)


def test_multiplier_idempotent_and_commutes_with_signs(rng):
    d, N = (2, 6, 24), (1, 2, 6)
    freqs = np.array([[a, b] for a in range(25) for b in range(25)])
    f = TrigPoly2D(freqs, rng.normal(size=len(freqs)))
    B = trig.multiplier_B(f, d, N)
    assert trig.multiplier_B(B, d, N).allclose(B)
    signs = {2: 1.0, 6: -1.0, 24: -1.0}

    def flip(g):
        s = np.array([signs.get(int(a + b), 1.0) for a, b in g.freqs])
        return TrigPoly2D(g.freqs, g.amps * s)

    assert trig.multiplier_B(flip(f), d, N).allclose(flip(B))
    with pytest.raises(ValueError):
        trig.multiplier_B(TrigPoly2D.monomial(-1, 2), d, N)


def test_anti_diagonal_extract(rng):
    assert trig.anti_diagonal_extract(TrigPoly2D.monomial(2, 1), 3).allclose(TrigPoly.monomial(2))
    f = TrigPoly2D([[1, 4], [3, 2]], [1.0 + 1j, -0.5])
    ft = trig.anti_diagonal_extract(f, 5)
    M = 64
    t = 2 * np.pi * np.arange(M) / M
    v2 = trig.eval_grid(f, M)
    diff = np.subtract.outer(t, t)
    np.testing.assert_allclose(np.abs(v2), np.abs(trig.eval_points(ft, diff.ravel())).reshape(M, M), atol=1e-10)
    with pytest.raises(ValueError):
        trig.anti_diagonal_extract(TrigPoly2D.monomial(1, 1), 3)


def test_multiplier_acts_by_periodization(rng):
    d, N = (4, 12), (1, 2)
    j = np.arange(13)
    f = TrigPoly2D(np.stack([j, 12 - j], axis=1), rng.normal(size=13))
    lhs = trig.anti_diagonal_extract(trig.multiplier_B(f, d, N), 12)
    assert lhs.allclose(trig.periodize(trig.anti_diagonal_extract(f, 12), 2))


def test_embedding():
    assert trig.embed_ind_trig([TrigPoly.monomial(0)], [5], [1]).allclose(TrigPoly2D.monomial(0, 5))
    assert trig.embed_ind_trig([TrigPoly.monomial(1)], [4], [2]).allclose(TrigPoly2D.monomial(2, 2))
    with pytest.raises(ValueError):
        trig.embed_ind_trig([TrigPoly.monomial(3)], [4], [2])


def test_embedding_extracts_dilations(rng):
    d, N = (2, 6, 24), (1, 2, 6)
    fs = [random_poly(rng, dk // Nk) for dk, Nk in zip(d, N)]
    emb = trig.embed_ind_trig(fs, d, N)
    for f, dk, Nk in zip(fs, d, N):
        diag = TrigPoly2D(
            emb.freqs[emb.freqs.sum(axis=1) == dk], emb.amps[emb.freqs.sum(axis=1) == dk]
        )
        assert trig.anti_diagonal_extract(diag, dk).allclose(f.dilate(Nk))


def test_khintchine_average(rng):
    _, r = trig.khintchine_average([TrigPoly.monomial(1)])
    assert r == pytest.approx(1.0)
    _, r = trig.khintchine_average([TrigPoly.monomial(1), TrigPoly.monomial(2)])
    assert 1 / np.sqrt(2) - 1e-9 <= r <= 1 + 1e-9
    _, r = trig.khintchine_average([random_poly(rng, 6) for _ in range(8)])
    assert 0.70 <= r <= 1.0
    with pytest.raises(ValueError):
        trig.khintchine_average([TrigPoly.monomial(1)] * 17)


def test_vector_l1_l2_single_component_is_l1(rng):
    f = random_poly(rng, 9, analytic=False)
    assert trig.vector_l1_l2([f]).value == pytest.approx(mean_abs_fine(f), rel=1e-6)
