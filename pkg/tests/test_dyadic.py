import numpy as np
import pytest
from hypothesis import given, strategies as st
from hypothesis.extra.numpy import arrays

from hardylab import dyadic
from hardylab.dyadic import DyadicFunction


def walsh_direct(values):
    """O(4^m) oracle: mean of f * w_A for every mask A."""
    m = dyadic.DyadicFunction(values).resolution
    return np.array([np.mean(values * dyadic.walsh_function(a, m).values) for a in range(2**m)])


def values_at(m):
    return arrays(np.float64, 2**m, elements=st.floats(-10, 10, allow_nan=False))


def test_rademacher_has_single_coefficient():
    c = dyadic.walsh_transform(dyadic.rademacher(1, 5))
    expected = np.zeros(32)
    expected[1] = 1.0
    np.testing.assert_allclose(c, expected, atol=1e-15)


def test_constant_has_only_empty_coefficient():
    c = dyadic.walsh_transform(DyadicFunction.constant(1.0, 4))
    assert c[0] == pytest.approx(1.0)
    assert np.abs(c[1:]).max() < 1e-15


@pytest.mark.parametrize("m", [1, 3, 6])
def test_walsh_transform_matches_direct_sum(m, rng):
    f = rng.normal(size=2**m)
    np.testing.assert_allclose(dyadic.walsh_transform(DyadicFunction(f)), walsh_direct(f), atol=1e-12)


def test_walsh_round_trip_m10(rng):
    f = rng.normal(size=1024)
    back = dyadic.inverse_walsh_transform(dyadic.walsh_transform(DyadicFunction(f)))
    back = back.values if isinstance(back, DyadicFunction) else back
    assert np.linalg.norm(back - f) / np.linalg.norm(f) <= 1e-12


def test_walsh_rejects_vector_input():
    with pytest.raises(ValueError):
        dyadic.walsh_transform(DyadicFunction(np.ones((8, 2))))


def test_bad_length_rejected():
    with pytest.raises(ValueError):
        DyadicFunction(np.ones(6))


def test_cond_exp_identities(rng):
    f = DyadicFunction(rng.normal(size=64))
    assert dyadic.cond_exp(f, 6, "F").allclose(f)
    assert dyadic.cond_exp(f, 0, "F*").allclose(f)
    np.testing.assert_allclose(dyadic.cond_exp(f, 0, "F").values, f.values.mean(), atol=1e-14)
    with pytest.raises(ValueError):
        dyadic.cond_exp(f, 7)


def test_reverse_cond_exp_on_walsh_functions():
    m = 8
    for n in range(m + 1):
        for a in range(1, 2**m):
            w = dyadic.walsh_function(a, m)
            # brute-force average over the 2^n shifts of the first n coordinates
            v = w.values.reshape(-1, 2**n).mean(axis=1).repeat(2**n)
            got = dyadic.cond_exp(w, n, "F*").values
            np.testing.assert_allclose(got, v, atol=1e-12)
            low = (a & -a).bit_length()
            np.testing.assert_allclose(got, w.values if low > n else 0.0, atol=1e-12)


@given(values_at(5), st.integers(0, 5), st.sampled_from(["F", "F*"]))
def test_cond_exp_idempotent_and_mean_preserving(v, n, kind):
    f = DyadicFunction(v)
    g = dyadic.cond_exp(f, n, kind)
    assert dyadic.cond_exp(g, n, kind).allclose(g, atol=1e-9)
    assert g.mean() == pytest.approx(f.mean(), abs=1e-9)


def test_martingale_differences_of_walsh_function():
    m = 6
    for a in range(2**m):
        w = dyadic.walsh_function(a, m)
        for k in range(m + 1):
            d = dyadic.martingale_diff(w, k)
            assert d.allclose(w if a.bit_length() == k else 0 * w)


def test_martingale_differences_sum_to_f(rng):
    f = DyadicFunction(rng.normal(size=1024))
    total = sum((dyadic.martingale_diff(f, k) for k in range(11)), DyadicFunction.constant(0, 10))
    assert total.allclose(f, atol=1e-12)


def test_square_function_examples(rng):
    a, b = 1.5, -2.0
    f = a * dyadic.walsh_function(0, 4) + b * dyadic.walsh_function(1, 4)
    np.testing.assert_allclose(dyadic.square_function(f).values, np.hypot(a, b), atol=1e-14)
    assert dyadic.h1_norm(dyadic.walsh_function(0b1011, 4)).value == pytest.approx(1.0)
    g = DyadicFunction(rng.normal(size=256))
    sf = dyadic.square_function(g)
    sw = dyadic.square_function_walsh(g)
    np.testing.assert_allclose(sf.values, getattr(sw, "values", sw), atol=1e-12)


def test_kappa_closed_form():
    assert np.all(dyadic.kappa(0, 6).values == 1)
    # x with min x = 2: index bit 0 clear, bit 1 set
    assert dyadic.kappa(2, 4).values[2] == -2
    for n in range(11):
        np.testing.assert_allclose(dyadic.kappa(n, 10).values, dyadic.kappa_walsh_sum(n, 10).values, atol=1e-12)


def test_kappa_oracle_from_walsh_functions():
    m = 5
    for n in range(m + 1):
        direct = sum(
            (dyadic.walsh_function(a, m).values for a in range(2**m) if a.bit_length() == n),
            np.zeros(2**m),
        )
        np.testing.assert_allclose(dyadic.kappa(n, m).values, direct, atol=1e-12)


def test_convolution(rng):
    m = 8
    f = DyadicFunction(rng.normal(size=2**m))
    g = DyadicFunction(rng.normal(size=2**m))
    delta = np.zeros(2**m)
    delta[0] = 2**m
    assert dyadic.walsh_convolve(DyadicFunction(delta), f).allclose(f, atol=1e-12)
    assert dyadic.walsh_convolve(f, g).allclose(dyadic.walsh_convolve(g, f), atol=1e-12)
    for n in range(m + 1):
        assert dyadic.walsh_convolve(dyadic.kappa(n, m), f).allclose(dyadic.martingale_diff(f, n), atol=1e-12)
    with pytest.raises(ValueError):
        dyadic.walsh_convolve(f, DyadicFunction(np.ones(4)))


def test_convolution_direct_xor_oracle(rng):
    m = 4
    f, g = rng.normal(size=16), rng.normal(size=16)
    idx = np.arange(16)
    direct = np.array([np.mean(f[idx] * g[i ^ idx]) for i in range(16)])
    np.testing.assert_allclose(dyadic.walsh_convolve(DyadicFunction(f), DyadicFunction(g)).values, direct, atol=1e-12)


def test_dilation_shifts_walsh_index(rng):
    m = 5
    for a in range(2**m):
        assert dyadic.dilation(dyadic.walsh_function(a, m)).allclose(dyadic.walsh_function(a << 1, m + 1))
    f = DyadicFunction(rng.normal(size=2**m))
    g = DyadicFunction(rng.normal(size=2**m))
    assert dyadic.dilation(f * g).allclose(dyadic.dilation(f) * dyadic.dilation(g))
    assert np.allclose(np.sort(dyadic.dilation(f).values), np.sort(np.repeat(f.values, 2)))
    assert dyadic.square_function(dyadic.dilation(f)).allclose(dyadic.dilation(dyadic.square_function(f)), atol=1e-12)


def test_block_spec_validation():
    dyadic.BlockSpec(((1, 2), (3, 5)))
    with pytest.raises(ValueError):
        dyadic.BlockSpec(((1, 3), (3, 5)))
    with pytest.raises(ValueError):
        dyadic.BlockSpec(((2, 1),))


def test_block_projection_keeps_coefficients_inside_one_block(rng):
    m = 6
    spec = dyadic.BlockSpec(((1, 2), (4, 6)))
    f = DyadicFunction(rng.normal(size=2**m))
    c = dyadic.walsh_transform(dyadic.block_projection(f, spec))
    c0 = dyadic.walsh_transform(f)
    for a in range(2**m):
        inside = a == 0 or any((a & ~mask) == 0 for mask in spec.masks())
        assert c[a] == pytest.approx(c0[a] if inside else 0.0, abs=1e-12)


@given(values_at(6))
def test_block_projection_idempotent(v):
    spec = dyadic.BlockSpec(((2, 3), (5, 6)))
    p = dyadic.block_projection(DyadicFunction(v), spec)
    assert dyadic.block_projection(p, spec).allclose(p, atol=1e-9)


@given(values_at(6))
def test_square_function_preserves_l2(v):
    f = DyadicFunction(v)
    s = dyadic.square_function(f).values
    assert np.mean(s**2) == pytest.approx(np.mean(v**2), rel=1e-9, abs=1e-9)


@given(arrays(np.float64, (4, 32), elements=st.floats(-10, 10, allow_nan=False)), st.integers(0, 5))
def test_truncation_remainder_bounded_pointwise(data, cut):
    fs = dyadic.VectorDyadicFunction(data)
    rem = dyadic.trunc_remainder(fs, cut).values
    bound = dyadic.trunc_bound(fs, cut).values
    assert np.all(np.abs(rem) <= bound + 1e-9)


def test_truncated_pv_scalar_is_sum_of_vector(rng):
    fs = dyadic.VectorDyadicFunction(rng.normal(size=(5, 32)))
    vec = dyadic.truncated_pv(fs, 3, "vector")
    sca = dyadic.truncated_pv(fs, 3, "scalar")
    np.testing.assert_allclose(vec.data.sum(axis=0), sca.values, atol=1e-12)
    assert np.all(vec.data[4] == 0)


def test_iota_is_isometry_from_h1(rng):
    f = DyadicFunction(rng.normal(size=128))
    assert dyadic.iota(f).l1_l2_norm() == pytest.approx(dyadic.h1_norm(f).value, rel=1e-12)
