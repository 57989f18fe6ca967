import numpy as np
import pytest

from hardylab import extremal
from hardylab.extremal import FiniteFiltration


def adapted(filt, rng, dist="normal"):
    draw = rng.standard_cauchy if dist == "cauchy" else rng.normal
    return np.stack([filt.cond_exp(draw(size=filt.n_atoms), k) for k in range(1, filt.depth + 1)])


def test_cond_exp_partition_extremes(rng):
    f = rng.normal(size=6)
    w = np.full(6, 1 / 6)
    np.testing.assert_allclose(extremal.cond_exp_partition(f, np.arange(6), w), f)
    np.testing.assert_allclose(extremal.cond_exp_partition(f, np.zeros(6, int), w), f.mean())


def test_tower_property(rng):
    filt = FiniteFiltration.random(32, 4, rng)
    f = rng.normal(size=32)
    for fine in range(1, 5):
        for coarse in range(fine, 5):
            np.testing.assert_allclose(filt.cond_exp(filt.cond_exp(f, fine), coarse), filt.cond_exp(f, coarse), atol=1e-12)


def test_filtration_rejects_refinement():
    with pytest.raises(ValueError):
        FiniteFiltration(np.full(4, 0.25), (np.array([0, 0, 1, 1]), np.array([0, 1, 2, 3])))


def test_lambda_recursion_trivial_cases(rng):
    filt = FiniteFiltration(np.full(4, 0.25), (np.zeros(4, int), np.zeros(4, int)))
    _, top = extremal.lambda_recursion(np.array([[3.0] * 4, [4.0] * 4]), filt)
    assert top == pytest.approx(5.0)
    filt1 = FiniteFiltration.random(8, 1, rng)
    phi = adapted(filt1, rng)
    assert extremal.lambda_recursion(phi, filt1)[1] == pytest.approx(filt1.expect(np.abs(phi[0])))


def test_lambda_recursion_rejects_non_adapted(rng):
    filt = FiniteFiltration.coordinate(3)
    with pytest.raises(ValueError):
        extremal.lambda_recursion(rng.normal(size=(3, 8)), filt)


def test_lambda_is_lower_bound_over_random_feasible(rng):
    filt = FiniteFiltration.random(16, 3, rng)
    phis = adapted(filt, rng)
    _, lam = extremal.lambda_recursion(phis, filt)
    worst = min(
        extremal.objective(extremal.random_feasible(phis, filt, rng, scale=s), filt.weights)
        for s in np.geomspace(1e-3, 3, 10_000)
    )
    assert worst >= lam - 1e-9


def test_extremal_sequence_is_feasible_and_converges(rng):
    filt = FiniteFiltration.random(32, 4, rng)
    phis = adapted(filt, rng, "cauchy")
    _, lam = extremal.lambda_recursion(phis, filt)
    gaps = []
    for M in (10.0, 1e2, 1e3):
        fs = extremal.extremal_sequence(phis, filt, M)
        for k, (f, phi) in enumerate(zip(fs, phis), start=1):
            np.testing.assert_allclose(filt.cond_exp(f, k), phi, atol=1e-10)
        gaps.append(extremal.objective(fs, filt.weights) - lam)
    assert all(g >= -1e-9 for g in gaps)
    assert gaps[0] >= gaps[1] - 1e-12 >= gaps[2] - 2e-12
    assert gaps[2] / lam < 0.01


def test_extremal_sequence_exact_when_no_clipping():
    filt = FiniteFiltration(np.full(4, 0.25), (np.array([0, 0, 1, 1]), np.zeros(4, int)))
    phis = np.array([[1.0, 1.0, 2.0, 2.0], [1.5] * 4])
    fs = extremal.extremal_sequence(phis, filt, 1e3)
    assert extremal.objective(fs, filt.weights) == pytest.approx(extremal.lambda_recursion(phis, filt)[1], abs=1e-12)


def test_constants_case():
    filt = FiniteFiltration.coordinate(2)
    phis = np.array([[1.0] * 4, [2.0] * 4])
    fs = extremal.extremal_sequence(phis, filt, 1e3)
    np.testing.assert_allclose(fs, phis)


def test_telescoping_single_term(rng):
    phi = np.abs(rng.normal(size=(1, 8)))
    w = np.full(8, 1 / 8)
    lam = extremal.telescoping_lambdas(phi, w)
    rep = extremal.telescoping_bound(phi, lam, w, "i")
    assert rep.bound == pytest.approx(2 * phi.mean())
    assert rep.holds and rep.ratio == pytest.approx(0.5)


@pytest.mark.parametrize("variant", ["i", "ii"])
def test_telescoping_random_search(rng, variant):
    w = np.full(16, 1 / 16)
    worst = 0.0
    for _ in range(200):
        phis = np.abs(rng.standard_cauchy(size=(4, 16))) * (rng.random((4, 16)) < 0.3)
        lam = extremal.telescoping_lambdas(phis, w)
        if variant == "ii" and rng.random() < 0.5:
            # pointwise recursion: equality in the hypothesis
            lam, prev = [], 0.0
            for phi in phis:
                prev = np.sqrt(phi**2 + prev**2)
                lam.append(prev)
            lam = np.array(lam)
        rep = extremal.telescoping_bound(phis, lam, w, variant)
        assert rep.holds
        worst = max(worst, rep.ratio)
    assert worst <= 1.0


def test_telescoping_rejects_negative():
    with pytest.raises(ValueError):
        extremal.telescoping_bound(-np.ones((1, 2)), np.ones(1), np.full(2, 0.5))


def test_stein_constants_case():
    filt = FiniteFiltration.coordinate(3)
    rep = extremal.check_stein_variants(np.ones((3, 8)), filt, "lepingle")
    assert rep.ratio == pytest.approx(1.0)


def test_lepingle_half_on_predictable_sequences(rng):
    filt = FiniteFiltration.coordinate(6)
    worst = np.inf
    for _ in range(200):
        # f_k measurable with respect to F*_{k-1}
        fs = np.stack([filt.cond_exp(rng.standard_cauchy(size=64), k - 1) for k in range(1, 7)])
        rep = extremal.check_stein_variants(fs, filt, "lepingle")
        worst = min(worst, rep.ratio)
    assert worst >= 0.5


def test_dual_variant_on_independent_blocks(rng):
    filt = FiniteFiltration.coordinate(6)
    idx = np.arange(64)
    worst = np.inf
    for _ in range(100):
        # f_k depends on coordinate k only, independent of F*_{k+1}
        fs = np.stack([rng.normal(size=2)[(idx >> (k - 1)) & 1] for k in range(1, 7)])
        rep = extremal.check_stein_variants(fs, filt, "duallep")
        worst = min(worst, rep.ratio)
    assert worst >= 0.5


def test_classical_variant_needs_p_above_one():
    filt = FiniteFiltration.coordinate(2)
    with pytest.raises(ValueError):
        extremal.check_stein_variants(np.ones((2, 4)), filt, "classical_p", p=1.0)
