import itertools

import numpy as np
import pytest
from hypothesis import given, strategies as st

from hardylab import extremal, trees
from hardylab.trees import ValuedTree


def bar_norm_paths(tree):
    """Independent oracle: walk every root-to-leaf path."""
    h = tree.height
    total = 0.0
    for bits in itertools.product([0, 1], repeat=h):
        node, sq = 0, tree.values[0] ** 2
        for b in bits:
            node = 2 * node + 1 + b
            sq += tree.values[node] ** 2
        if tree.is_star:
            sq += tree.top**2
        total += np.sqrt(sq)
    return total / 2**h


def test_triple_norm_examples():
    assert trees.triple_norm(ValuedTree([-2.5])) == pytest.approx(2.5)
    a, b, c = 0.7, 1.3, 2.1
    t = ValuedTree([a, b, c])
    expected = 0.5 * (np.hypot(a, b) + np.hypot(a, c))
    assert trees.triple_norm(t) == pytest.approx(expected)
    assert trees.triple_norm(ValuedTree([0.0, 1.0, 1.0])) == pytest.approx(1.0)


def test_bar_norm_examples(rng):
    assert trees.bar_norm(ValuedTree([3.0])) == pytest.approx(3.0)
    assert trees.bar_norm(ValuedTree([0.0, 1.0, 1.0])) == pytest.approx(1.0)
    for star in (False, True):
        t = ValuedTree.random(3, rng, star=star)
        assert trees.bar_norm(t) == pytest.approx(bar_norm_paths(t), rel=1e-12)


@pytest.mark.parametrize("h", range(0, 15, 2))
def test_triple_norm_two_ways_agree(rng, h):
    t = ValuedTree.random(h, rng)
    assert trees.triple_norm_recursive(t) == pytest.approx(trees.triple_norm_collapse(t), abs=1e-12)


@given(st.integers(0, 1), st.integers(0, 2**32 - 1))
def test_norms_agree_at_small_height(h, seed):
    t = ValuedTree.random(h, np.random.default_rng(seed))
    assert trees.triple_norm(t) == pytest.approx(trees.bar_norm(t), rel=1e-12)


@given(st.integers(0, 6), st.one_of(st.just(0.0), st.floats(1e-6, 1e6)), st.integers(0, 2**32 - 1))
def test_homogeneity(h, c, seed):
    t = ValuedTree.random(h, np.random.default_rng(seed), star=True)
    assert trees.triple_norm(t.scaled(c)) == pytest.approx(c * trees.triple_norm(t), rel=1e-12)
    assert trees.bar_norm(t.scaled(c)) == pytest.approx(c * trees.bar_norm(t), rel=1e-12)


def test_concat_and_star():
    t = trees.concat(ValuedTree([1.0]), 2.0, ValuedTree([3.0]))
    np.testing.assert_array_equal(t.values, [2.0, 1.0, 3.0])
    s = trees.star(5.0, t)
    assert s.is_star and s.top == 5.0
    with pytest.raises(ValueError):
        trees.concat(ValuedTree([1.0]), 0.0, t)


def test_tree_to_phis_height_zero():
    phis, filt = trees.tree_to_phis(ValuedTree([2.0], top=0.0))
    assert set(np.abs(phis[0])) == {2.0}
    assert phis[0].mean() == 0


@pytest.mark.parametrize("h", range(0, 6))
def test_bridge_identities(rng, h):
    t = ValuedTree.random(h, rng, star=True)
    phis, filt = trees.tree_to_phis(t)
    for k, phi in enumerate(phis, start=1):
        np.testing.assert_allclose(filt.cond_exp(phi, k + 1), 0.0, atol=1e-12)
    _, lam = extremal.lambda_recursion(phis, filt)
    assert lam == pytest.approx(trees.triple_norm(t), abs=1e-10)
    assert extremal.objective(phis, filt.weights) == pytest.approx(trees.bar_norm(t), abs=1e-10)


def test_tree_to_phis_rejects_negative_labels():
    with pytest.raises(ValueError):
        trees.tree_to_phis(ValuedTree([-1.0], top=1.0))
    with pytest.raises(ValueError):
        trees.tree_to_phis(ValuedTree([1.0]))


def test_ratio_gradient_matches_finite_differences(rng):
    v = rng.exponential(size=15)
    r, g = trees.ratio_and_grad(v)
    eps = 1e-6
    for i in range(v.size):
        e = np.zeros_like(v)
        e[i] = eps
        fd = (trees.ratio_and_grad(v + e)[0] - trees.ratio_and_grad(v - e)[0]) / (2 * eps)
        assert g[i] == pytest.approx(fd, rel=1e-4, abs=1e-7)


def test_ratio_search_trace():
    res = trees.ratio_search(10, seed=0)
    ratios = dict((h, r) for h, r, _ in res.trace)
    assert ratios[1] == pytest.approx(1.0)
    assert all(ratios[h] < 1 for h in ratios if h >= 2)
    assert ratios[10] < ratios[4] < ratios[2]
    seq = [r for _, r, _ in res.trace]
    assert all(b <= a for a, b in zip(seq, seq[1:]))
    best = res.best_tree(10)
    assert trees.ratio(best) == pytest.approx(ratios[10], rel=1e-9)
