"""Valued binary trees and the two tree norms.

A tree of height ``n`` is stored in level order: the root at index 0 and the
children of node ``i`` at ``2i + 1`` and ``2i + 2``; level ``l`` occupies
``[2**l - 1, 2**(l+1) - 1)``.  A starred tree carries one extra label
``top`` attached above the root, written ``top ^ U``.

``triple_norm`` is the recursive norm

    |||u||| = |u|,   |||U1 ^ a ^ U2||| = (sqrt(a^2 + |||U1|||^2) + sqrt(a^2 + |||U2|||^2)) / 2,
    |||a ^ U||| = sqrt(a^2 + |||U|||^2),

and ``bar_norm`` averages over the leaves the Euclidean norm of the labels on
the path to the top.
"""

import csv
import io
from dataclasses import dataclass, field
from typing import Optional

import numpy as np
from scipy import optimize

from .extremal import FiniteFiltration

__all__ = [
    "ValuedTree",
    "triple_norm",
    "triple_norm_recursive",
    "triple_norm_collapse",
    "prime",
    "bar_norm",
    "path_norms",
    "tree_to_phis",
    "concat",
    "star",
    "ratio",
    "ratio_and_grad",
    "SearchResult",
    "ratio_search",
]

MAX_EXACT_HEIGHT = 14


def _height_of(size):
    h = int(size + 1).bit_length() - 2
    if 2 ** (h + 1) - 1 != size:
        raise ValueError(f"{size} labels do not fill a complete binary tree")
    return h


@dataclass(frozen=True, eq=False)
class ValuedTree:
    """Real labels on a full binary tree, optionally with a top label (``T*``)."""

    values: np.ndarray
    top: Optional[float] = None

    def __post_init__(self):
        v = np.array(self.values, dtype=float).reshape(-1)
        _height_of(v.size)
        v.setflags(write=False)
        object.__setattr__(self, "values", v)
        if self.top is not None:
            object.__setattr__(self, "top", float(self.top))

    @property
    def height(self):
        return _height_of(self.values.size)

    @property
    def is_star(self):
        return self.top is not None

    def level(self, l):
        return self.values[2**l - 1 : 2 ** (l + 1) - 1]

    def levels(self):
        return [self.level(l) for l in range(self.height + 1)]

    @classmethod
    def from_levels(cls, levels, top=None):
        return cls(np.concatenate([np.atleast_1d(np.asarray(l, dtype=float)) for l in levels]), top)

    @classmethod
    def random(cls, height, rng, star=False, nonnegative=True):
        v = rng.exponential(size=2 ** (height + 1) - 1) if nonnegative else rng.normal(size=2 ** (height + 1) - 1)
        top = (rng.exponential() if nonnegative else rng.normal()) if star else None
        return cls(v, top)

    def scaled(self, c):
        return ValuedTree(self.values * c, None if self.top is None else self.top * c)

    def to_json_dict(self):
        d = {"height": self.height, "levels": [l.tolist() for l in self.levels()]}
        if self.is_star:
            d["top"] = self.top
        return d

    @classmethod
    def from_json_dict(cls, d):
        tree = cls.from_levels(d["levels"], d.get("top"))
        if "height" in d and tree.height != d["height"]:
            raise ValueError("height does not match the number of levels")
        return tree


def concat(left, a, right):
    """``U1 ^ a ^ U2``: new root ``a`` with subtrees ``U1`` and ``U2`` of equal height."""
    if left.is_star or right.is_star or left.height != right.height:
        raise ValueError("need two plain trees of equal height")
    levels = [np.array([a])]
    for l in range(left.height + 1):
        levels.append(np.concatenate([left.level(l), right.level(l)]))
    return ValuedTree.from_levels(levels)


def star(a, tree):
    """``a ^ U``."""
    if tree.is_star:
        raise ValueError("tree already has a top label")
    return ValuedTree(tree.values, a)


def triple_norm_recursive(tree):
    """Top-down evaluation straight from the recursive definition."""
    v = tree.values
    n_internal = 2**tree.height - 1

    def node(i):
        if i >= n_internal:
            return abs(v[i])
        a2 = v[i] ** 2
        return 0.5 * (np.sqrt(a2 + node(2 * i + 1) ** 2) + np.sqrt(a2 + node(2 * i + 2) ** 2))

    root = node(0)
    return float(np.sqrt(tree.top**2 + root**2)) if tree.is_star else float(root)


def prime(tree):
    """Remove the two lowest rows, writing ``(sqrt(a^2+b^2) + sqrt(a^2+c^2)) / 2`` in place of each ``b ^ a ^ c``."""
    if tree.height == 0:
        raise ValueError("a tree of height 0 has nothing to collapse")
    levels = tree.levels()
    parents, leaves = levels[-2], np.abs(levels[-1])
    a2 = parents**2
    merged = 0.5 * (np.sqrt(a2 + leaves[0::2] ** 2) + np.sqrt(a2 + leaves[1::2] ** 2))
    return ValuedTree.from_levels(levels[:-2] + [merged], tree.top)


def triple_norm_collapse(tree):
    """Bottom-up evaluation by repeated :func:`prime`."""
    while tree.height > 0:
        tree = prime(tree)
    u = abs(tree.values[0])
    return float(np.hypot(tree.top, u)) if tree.is_star else float(u)


def triple_norm(tree, check=True):
    """``|||U|||``; with ``check`` both evaluation orders must agree to 1e-12 (relative)."""
    value = triple_norm_collapse(tree)
    if check and tree.height <= MAX_EXACT_HEIGHT:
        other = triple_norm_recursive(tree)
        if abs(other - value) > 1e-12 * max(1.0, value):
            raise AssertionError(f"tree norm evaluations disagree: {value} vs {other}")
    return value


def path_norms(tree):
    """Euclidean norm of the labels on the path from each leaf to the top."""
    sq = np.array([tree.top**2 if tree.is_star else 0.0])
    for lev in tree.levels():
        sq = np.repeat(sq, 2)[: lev.size] + lev**2 if lev.size > 1 else sq + lev**2
    return np.sqrt(sq)


def bar_norm(tree):
    """``||U|| = 2**-n sum_leaves (U(x)^2 + U(parent x)^2 + ...)^(1/2)``."""
    return float(path_norms(tree).mean())


def ratio(tree):
    """``|||U||| / ||U||``."""
    b = bar_norm(tree)
    return triple_norm(tree, check=False) / b if b > 0 else np.nan


def tree_to_phis(tree):
    """Adapted sequence on ``{0,1}^(n+1)`` realising a starred tree of height ``n-1``.

    Level ``n-1-k`` of the tree (``k = 0`` the leaves, ``k = n-1`` the root)
    becomes ``g_k`` and the top label becomes ``g_n``.  The sequence is
    ``phi_k(x) = (-1)**x_{k+1} g_k(x_{k+2}, ..., x_n)``, ``k = 0..n``,
    with the filtration ``F*_k`` generated by ``x_{k+1}, ..., x_{n+1}``.
    The extra coordinate ``x_{n+1}`` carries the sign of the top label, so
    that ``E*_{k+1} phi_k = 0`` for every ``k``.

    Returns ``(phis, filtration)`` in the indexing of :mod:`hardylab.extremal`,
    where ``phis[k]`` is ``phi_k`` and sits at level ``k+1``.  Then
    ``lambda_recursion`` gives ``|||U|||`` and ``objective`` gives ``||U||``.
    """
    if not tree.is_star:
        raise ValueError("tree_to_phis needs a starred tree")
    if np.any(tree.values < 0) or tree.top < 0:
        raise ValueError("labels must be nonnegative")
    n = tree.height + 1
    idx = np.arange(2 ** (n + 1))
    levels = tree.levels()
    phis = np.empty((n + 1, idx.size))
    for k in range(n + 1):
        sign = 1.0 - 2.0 * ((idx >> k) & 1)
        if k == n:
            g = np.full(idx.size, tree.top)
        else:
            lev = levels[n - 1 - k]
            g = lev[(idx >> (k + 1)) & (lev.size - 1)]
        phis[k] = sign * g
    filt = FiniteFiltration(np.full(idx.size, 1.0 / idx.size), tuple(idx >> k for k in range(n + 1)))
    return phis, filt


def ratio_and_grad(values, top=1.0):
    """Ratio ``|||top ^ G||| / ||top ^ G||`` and its gradient in the labels of ``G``."""
    h = _height_of(values.size)
    v = np.abs(values)
    sgn = np.where(values < 0, -1.0, 1.0)
    # forward pass, level by level from the leaves
    starts = [2**l - 1 for l in range(h + 2)]
    t = np.empty_like(v)
    t[starts[h] :] = v[starts[h] :]
    r_cache = {}
    for l in range(h - 1, -1, -1):
        a = v[starts[l] : starts[l + 1]]
        kids = t[starts[l + 1] : starts[l + 2]]
        rl = np.sqrt(a**2 + kids[0::2] ** 2)
        rr = np.sqrt(a**2 + kids[1::2] ** 2)
        r_cache[l] = (rl, rr)
        t[starts[l] : starts[l + 1]] = 0.5 * (rl + rr)
    triple = np.sqrt(top**2 + t[0] ** 2)
    # backward pass
    dt = np.zeros_like(v)
    dt[0] = t[0] / triple if triple > 0 else 0.0
    dv = np.zeros_like(v)
    for l in range(h):
        a = v[starts[l] : starts[l + 1]]
        kids = t[starts[l + 1] : starts[l + 2]]
        rl, rr = r_cache[l]
        g = dt[starts[l] : starts[l + 1]]
        with np.errstate(invalid="ignore", divide="ignore"):
            il = np.where(rl > 0, 1.0 / rl, 0.0)
            ir = np.where(rr > 0, 1.0 / rr, 0.0)
        dv[starts[l] : starts[l + 1]] += g * 0.5 * a * (il + ir)
        dk = np.empty_like(kids)
        dk[0::2] = g * 0.5 * kids[0::2] * il
        dk[1::2] = g * 0.5 * kids[1::2] * ir
        dt[starts[l + 1] : starts[l + 2]] = dk
    dv[starts[h] :] += dt[starts[h] :]
    # bar norm and its gradient
    sq = np.array([top**2])
    for l in range(h + 1):
        sq = np.repeat(sq, 2)[: 2**l] + v[starts[l] : starts[l + 1]] ** 2 if l else sq + v[0] ** 2
    leaf = np.sqrt(sq)
    bar = leaf.mean()
    inv = np.where(leaf > 0, 1.0 / np.where(leaf > 0, leaf, 1.0), 0.0) / leaf.size
    db = np.empty_like(v)
    acc = inv
    for l in range(h, -1, -1):
        db[starts[l] : starts[l + 1]] = v[starts[l] : starts[l + 1]] * acc
        acc = acc[0::2] + acc[1::2] if acc.size > 1 else acc
    value = triple / bar
    grad = (dv / bar - triple * db / bar**2) * sgn
    return float(value), grad


@dataclass
class SearchResult:
    """Best starred tree ``1 ^ G`` per height and the search trace."""

    best: dict = field(default_factory=dict)
    trace: list = field(default_factory=list)

    @property
    def best_ratio(self):
        return self.trace[-1][1] if self.trace else np.nan

    def best_tree(self, height=None):
        height = max(self.best) if height is None else height
        return star(1.0, ValuedTree(self.best[height]))

    def trace_csv(self):
        buf = io.StringIO()
        w = csv.writer(buf, lineterminator="\r\n")
        w.writerow(["height", "best_ratio", "evaluations"])
        for h, r, e in self.trace:
            w.writerow([h, repr(float(r)), e])
        return buf.getvalue()


def _embed(g):
    """``G ^ 0 ^ G`` keeps the ratio of ``1 ^ G`` unchanged."""
    t = ValuedTree(g)
    return concat(t, 0.0, t).values


def _spike(h):
    # a single heavy leaf: |||.||| stays near sqrt(2) while ||.|| grows to about 2
    g = np.zeros(2**h - 1)
    g[-1] = 2.0 ** (h - 1)
    return g


def ratio_search(height, strategy="coordinate_descent", budget=20000, seed=0, pool_size=6, restarts=12):
    """Search for starred trees ``1 ^ G`` with small ``|||1^G||| / ||1^G||``.

    ``height`` counts the edges from the top label down to the leaves, so
    ``G`` has height ``height - 1``; at height 1 the two norms coincide.

    Strategies
    ----------
    doubling
        ``G = U ^ 0 ^ V`` for ``U, V`` from the previous height's pool.
    scaling
        ``G = (H/a) ^ sqrt(a^2-1)/a ^ (H/a)``, which maps the ratio of
        ``1 ^ H/a`` at the previous height to the current one.
    coordinate_descent
        Both moves above plus sparse random starts, followed by bounded
        quasi-Newton refinement (L-BFGS-B with exact gradients).

    Every height also tries ``G ^ 0 ^ G`` on the previous best, so the trace
    is nonincreasing.  ``budget`` caps ratio evaluations per height; when it
    runs out the best tree so far is kept.
    """
    if height < 1 or height > MAX_EXACT_HEIGHT:
        raise ValueError(f"height must lie in [1, {MAX_EXACT_HEIGHT}]")
    if strategy not in ("doubling", "scaling", "coordinate_descent"):
        raise ValueError(f"unknown strategy {strategy!r}")
    rng = np.random.default_rng(seed)
    result = SearchResult()
    pool = []
    for h in range(1, height + 1):
        size = 2**h - 1
        evals = 0
        cands, starts = [], []
        if h == 1:
            cands = [np.array([x]) for x in (0.0, 0.5, 1.0, 2.0, 4.0)]
        else:
            best_prev = result.best[h - 1]
            cands.append(_embed(best_prev))
            cands.append(_spike(h))
            if strategy in ("doubling", "coordinate_descent"):
                for i, u in enumerate(pool):
                    for v in pool[i:]:
                        cands.append(concat(ValuedTree(u), 0.0, ValuedTree(v)).values)
            if strategy in ("scaling", "coordinate_descent"):
                for g in pool[:2]:
                    for a in (1.1, 1.5, 2.0, 3.0):
                        gt = ValuedTree(g / a)
                        cands.append(concat(gt, np.sqrt(a * a - 1) / a, gt).values)
            if strategy == "coordinate_descent":
                for _ in range(restarts):
                    x = rng.exponential(size=size) * rng.choice([0.1, 1.0, 5.0])
                    x[rng.uniform(size=size) < 0.5] = 0.0
                    starts.append(x)
                embedded = _embed(best_prev)
                for _ in range(2):
                    starts.append(embedded * rng.uniform(0.8, 1.2, size) + 0.05 * rng.exponential(size=size))
        scored = []
        for c in cands:
            if evals >= budget:
                break
            scored.append((ratio_and_grad(c)[0], c))
            evals += 1
        scored.sort(key=lambda s: s[0])
        if strategy == "coordinate_descent" and h > 1:
            refined = []
            for c in [c for _, c in scored[:pool_size]] + starts:
                if evals >= budget:
                    break
                r0 = ratio_and_grad(c)[0]
                res = optimize.minimize(
                    ratio_and_grad, c, jac=True, method="L-BFGS-B",
                    bounds=[(0, None)] * size,
                    options={"maxfun": max(1, min(3000, budget - evals)), "ftol": 1e-13, "gtol": 1e-10},
                )
                evals += int(res.nfev) + 1
                x = np.maximum(res.x, 0.0)
                r1 = ratio_and_grad(x)[0]
                refined.append((r1, x) if r1 < r0 else (r0, c))
            scored = sorted(refined + scored, key=lambda s: s[0])
        best_r, best_g = scored[0]
        if h > 1 and best_r > result.trace[-1][1]:
            best_r, best_g = result.trace[-1][1], _embed(result.best[h - 1])
        result.best[h] = best_g
        result.trace.append((h, float(best_r), evals))
        pool = [g for _, g in scored[:pool_size]]
        if not any(np.array_equal(best_g, g) for g in pool):
            pool.insert(0, best_g)
    return result
