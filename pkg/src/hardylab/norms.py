"""Norms and functionals on finite probability spaces.

Functions take either a :class:`DiscreteVectorFunction` (a family of random
variables, each on its own finite space) or a plain ``(values, weights)``
pair.  ``values`` may be scalar (shape ``(n_atoms,)``) or vector valued
(shape ``(n_atoms, B)``); vector values are measured in the Euclidean norm.
"""

import warnings
from dataclasses import dataclass

import numpy as np
from scipy import optimize

from ._validation import check_probability_weights, pointwise_norm
from .dyadic import VectorDyadicFunction, fwht, walsh_max, walsh_transform
from .reports import NormReport

__all__ = [
    "DiscreteVectorFunction",
    "l1_norm",
    "l2_norm",
    "l1_l2_norm",
    "ind_norm_exact",
    "ind_norm_mc",
    "phi1",
    "orlicz_norm",
    "disjoint_sum_orlicz",
    "radial_truncation_value",
    "l1_plus_l2_inf",
    "MartingaleSubspace",
    "SpanSubspace",
    "ind_decomposition_inf",
    "weak_l1",
]

#: Largest support handled by exact product-space enumeration.
MAX_PRODUCT_ATOMS = 2**24
ORLICZ_TOL = 1e-10
SMOOTHING_SCHEDULE = (1e-2, 1e-3, 1e-4)


def _uniform(n):
    return np.full(n, 1.0 / n)


@dataclass(frozen=True, eq=False)
class DiscreteVectorFunction:
    """Finite family ``(f_1, ..., f_n)`` of random variables on finite spaces.

    Parameters
    ----------
    values : sequence of arrays
        ``values[k]`` holds the atoms of ``f_k``, shape ``(a_k,)`` or ``(a_k, B)``.
    weights : sequence of arrays
        Probability weights of the atoms; each sums to one.
    common_space : bool
        True when all components are functions on one and the same space
        (then ``l1_l2_norm`` is meaningful).  Set by :meth:`from_common`.
    """

    values: tuple
    weights: tuple
    common_space: bool = False

    def __post_init__(self):
        vals = tuple(np.asarray(v, dtype=float) for v in self.values)
        ws = tuple(np.asarray(w, dtype=float) for w in self.weights)
        if len(vals) != len(ws):
            raise ValueError("one weight vector per component is required")
        for v, w in zip(vals, ws):
            if v.ndim not in (1, 2):
                raise ValueError("component values must be 1-d or 2-d")
            check_probability_weights(w, v.shape[0])
        if self.common_space and len({v.shape[0] for v in vals}) > 1:
            raise ValueError("components on a common space need equal atom counts")
        object.__setattr__(self, "values", vals)
        object.__setattr__(self, "weights", ws)

    @classmethod
    def from_components(cls, components):
        """Build from ``[(values, weights), ...]``; ``weights=None`` means uniform."""
        vals, ws = [], []
        for v, w in components:
            v = np.asarray(v, dtype=float)
            vals.append(v)
            ws.append(_uniform(v.shape[0]) if w is None else w)
        return cls(tuple(vals), tuple(ws))

    @classmethod
    def from_common(cls, values, weights=None):
        """All components on one space: ``values`` has shape ``(n, n_atoms[, B])``."""
        values = np.asarray(values, dtype=float)
        w = _uniform(values.shape[1]) if weights is None else np.asarray(weights, dtype=float)
        return cls(tuple(values), tuple(w for _ in range(values.shape[0])), True)

    @classmethod
    def from_dyadic(cls, fs: VectorDyadicFunction):
        return cls.from_common(fs.data)

    @property
    def n_components(self):
        return len(self.values)

    def magnitudes(self):
        return [pointwise_norm(v) for v in self.values]


def _pair(values, weights):
    v = np.asarray(values, dtype=float)
    w = _uniform(v.shape[0]) if weights is None else np.asarray(weights, dtype=float)
    if w.shape != (v.shape[0],) or np.any(w < 0):
        raise ValueError("weights must be non-negative, one per atom")
    return v, w


def l1_norm(values, weights=None):
    v, w = _pair(values, weights)
    return float(w @ pointwise_norm(v))


def l2_norm(values, weights=None):
    v, w = _pair(values, weights)
    return float(np.sqrt(w @ pointwise_norm(v) ** 2))


def l1_l2_norm(fs):
    """``int (sum_k |f_k(x)|^2)^(1/2) dmu(x)`` for components sharing one space."""
    if isinstance(fs, VectorDyadicFunction):
        fs = DiscreteVectorFunction.from_dyadic(fs)
    if not fs.common_space and fs.n_components > 1:
        raise ValueError("l1_l2_norm needs components defined on a common space")
    sq = sum(m**2 for m in fs.magnitudes())
    return NormReport(float(fs.weights[0] @ np.sqrt(sq)), "exact")


def _collapsed(mag, w):
    # distribution of |f_k|^2: merge equal values
    sq, inv = np.unique(mag**2, return_inverse=True)
    return sq, np.bincount(inv.reshape(-1), weights=w)


def ind_norm_exact(fs):
    """Independent-sum norm ``E (sum_k |f_k(omega_k)|^2)^(1/2)`` by enumeration.

    The components are taken independent.  Only the distribution of the
    running sum of squares is kept, merged after each component, so the cost
    is bounded by the number of distinct partial sums.
    """
    if isinstance(fs, VectorDyadicFunction):
        fs = DiscreteVectorFunction.from_dyadic(fs)
    s_vals, s_w = np.zeros(1), np.ones(1)
    for mag, w in zip(fs.magnitudes(), fs.weights):
        sq, wq = _collapsed(mag, w)
        if s_vals.size * sq.size > MAX_PRODUCT_ATOMS:
            raise ValueError(
                f"product space has more than {MAX_PRODUCT_ATOMS} atoms; use ind_norm_mc"
            )
        s_vals, inv = np.unique(np.add.outer(s_vals, sq).ravel(), return_inverse=True)
        s_w = np.bincount(inv.reshape(-1), weights=np.multiply.outer(s_w, wq).ravel())
    return NormReport(float(s_w @ np.sqrt(s_vals)), "exact")


def ind_norm_mc(fs, samples=100_000, seed=0, chunk=1 << 16):
    """Monte Carlo estimate of the independent-sum norm.

    Each component draws from its own child stream of ``SeedSequence(seed)``,
    so the estimate is reproducible and independent of chunking.
    """
    if isinstance(fs, VectorDyadicFunction):
        fs = DiscreteVectorFunction.from_dyadic(fs)
    samples = int(samples)
    if samples < 1000:
        raise ValueError("use at least 1000 samples")
    rngs = [np.random.default_rng(s) for s in np.random.SeedSequence(seed).spawn(fs.n_components)]
    mags = fs.magnitudes()
    total = np.zeros(samples)
    for rng, mag, w in zip(rngs, mags, fs.weights):
        idx = rng.choice(mag.shape[0], size=samples, p=w / w.sum())
        total += mag[idx] ** 2
    draws = np.sqrt(total)
    err = float(draws.std(ddof=1) / np.sqrt(samples))
    return NormReport(float(draws.mean()), "monte_carlo", err, samples, seed)


def phi1(x):
    """Orlicz function ``x^2`` on ``[0, 1]`` and ``2x - 1`` beyond."""
    x = np.asarray(x, dtype=float)
    return np.where(x <= 1, x**2, 2 * x - 1)


def _orlicz(mag, w):
    mag = np.asarray(mag, dtype=float)
    keep = (mag > 0) & (w > 0)
    mag, w = mag[keep], w[keep]
    if mag.size == 0:
        warnings.warn("Orlicz norm of the zero function is 0 by convention", stacklevel=3)
        return NormReport(0.0, "exact")
    # Phi_1(x) <= min(x^2, 2x) gives an upper bracket
    hi = min(np.sqrt(w @ mag**2), 2 * (w @ mag))
    # the bracket can sit on the root itself; rounding may then put it on the wrong side
    while w @ phi1(mag / hi) >= 1:
        hi *= 1 + 1e-9
    lo = hi / 2
    while w @ phi1(mag / lo) <= 1:
        lo /= 2
    k = optimize.brentq(lambda k: w @ phi1(mag / k) - 1.0, lo, hi, xtol=ORLICZ_TOL * hi / 10)
    return NormReport(float(k), "exact", error=ORLICZ_TOL * hi)


def orlicz_norm(values, weights=None):
    """Luxemburg norm ``inf{k > 0 : int Phi_1(|f|/k) <= 1}``."""
    v, w = _pair(values, weights)
    return _orlicz(pointwise_norm(v), w)


def disjoint_sum_orlicz(fs):
    """Orlicz norm of the function on the disjoint union of the component spaces.

    Each component keeps its own probability measure, so the union has total
    mass ``n``.
    """
    mags = np.concatenate(fs.magnitudes())
    ws = np.concatenate(fs.weights)
    return _orlicz(mags, ws)


def radial_truncation_value(mag, w, c, t):
    """``||f - h||_1 + t ||h||_2`` for ``h = f min(1, c/|f|)``, vectorised over ``c``."""
    c = np.asarray(c, dtype=float)
    excess = np.maximum(mag[None, :] - c[..., None], 0.0) @ w
    kept = np.minimum(mag[None, :], c[..., None]) ** 2 @ w
    return excess + t * np.sqrt(kept)


def _unconstrained_k(mag, w, t):
    order = np.argsort(mag)
    a, wa = mag[order], w[order]
    above = np.concatenate([np.cumsum(wa[::-1])[::-1], [0.0]])
    below_sq = np.concatenate([[0.0], np.cumsum(wa * a**2)])
    # on (a_{i-1}, a_i) the mass above is above[i] and the squares below are below_sq[i]
    cands = [np.zeros(1), a]
    B, D = above[: a.size], below_sq[: a.size]
    ok = t**2 > B
    stat = np.sqrt(np.where(ok, D, 0.0) / np.where(ok, t**2 - B, 1.0))
    lower = np.concatenate([[0.0], a[:-1]])
    cands.append(np.clip(stat[ok], lower[ok], a[ok]))
    cands = np.concatenate(cands)
    vals = radial_truncation_value(mag, w, cands, t)
    i = int(np.argmin(vals))
    return float(vals[i]), float(cands[i])


class MartingaleSubspace:
    """The image ``iota(H(delta))`` inside ``L(l^2)`` at resolution ``m``.

    An element is ``(Delta_0 g, ..., Delta_m g)``; it is parametrised by the
    Walsh coefficients of ``g``, an orthonormal system, so the ``L^2(l^2)``
    norm of the element equals the Euclidean norm of the coefficients.
    """

    def __init__(self, m):
        self.m = int(m)
        self.level = walsh_max(np.arange(2**self.m))

    @property
    def dim(self):
        return 2**self.m

    def synthesize(self, coef):
        out = np.zeros((2**self.m, self.m + 1))
        for n in range(self.m + 1):
            out[:, n] = fwht(np.where(self.level == n, coef, 0.0))
        return out

    def adjoint(self, u):
        """Gradient pullback: ``E[<u(x), d synthesize(c)(x) / dc_A>]``."""
        grad = np.zeros(2**self.m)
        for n in range(self.m + 1):
            sel = self.level == n
            grad[sel] = fwht(u[:, n])[sel] / 2**self.m
        return grad

    def coefficients(self, f):
        """Coefficients of ``f`` (shape ``(2**m, m+1)``) if it lies in the subspace."""
        coef = np.zeros(2**self.m)
        for n in range(self.m + 1):
            c = walsh_transform(f[:, n])
            coef[self.level == n] = c[self.level == n]
        return coef

    @property
    def weights(self):
        return _uniform(2**self.m)


class SpanSubspace:
    """Span of given vectors in ``L^2(mu)``, orthonormalised in the weighted inner product."""

    def __init__(self, basis, weights):
        basis = np.asarray(basis, dtype=float)
        self.weights = np.asarray(weights, dtype=float)
        sw = np.sqrt(self.weights)[:, None]
        q, r = np.linalg.qr(sw * basis)
        rank = int(np.sum(np.abs(np.diag(r)) > 1e-12 * max(1.0, np.abs(r).max())))
        self.q = q[:, :rank] / sw

    @property
    def dim(self):
        return self.q.shape[1]

    def synthesize(self, coef):
        return self.q @ coef

    def adjoint(self, u):
        return self.q.T @ (self.weights * u)

    def coefficients(self, f):
        return self.adjoint(f)


def _constrained_k(f, space, t, restarts, seed):
    w = space.weights
    coef_f = space.coefficients(f)
    if not np.allclose(space.synthesize(coef_f), f, atol=1e-9 * max(1.0, np.abs(f).max())):
        raise ValueError("f does not lie in the constraining subspace")

    def exact(c):
        r = f - space.synthesize(c)
        return float(w @ pointwise_norm(r) + t * np.linalg.norm(c))

    def smoothed(c, eps):
        r = f - space.synthesize(c)
        rn = np.sqrt(pointwise_norm(r) ** 2 + eps**2)
        cn = np.sqrt(c @ c + eps**2)
        u = r / (rn[:, None] if r.ndim == 2 else rn)
        grad = -space.adjoint(u) + t * c / cn
        return float(w @ rn + t * cn), grad

    rng = np.random.default_rng(seed)
    starts = [np.zeros_like(coef_f), coef_f.copy()]
    while len(starts) < restarts:
        lam = rng.uniform()
        starts.append(lam * coef_f + 0.1 * rng.normal(size=coef_f.shape) * np.linalg.norm(coef_f) / np.sqrt(coef_f.size))
    best_val, best_c = np.inf, None
    for c in starts:
        for eps in SMOOTHING_SCHEDULE:
            res = optimize.minimize(smoothed, c, args=(eps,), jac=True, method="L-BFGS-B",
                                    options={"maxiter": 200, "gtol": 1e-10, "ftol": 1e-14})
            c = res.x
        val = exact(c)
        if val < best_val:
            best_val, best_c = val, c
    # endpoints h = 0 and h = f are always admissible
    best_val = min(best_val, exact(np.zeros_like(coef_f)), exact(coef_f))
    return best_val, best_c


def l1_plus_l2_inf(values, weights=None, t=1.0, constrained_to=None, restarts=8, seed=0):
    """``K_t(f) = inf_{g + h = f} ||g||_1 + t ||h||_2``.

    Without a constraint the optimum is a radial truncation
    ``h = f min(1, c/|f|)``; the one-dimensional problem in ``c`` is solved
    exactly over breakpoints and stationary points.  With
    ``constrained_to`` (a :class:`MartingaleSubspace` or :class:`SpanSubspace`
    containing ``f``) both parts must lie in the subspace; the smoothed
    problem is minimised by L-BFGS with a decreasing smoothing parameter and
    several restarts.  The unconstrained value is attached as ``lower_bound``.
    """
    t = float(t)
    if not t > 0:
        raise ValueError("t must be positive")
    if isinstance(values, VectorDyadicFunction):
        values = values.data.T
    v, w = _pair(values, weights)
    mag = pointwise_norm(v)
    k_free, _ = _unconstrained_k(mag, w, t)
    if constrained_to is None:
        return NormReport(k_free, "exact")
    if not np.allclose(w, constrained_to.weights):
        raise ValueError("weights do not match the subspace measure")
    k_sub, _ = _constrained_k(v, constrained_to, t, restarts, seed)
    k_sub = max(k_sub, k_free)
    return NormReport(k_sub, "exact", error=k_sub - k_free, lower_bound=k_free)


def ind_decomposition_inf(fs):
    """``inf sum_n ||g_n||_1 + (sum_n ||h_n||_2^2)^(1/2)`` over ``g_n + h_n = f_n``.

    Writing the square root as a supremum over unit vectors ``s`` and swapping
    inf and sup (convex in the decomposition, linear in ``s``) gives
    ``max_{s >= 0, |s| <= 1} sum_n K_{s_n}(f_n)``, a concave problem in ``n``
    variables whose gradient is the ``L^2`` norm of each optimal truncation.
    """
    mags = fs.magnitudes()
    ws = fs.weights
    n = len(mags)

    def k_and_grad(s):
        val, grad = 0.0, np.zeros(n)
        for i, (mag, w) in enumerate(zip(mags, ws)):
            if s[i] <= 0:
                continue
            k, c = _unconstrained_k(mag, w, s[i])
            val += k
            grad[i] = np.sqrt(w @ np.minimum(mag, c) ** 2)
        return val, grad

    def neg(s):
        val, grad = k_and_grad(s)
        return -val, -grad

    l2 = np.array([np.sqrt(w @ m**2) for m, w in zip(mags, ws)])
    s0 = l2 / np.linalg.norm(l2) if np.any(l2) else np.full(n, 1 / np.sqrt(n))
    res = optimize.minimize(
        neg, s0, jac=True, method="SLSQP", bounds=[(0, 1)] * n,
        constraints=[{"type": "ineq", "fun": lambda s: 1 - s @ s, "jac": lambda s: -2 * s}],
        options={"ftol": 1e-13, "maxiter": 500},
    )
    s = np.clip(res.x, 0, None)
    s /= max(1.0, np.linalg.norm(s))
    return NormReport(float(k_and_grad(s)[0]), "exact", error=1e-8)


def weak_l1(values, weights=None):
    """``sup_lambda lambda mu{|g| > lambda}``.

    For ``lambda`` just below an attained value ``v`` the level set is
    ``{|g| >= v}``, so the supremum is ``max_v v mu{|g| >= v}``.
    """
    v, w = _pair(values, weights)
    mag = pointwise_norm(v)
    order = np.argsort(mag)[::-1]
    a, wa = mag[order], w[order]
    tail = np.cumsum(wa)
    # ties: use the full mass of each value
    last = np.r_[a[1:] != a[:-1], True]
    return NormReport(float(np.max(a[last] * tail[last], initial=0.0)), "exact")
