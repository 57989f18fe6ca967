"""Decreasing filtrations on finite probability spaces.

A filtration is a list of partitions ``P_1, ..., P_L`` of the atoms, each a
coarsening of the previous one; ``E*_k`` is the weighted block average over
``P_k``.  ``P_0`` is the partition into singletons and any level beyond
``L`` is the trivial partition.

The central quantity is the recursion ``lambda_0 = 0``,
``lambda_k = E*_{k+1} (|phi_k|^2 + lambda_{k-1}^2)^(1/2)``, whose mean equals
the least value of ``E (sum |f_k|^2)^(1/2)`` over all ``f_k`` with
``E*_k f_k = phi_k``.
"""

from dataclasses import dataclass
from typing import Optional

import numpy as np
from scipy.sparse import coo_matrix
from scipy.sparse.csgraph import connected_components

from ._validation import check_probability_weights
from .norms import DiscreteVectorFunction, ind_norm_exact

__all__ = [
    "FiniteFiltration",
    "cond_exp_partition",
    "is_measurable",
    "lambda_recursion",
    "clip_sequence",
    "extremal_sequence",
    "objective",
    "random_feasible",
    "telescoping_lambdas",
    "TelescopingReport",
    "telescoping_bound",
    "SteinReport",
    "check_stein_variants",
    "partitions_meet_trivial",
]

_TOL = 1e-9


def _canonical(labels):
    return np.unique(np.asarray(labels), return_inverse=True)[1].reshape(-1)


def cond_exp_partition(f, labels, weights):
    """Weighted block means of ``f`` over the partition given by ``labels``."""
    labels = _canonical(labels)
    f = np.asarray(f, dtype=float)
    w = np.asarray(weights, dtype=float)
    if labels.shape[0] != f.shape[0] or w.shape[0] != f.shape[0]:
        raise ValueError("labels, weights and f must have one entry per atom")
    mass = np.bincount(labels, weights=w)
    sums = np.bincount(labels, weights=w * f)
    return (sums / mass)[labels]


def is_measurable(f, labels, atol=_TOL):
    """True if ``f`` is constant on every block of the partition."""
    labels = _canonical(labels)
    f = np.asarray(f, dtype=float)
    lo = np.full(labels.max() + 1, np.inf)
    hi = np.full(labels.max() + 1, -np.inf)
    np.minimum.at(lo, labels, f)
    np.maximum.at(hi, labels, f)
    return bool(np.all(hi - lo <= atol * max(1.0, np.abs(f).max(initial=0.0))))


@dataclass(frozen=True, eq=False)
class FiniteFiltration:
    """Decreasing filtration ``F*_1 > F*_2 > ...`` on a finite probability space.

    Parameters
    ----------
    weights : array of shape (n_atoms,)
        Positive probabilities of the atoms.
    partitions : sequence of label arrays
        ``partitions[k-1]`` labels the blocks of ``P_k``.  Every block of
        ``P_{k+1}`` must be a union of blocks of ``P_k``.
    """

    weights: np.ndarray
    partitions: tuple

    def __post_init__(self):
        w = check_probability_weights(self.weights)
        parts = tuple(_canonical(p) for p in self.partitions)
        for p in parts:
            if p.shape[0] != w.shape[0]:
                raise ValueError("each partition needs one label per atom")
        for k, (fine, coarse) in enumerate(zip(parts, parts[1:]), start=1):
            if not is_measurable(coarse.astype(float), fine, atol=0):
                raise ValueError(f"P_{k + 1} is not a coarsening of P_{k}")
        object.__setattr__(self, "weights", w)
        object.__setattr__(self, "partitions", parts)

    @classmethod
    def coordinate(cls, n, base=2):
        """Uniform ``{0..base-1}^n`` with ``F*_k`` generated by the coordinates ``k+1..n``.

        Atom ``i`` has coordinate ``x_j`` equal to digit ``j-1`` of ``i`` in base ``base``.
        """
        size = base**n
        idx = np.arange(size)
        return cls(np.full(size, 1.0 / size), tuple(idx // base**k for k in range(1, n + 1)))

    @classmethod
    def random(cls, n_atoms, n_levels, rng, weights=None):
        """Random successive coarsenings, starting from a random partition."""
        if weights is None:
            weights = rng.uniform(0.5, 1.5, n_atoms)
            weights /= weights.sum()
        labels = rng.integers(0, max(2, n_atoms // 2), n_atoms)
        parts = []
        for _ in range(n_levels):
            labels = _canonical(labels)
            parts.append(labels)
            merge = rng.integers(0, max(1, (labels.max() + 1) // 2 + 1), labels.max() + 1)
            labels = merge[labels]
        return cls(weights, tuple(parts))

    @property
    def n_atoms(self):
        return self.weights.shape[0]

    @property
    def depth(self):
        return len(self.partitions)

    def labels(self, k):
        """Labels of ``P_k``: singletons for ``k = 0``, trivial beyond the last level."""
        if k <= 0:
            return np.arange(self.n_atoms)
        if k > self.depth:
            return np.zeros(self.n_atoms, dtype=np.int64)
        return self.partitions[k - 1]

    def cond_exp(self, f, k):
        return cond_exp_partition(f, self.labels(k), self.weights)

    def expect(self, f):
        return float(self.weights @ np.asarray(f, dtype=float))


def _as_phis(phis, filt):
    phis = np.atleast_2d(np.asarray(phis, dtype=float))
    if phis.shape[1] != filt.n_atoms:
        raise ValueError("each phi_k needs one value per atom")
    return phis


def _check_adapted(phis, filt):
    for k, phi in enumerate(phis, start=1):
        if not is_measurable(phi, filt.labels(k)):
            raise ValueError(f"phi_{k} is not F*_{k}-measurable")


def lambda_recursion(phis, filt):
    """Return ``(lambdas, E lambda_n)`` where ``lambdas[k-1]`` is ``lambda_k``."""
    phis = _as_phis(phis, filt)
    _check_adapted(phis, filt)
    lam = np.zeros(filt.n_atoms)
    out = np.empty_like(phis)
    for k, phi in enumerate(phis, start=1):
        lam = filt.cond_exp(np.sqrt(phi**2 + lam**2), k + 1)
        out[k - 1] = lam
    return out, filt.expect(lam)


def clip_sequence(phis, M):
    """Clip ``|phi|`` into ``[1/M, M]`` keeping the sign; zeros go to ``+1/M``."""
    sgn = np.where(phis < 0, -1.0, 1.0)
    return sgn * np.clip(np.abs(phis), 1.0 / M, M)


def extremal_sequence(phis, filt, M: Optional[float] = 1e3):
    """Near-optimal ``(f_k)`` with ``E*_k f_k = phi_k``.

    Builds ``Lambda_k = (|phi_k|^2 + lambda_{k-1}^2)^(1/2)`` and
    ``f_k = phi_k prod_{j<k} Lambda_j / lambda_j`` from the clipped sequence,
    then adds back ``phi - phi^(M)``.  With ``M=None`` no clipping is done; a
    factor whose ``lambda_j`` vanishes is set to 1.
    """
    phis = _as_phis(phis, filt)
    _check_adapted(phis, filt)
    if M is not None and not M > 0:
        raise ValueError("M must be positive")
    clipped = phis if M is None else clip_sequence(phis, M)
    lam = np.zeros(filt.n_atoms)
    factor = np.ones(filt.n_atoms)
    fs = np.empty_like(phis)
    for k, phi in enumerate(clipped, start=1):
        fs[k - 1] = phi * factor
        big = np.sqrt(phi**2 + lam**2)
        lam = filt.cond_exp(big, k + 1)
        safe = lam > 0
        factor = factor * np.where(safe, big / np.where(safe, lam, 1.0), 1.0)
    return fs + (phis - clipped)


def objective(fs, weights):
    """``E (sum_k |f_k|^2)^(1/2)``."""
    fs = np.atleast_2d(np.asarray(fs, dtype=float))
    return float(np.asarray(weights) @ np.sqrt(np.sum(fs**2, axis=0)))


def random_feasible(phis, filt, rng, scale=1.0):
    """Random ``f_k = phi_k + g_k - E*_k g_k`` (so ``E*_k f_k = phi_k``)."""
    phis = _as_phis(phis, filt)
    out = np.empty_like(phis)
    for k, phi in enumerate(phis, start=1):
        g = scale * rng.standard_cauchy(filt.n_atoms) if rng.uniform() < 0.2 else scale * rng.normal(size=filt.n_atoms)
        out[k - 1] = phi + g - filt.cond_exp(g, k)
    return out


def telescoping_lambdas(phis, weights):
    """Constants ``lambda_k = E (phi_k^2 + lambda_{k-1}^2)^(1/2)``, ``lambda_0 = 0``."""
    lam, out = 0.0, []
    for phi in np.atleast_2d(phis):
        lam = float(np.asarray(weights) @ np.sqrt(phi**2 + lam**2))
        out.append(lam)
    return np.array(out)


@dataclass(frozen=True)
class TelescopingReport:
    l1_l2: float
    ind: float
    bound: float
    hypothesis_ok: bool

    @property
    def holds(self):
        """None when the hypotheses fail (no claim is made then)."""
        if not self.hypothesis_ok:
            return None
        return max(self.l1_l2, self.ind) <= self.bound + _TOL

    @property
    def ratio(self):
        return max(self.l1_l2, self.ind) / self.bound if self.bound > 0 else 0.0


def telescoping_bound(phis, lambdas, weights, variant="i"):
    """Check ``max(||phi||_{L1(l2)}, ||phi||_ind)`` against the telescoping bound.

    Variant ``"i"``: ``lambdas`` are the constants of
    :func:`telescoping_lambdas`; the bound is ``2 lambda_n``.
    Variant ``"ii"``: ``lambdas`` are bounded random variables with
    ``E lambda_k >= E (phi_k^2 + lambda_{k-1}^2)^(1/2)``; the bound is
    ``(1 + sqrt 2) sqrt(E lambda_n) sqrt(max_k sup lambda_k)``.
    """
    phis = np.atleast_2d(np.asarray(phis, dtype=float))
    w = np.asarray(weights, dtype=float)
    if np.any(phis < 0):
        raise ValueError("phi_k must be nonnegative")
    fam = DiscreteVectorFunction.from_common(phis, w)
    l1l2 = objective(phis, w)
    ind = ind_norm_exact(DiscreteVectorFunction(fam.values, fam.weights)).value
    if variant == "i":
        lam = np.asarray(lambdas, dtype=float).reshape(-1)
        expected = telescoping_lambdas(phis, w)
        ok = lam.shape == expected.shape and np.allclose(lam, expected, rtol=1e-9, atol=1e-12)
        bound = 2 * float(lam[-1])
    elif variant == "ii":
        lam = np.asarray(lambdas, dtype=float)
        if lam.ndim == 1:
            # constants are random variables too
            lam = np.repeat(lam[:, None], phis.shape[1], axis=1)
        if np.any(lam < 0):
            raise ValueError("lambda_k must be nonnegative")
        ok, prev = True, np.zeros(phis.shape[1])
        for phi, lk in zip(phis, lam):
            if w @ lk < w @ np.sqrt(phi**2 + prev**2) - _TOL:
                ok = False
            prev = lk
        bound = (1 + np.sqrt(2)) * np.sqrt(w @ lam[-1]) * np.sqrt(lam.max())
    else:
        raise ValueError(f"variant must be 'i' or 'ii', got {variant!r}")
    return TelescopingReport(l1l2, ind, float(bound), bool(ok))


def partitions_meet_trivial(labels_a, labels_b, weights=None):
    """True if the only sets measurable for both partitions are null or full.

    The common coarsening is given by connected components of the bipartite
    graph whose edges are the atoms (of positive weight) joining their blocks.
    """
    a, b = _canonical(labels_a), _canonical(labels_b)
    if weights is not None:
        keep = np.asarray(weights) > 0
        a, b = _canonical(a[keep]), _canonical(b[keep])
    na, nb = a.max() + 1, b.max() + 1
    graph = coo_matrix((np.ones(a.size), (a, na + b)), shape=(na + nb, na + nb))
    n_comp, _ = connected_components(graph, directed=False)
    return n_comp == 1


@dataclass(frozen=True)
class SteinReport:
    variant: str
    lhs: float
    rhs: float
    hypothesis_ok: bool
    p: float = 1.0
    bound: Optional[float] = 0.5

    @property
    def ratio(self):
        return self.lhs / self.rhs if self.rhs > 0 else np.inf

    @property
    def holds(self):
        if not self.hypothesis_ok or self.bound is None:
            return None
        return self.ratio >= self.bound - _TOL


def check_stein_variants(fs, filt, variant="lepingle", p=2.0):
    """Compare ``E (sum |f_k|^2)^(q/2)`` with ``E (sum |E*_k f_k|^2)^(q/2)``.

    ``q = 1`` for ``lepingle`` (``f_k`` is ``F*_{k-1}``-measurable) and
    ``duallep`` (``sigma(f_k)`` meets ``F*_{k+1}`` trivially); both carry the
    lower bound 1/2 on the ratio.  ``classical_p`` uses ``q = p > 1`` and only
    records the ratio.  When a hypothesis fails the report has
    ``hypothesis_ok=False`` and makes no claim.
    """
    fs = _as_phis(fs, filt)
    w = filt.weights
    if variant == "lepingle":
        ok = all(is_measurable(f, filt.labels(k - 1)) for k, f in enumerate(fs, start=1))
        q, bound = 1.0, 0.5
    elif variant == "duallep":
        ok = all(
            partitions_meet_trivial(_canonical(np.round(f, 12)), filt.labels(k + 1), w)
            for k, f in enumerate(fs, start=1)
        )
        q, bound = 1.0, 0.5
    elif variant == "classical_p":
        if not p > 1:
            raise ValueError("classical_p needs p > 1")
        ok, q, bound = True, float(p), None
    else:
        raise ValueError(f"unknown variant {variant!r}")
    proj = np.stack([filt.cond_exp(f, k) for k, f in enumerate(fs, start=1)])
    lhs = float(w @ np.sum(fs**2, axis=0) ** (q / 2))
    rhs = float(w @ np.sum(proj**2, axis=0) ** (q / 2))
    return SteinReport(variant, lhs, rhs, bool(ok), q, bound)
