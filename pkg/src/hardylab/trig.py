"""Trigonometric polynomials on the circle and the torus.

Polynomials are finitely supported coefficient tables.  Everything that can
be done in coefficient space (periodization, multipliers, shears, the
sawtooth identity) is exact there; integrals of moduli go through a uniform
rectangle-rule grid evaluated with the FFT.

The Fejer kernel uses the order-``d`` normalisation
``F_d = sum_{|j|<d} (1 - |j|/d) e^{ijt}``, so ``F_1 = 1`` and ``F_d(0) = d``.
With this choice ``periodize(F_{CN}, N)(t) = F_C(N t)`` holds exactly.
"""

import math
from dataclasses import dataclass
from functools import reduce
from typing import Sequence

import numpy as np

from ._validation import check_increasing, check_positive_int, is_lacunary
from .reports import NormReport

__all__ = [
    "TrigPoly",
    "TrigPoly2D",
    "QuadratureGrid",
    "default_grid_size",
    "eval_grid",
    "eval_points",
    "lp_norm",
    "l2_norm",
    "vector_l1_l2",
    "fejer",
    "fejer_periodized",
    "vallee_poussin",
    "fejer_lower_constant",
    "convolve",
    "periodize",
    "step_average",
    "step_residual_norm",
    "step_average_bound",
    "derivative",
    "bernstein_ratio",
    "sawtooth_coeffs",
    "sawtooth_conv",
    "lacunary_sign_projection",
    "shear",
    "multiplier_B",
    "anti_diagonal_extract",
    "embed_ind_trig",
    "khintchine_average",
]

MAX_GRID_2D = 4096
# default cap on sign patterns held in memory at once
_SIGN_CHUNK = 512


def _clean(freqs, amps, ndim):
    freqs = np.asarray(freqs, dtype=np.int64).reshape((-1,) if ndim == 1 else (-1, 2))
    amps = np.asarray(amps, dtype=complex).reshape(-1)
    if freqs.shape[0] != amps.shape[0]:
        raise ValueError("freqs and amps must have the same length")
    if freqs.shape[0] == 0:
        return freqs, amps
    keys, inv = np.unique(freqs, axis=0, return_inverse=True)
    summed = np.zeros(keys.shape[0], dtype=complex)
    np.add.at(summed, inv.reshape(-1), amps)
    keep = summed != 0
    return keys[keep], summed[keep]


@dataclass(frozen=True, eq=False)
class TrigPoly:
    """Trigonometric polynomial ``sum_j amps[j] e^{i freqs[j] t}`` on ``T``.

    Frequencies are kept sorted and unique; zero amplitudes are dropped.
    """

    freqs: np.ndarray
    amps: np.ndarray

    def __post_init__(self):
        f, a = _clean(self.freqs, self.amps, 1)
        f.setflags(write=False)
        a.setflags(write=False)
        object.__setattr__(self, "freqs", f)
        object.__setattr__(self, "amps", a)

    @classmethod
    def from_dict(cls, coeffs):
        items = sorted(coeffs.items())
        return cls([k for k, _ in items], [v for _, v in items])

    @classmethod
    def monomial(cls, j, amp=1.0):
        return cls([j], [amp])

    @classmethod
    def zero(cls):
        return cls([], [])

    def to_dict(self):
        return {int(j): complex(a) for j, a in zip(self.freqs, self.amps)}

    @property
    def degree(self):
        return int(np.abs(self.freqs).max()) if self.freqs.size else 0

    @property
    def is_analytic(self):
        return bool(np.all(self.freqs >= 0))

    @property
    def is_zero(self):
        return self.freqs.size == 0

    def coeff(self, j):
        i = np.searchsorted(self.freqs, j)
        if i < self.freqs.size and self.freqs[i] == j:
            return complex(self.amps[i])
        return 0j

    def __add__(self, other):
        return TrigPoly(
            np.concatenate([self.freqs, other.freqs]),
            np.concatenate([self.amps, other.amps]),
        )

    def __sub__(self, other):
        return self + (-1.0) * other

    def __mul__(self, c):
        return TrigPoly(self.freqs, self.amps * c)

    __rmul__ = __mul__

    def __neg__(self):
        return -1.0 * self

    def dilate(self, N):
        """``t -> f(N t)``."""
        return TrigPoly(self.freqs * check_positive_int(N, "N"), self.amps)

    def shift(self, k):
        """Multiply by ``e^{ikt}``."""
        return TrigPoly(self.freqs + int(k), self.amps)

    def conj(self):
        """Pointwise complex conjugate."""
        return TrigPoly(-self.freqs, np.conj(self.amps))

    def allclose(self, other, atol=1e-12):
        diff = self - other
        return diff.is_zero or bool(np.abs(diff.amps).max() <= atol)


@dataclass(frozen=True, eq=False)
class TrigPoly2D:
    """Trigonometric polynomial on ``T x T`` with integer frequency pairs."""

    freqs: np.ndarray
    amps: np.ndarray

    def __post_init__(self):
        f, a = _clean(self.freqs, self.amps, 2)
        f.setflags(write=False)
        a.setflags(write=False)
        object.__setattr__(self, "freqs", f)
        object.__setattr__(self, "amps", a)

    @classmethod
    def from_dict(cls, coeffs):
        items = sorted(coeffs.items())
        return cls([k for k, _ in items], [v for _, v in items])

    @classmethod
    def monomial(cls, n1, n2, amp=1.0):
        return cls([[n1, n2]], [amp])

    def to_dict(self):
        return {(int(a), int(b)): complex(c) for (a, b), c in zip(self.freqs, self.amps)}

    @property
    def is_first_quadrant(self):
        return bool(np.all(self.freqs >= 0))

    @property
    def is_zero(self):
        return self.freqs.shape[0] == 0

    def __add__(self, other):
        return TrigPoly2D(
            np.concatenate([self.freqs, other.freqs]),
            np.concatenate([self.amps, other.amps]),
        )

    def __sub__(self, other):
        return self + (-1.0) * other

    def __mul__(self, c):
        return TrigPoly2D(self.freqs, self.amps * c)

    __rmul__ = __mul__

    def allclose(self, other, atol=1e-12):
        diff = self - other
        return diff.is_zero or bool(np.abs(diff.amps).max() <= atol)


def default_grid_size(degree):
    return max(1024, 16 * (int(degree) + 1))


@dataclass(frozen=True)
class QuadratureGrid:
    """Uniform grid ``t_k = 2 pi k / M`` used for the rectangle rule."""

    M: int

    def __post_init__(self):
        check_positive_int(self.M, "M")

    @classmethod
    def for_degree(cls, degree, moduli=()):
        M = default_grid_size(degree)
        L = reduce(math.lcm, [int(n) for n in moduli], 1)
        return cls(-(-M // L) * L)

    def check(self, degree, moduli=()):
        if self.M < 8 * (int(degree) + 1):
            raise ValueError(
                f"grid of {self.M} points is too coarse for degree {degree}; "
                f"need at least {8 * (int(degree) + 1)}"
            )
        for n in moduli:
            if self.M % int(n):
                raise ValueError(f"grid size {self.M} is not a multiple of modulus {n}")
        return self

    @property
    def points(self):
        return 2 * np.pi * np.arange(self.M) / self.M


def _grid_size(grid, degree, moduli=()):
    if grid is None:
        return QuadratureGrid.for_degree(degree, moduli).M
    g = grid if isinstance(grid, QuadratureGrid) else QuadratureGrid(int(grid))
    return g.check(degree, moduli).M


def _scatter_eval(freqs, amps, M):
    buf = np.zeros(M, dtype=complex)
    np.add.at(buf, np.mod(freqs, M), amps)
    return np.fft.ifft(buf) * M


def eval_grid(f, grid=None):
    """Values of ``f`` at ``2 pi k / M``; also accepts a 2-D polynomial and an ``(M1, M2)`` grid."""
    if isinstance(f, TrigPoly2D):
        if grid is None:
            deg = int(np.abs(f.freqs).max()) if f.freqs.size else 0
            grid = (default_grid_size(deg),) * 2
        M1, M2 = (grid, grid) if np.isscalar(grid) else grid
        if max(M1, M2) > MAX_GRID_2D:
            raise ValueError(f"2-D grids are limited to {MAX_GRID_2D} points per axis")
        buf = np.zeros((M1, M2), dtype=complex)
        np.add.at(buf, (np.mod(f.freqs[:, 0], M1), np.mod(f.freqs[:, 1], M2)), f.amps)
        return np.fft.ifft2(buf) * (M1 * M2)
    M = _grid_size(grid, f.degree)
    return _scatter_eval(f.freqs, f.amps, M)


def eval_points(f, t):
    """Direct evaluation at arbitrary points (slow path, used as an oracle)."""
    t = np.asarray(t, dtype=float)
    return np.exp(1j * np.multiply.outer(t, f.freqs)) @ f.amps


def _reduced(freqs_list):
    # t -> g t is measure preserving, so a common divisor can be removed
    g = 0
    for fr in freqs_list:
        if fr.size:
            g = math.gcd(g, int(np.gcd.reduce(np.abs(fr))))
    return max(g, 1)


def _quad_report(integrand, M, p):
    v1 = integrand(M)
    v2 = integrand(2 * M)
    if p == np.inf:
        return NormReport(float(v2), "quadrature", error=float(abs(v2 - v1)))
    val = v2 ** (1.0 / p)
    return NormReport(float(val), "quadrature", error=float(abs(val - v1 ** (1.0 / p))))


def lp_norm(f, p=1.0, grid=None, reduce_frequencies=True):
    """``(E |f|^p)^(1/p)`` for a one-dimensional polynomial.

    ``p = 2`` is exact (Parseval).  Otherwise the rectangle rule is applied on
    ``M`` and ``2M`` points; the finer value is returned and the difference
    is the error estimate.
    """
    p = float(p)
    if p < 1:
        raise ValueError("p must be at least 1")
    if p == 2:
        return NormReport(float(np.sqrt(np.sum(np.abs(f.amps) ** 2))), "exact")
    g = _reduced([f.freqs]) if reduce_frequencies else 1
    freqs = f.freqs // g
    deg = int(np.abs(freqs).max()) if freqs.size else 0
    M = _grid_size(grid, deg) if grid is not None else default_grid_size(deg)

    def integrand(n):
        vals = np.abs(_scatter_eval(freqs, f.amps, n))
        return vals.max() if p == np.inf else np.mean(vals**p)

    return _quad_report(integrand, M, p)


def l2_norm(f):
    return lp_norm(f, 2)


def vector_l1_l2(fs, grid=None):
    """``E (sum_k |f_k|^2)^(1/2)`` for a finite family of polynomials on ``T``."""
    fs = list(fs)
    g = _reduced([f.freqs for f in fs])
    reduced = [(f.freqs // g, f.amps) for f in fs]
    deg = max((int(np.abs(fr).max()) for fr, _ in reduced if fr.size), default=0)
    M = _grid_size(grid, deg) if grid is not None else default_grid_size(deg)

    def integrand(n):
        sq = np.zeros(n)
        for fr, am in reduced:
            sq += np.abs(_scatter_eval(fr, am, n)) ** 2
        return np.mean(np.sqrt(sq))

    return _quad_report(integrand, M, 1.0)


def fejer(d):
    """Fejer kernel of order ``d``: mean 1, nonnegative, ``F_d(0) = d``."""
    d = check_positive_int(d, "d")
    j = np.arange(-(d - 1), d)
    return TrigPoly(j, 1.0 - np.abs(j) / d)


def fejer_periodized(d, N):
    """``periodize(fejer(d), N)`` built directly, without the full kernel."""
    d = check_positive_int(d, "d")
    N = check_positive_int(N, "N")
    lmax = (d - 1) // N
    l = np.arange(-lmax, lmax + 1)
    return TrigPoly(l * N, 1.0 - np.abs(l * N) / d)


def vallee_poussin(d):
    """``V_d = 2 F_{2d} - F_d``; its coefficients equal 1 for ``|j| <= d``."""
    return 2.0 * fejer(2 * d) - fejer(d)


def fejer_lower_constant(d, grid=None):
    """Smallest ``c`` with ``F_d >= d / c`` on ``[-pi/d, pi/d]``, measured on a grid.

    On that interval ``F_d(t) = sin^2(dt/2) / (d sin^2(t/2))`` is smallest at
    the endpoints, where it tends to ``4d / pi^2`` as ``d`` grows.
    """
    d = check_positive_int(d, "d")
    M = _grid_size(grid, d)
    t = 2 * np.pi * np.arange(M) / M
    t = np.where(t > np.pi, t - 2 * np.pi, t)
    inside = np.abs(t) <= np.pi / d
    vals = eval_grid(fejer(d), M).real[inside]
    # include the exact endpoint, which the grid may miss
    edge = eval_points(fejer(d), [np.pi / d]).real
    return float(d / min(vals.min(), edge.min()))


def convolve(f, g):
    """``f * g`` on ``T`` (coefficients multiply)."""
    common, i, j = np.intersect1d(f.freqs, g.freqs, return_indices=True)
    return TrigPoly(common, f.amps[i] * g.amps[j])


def periodize(f, N):
    """``E*_N f``: keep ``f^(j)`` iff ``N | j``.

    Equals the translate average ``(1/N) sum_k f(t + 2 pi k / N)``.
    """
    N = check_positive_int(N, "N")
    keep = f.freqs % N == 0
    return TrigPoly(f.freqs[keep], f.amps[keep])


def step_average(f, N):
    """Means of ``f`` over the arcs ``[2 pi k / N, 2 pi (k+1) / N)``, ``k = 0..N-1``."""
    N = check_positive_int(N, "N")
    k = np.arange(N)
    out = np.zeros(N, dtype=complex)
    for j, a in zip(f.freqs, f.amps):
        if j == 0:
            out += a
        elif j % N == 0:
            continue
        else:
            h = 2 * np.pi / N
            out += a * np.exp(1j * j * h * k) * (np.exp(1j * j * h) - 1) / (1j * j * h)
    return out


def step_residual_norm(f, N, p=1.0, grid=None):
    """``||(id - E_N) f||_p`` where ``E_N`` is the arc-mean step function."""
    N = check_positive_int(N, "N")
    means = step_average(f, N)
    if float(p) == 2:
        # ||f - E_N f||^2 = ||f||^2 - ||E_N f||^2 by orthogonality
        sq = np.sum(np.abs(f.amps) ** 2) - np.mean(np.abs(means) ** 2)
        return NormReport(float(np.sqrt(max(sq, 0.0))), "exact")
    p = float(p)
    M = _grid_size(grid, f.degree, (N,)) if grid is not None else QuadratureGrid.for_degree(f.degree, (N,)).M

    def integrand(n):
        vals = _scatter_eval(f.freqs, f.amps, n) - np.repeat(means, n // N)
        return np.mean(np.abs(vals) ** p)

    return _quad_report(integrand, M, p)


def step_average_bound(f, N, p=1.0, grid=None):
    """Return ``(||(id - E_N) f||_p, (2 pi / N) ||f'||_p)``.

    On ``T = [0, 2 pi)`` the arcs have length ``2 pi / N``, hence the factor
    ``2 pi``; it becomes ``1/N`` after rescaling to the unit interval.
    """
    lhs = step_residual_norm(f, N, p, grid)
    rhs = lp_norm(derivative(f), p, grid, reduce_frequencies=False)
    return lhs, NormReport(2 * np.pi / N * rhs.value, rhs.method, 2 * np.pi / N * rhs.error)


def derivative(f):
    return TrigPoly(f.freqs, 1j * f.freqs * f.amps)


def bernstein_ratio(f, grid=None):
    """``Ber f = E|f'| / E|f|``."""
    if f.is_zero:
        raise ValueError("Bernstein ratio of the zero polynomial is undefined")
    num = lp_norm(derivative(f), 1, grid).value
    den = lp_norm(f, 1, grid).value
    return num / den


def sawtooth_coeffs(N, degree):
    """Fourier coefficients of ``psi_N(x) = x - 2 pi k / N`` on ``[2 pi k/N, 2 pi (k+1)/N)``.

    ``psi_N^(0) = pi / N`` and ``psi_N^(j) = i / j`` for ``N | j != 0``; other
    coefficients vanish.  Only ``|j| <= degree`` is returned (the full series
    is infinite).
    """
    N = check_positive_int(N, "N")
    lmax = int(degree) // N
    l = np.arange(-lmax, lmax + 1)
    j = l * N
    amps = np.where(j == 0, np.pi / N, 1j / np.where(j == 0, 1, j))
    return TrigPoly(j, amps)


def sawtooth_conv(f, N, check=True, atol=1e-12):
    """``f' * psi_N``, which equals ``E f - E*_N f``."""
    out = convolve(derivative(f), sawtooth_coeffs(N, f.degree))
    if check:
        expected = TrigPoly.monomial(0, f.coeff(0)) - periodize(f, N)
        if not out.allclose(expected, atol):
            raise AssertionError("sawtooth identity violated")
    return out


def lacunary_sign_projection(f, freqs, signs):
    """Keep the listed frequencies of an analytic ``f``, multiplying them by ``+-1``."""
    if not f.is_analytic:
        raise ValueError("f must be analytic (no negative frequencies)")
    freqs = np.asarray(check_increasing(freqs, "freqs"), dtype=np.int64)
    signs = np.asarray(signs, dtype=float)
    if signs.shape != freqs.shape or not np.all(np.abs(signs) == 1):
        raise ValueError("signs must be +-1, one per frequency")
    amps = np.array([f.coeff(j) for j in freqs]) * signs
    return TrigPoly(freqs, amps)


def shear(f, M):
    """``(S_M f)(t) = f(M^T t)``, remapping frequency ``n`` to ``M n``.

    Any integer matrix with nonzero determinant induces a surjective torus
    endomorphism, which preserves Haar measure and hence every ``L^p`` norm.
    """
    M = np.asarray(M)
    if M.shape != (2, 2) or not np.all(M == np.round(M)):
        raise ValueError("M must be a 2x2 integer matrix")
    M = M.astype(np.int64)
    det = int(M[0, 0] * M[1, 1] - M[0, 1] * M[1, 0])
    if det == 0:
        raise ValueError("M must be nonsingular")
    return TrigPoly2D(f.freqs @ M.T, f.amps)


def _check_multiplier_sequences(d, N):
    d = check_increasing(d, "d")
    N = [check_positive_int(n, "N_k") for n in N]
    if len(d) != len(N):
        raise ValueError("d and N must have the same length")
    if len(d) > 1 and not is_lacunary(d):
        raise ValueError("d must be lacunary")
    for a, b in zip(N, N[1:]):
        if b % a:
            raise ValueError("N_k must divide N_{k+1}")
    return d, N


def multiplier_B(f, d, N):
    """Keep ``f^(n1, n2)`` iff ``n1 + n2 = d_k`` and ``N_k | n1`` for some ``k``."""
    if not f.is_first_quadrant:
        raise ValueError("f must be supported in the first quadrant")
    d, N = _check_multiplier_sequences(d, N)
    n1, n2 = f.freqs[:, 0], f.freqs[:, 1]
    keep = np.zeros(n1.shape, dtype=bool)
    for dk, Nk in zip(d, N):
        keep |= (n1 + n2 == dk) & (n1 % Nk == 0)
    return TrigPoly2D(f.freqs[keep], f.amps[keep])


def anti_diagonal_extract(f, d):
    """One-dimensional ``g`` with ``g^(j) = f^(j, d - j)``, so ``|f(t1, t2)| = |g(t1 - t2)|``."""
    n1, n2 = f.freqs[:, 0], f.freqs[:, 1]
    if np.any(n1 + n2 != d) or np.any(n1 < 0) or np.any(n2 < 0):
        raise ValueError(f"f is not supported on the anti-diagonal n1 + n2 = {d}")
    return TrigPoly(n1, f.amps)


def embed_ind_trig(fs, d, N):
    """Place ``f_k(N_k t)`` on the anti-diagonal ``n1 + n2 = d_k``.

    Returns ``sum_k sum_i f_k^(i) e^{i (N_k i t1 + (d_k - N_k i) t2)}``.
    """
    fs = list(fs)
    d = check_increasing(d, "d")
    N = [check_positive_int(n, "N_k") for n in N]
    if not len(fs) == len(d) == len(N):
        raise ValueError("fs, d and N must have the same length")
    freqs, amps = [], []
    for f, dk, Nk in zip(fs, d, N):
        if not f.is_analytic:
            raise ValueError("components must be analytic")
        if f.degree * Nk > dk:
            raise ValueError(f"deg f_k = {f.degree} exceeds d_k / N_k = {dk / Nk}")
        j = f.freqs * Nk
        freqs.append(np.stack([j, dk - j], axis=1))
        amps.append(f.amps)
    if not freqs:
        return TrigPoly2D(np.zeros((0, 2)), [])
    return TrigPoly2D(np.concatenate(freqs), np.concatenate(amps))


def _sign_rows(n, start, stop):
    # rows of +-1 with the first sign fixed to +1 (the average is even in eps)
    idx = np.arange(start, stop)[:, None]
    bits = (idx >> np.arange(n - 1)) & 1
    return np.hstack([np.ones((stop - start, 1)), 1.0 - 2.0 * bits])


def khintchine_average(fs, mode="exhaustive", grid=None, n_samples=4096, seed=0):
    """``E_eps ||sum eps_k f_k||_1`` and its ratio to ``||(sum |f_k|^2)^(1/2)||_1``.

    Returns ``(report, ratio)``.  The ratio lies in ``[1/sqrt 2, 1]``.
    """
    fs = list(fs)
    n = len(fs)
    if n == 0:
        raise ValueError("need at least one function")
    deg = max(f.degree for f in fs)
    M = _grid_size(grid, deg) if grid is not None else default_grid_size(deg)
    vals = np.stack([_scatter_eval(f.freqs, f.amps, M) for f in fs])
    denom = np.mean(np.sqrt(np.sum(np.abs(vals) ** 2, axis=0)))
    if mode == "exhaustive":
        if n > 16:
            raise ValueError("exhaustive mode supports at most 16 functions")
        total_rows = 2 ** (n - 1)
        acc = 0.0
        for start in range(0, total_rows, _SIGN_CHUNK):
            stop = min(start + _SIGN_CHUNK, total_rows)
            acc += np.abs(_sign_rows(n, start, stop) @ vals).mean(axis=1).sum()
        value = acc / total_rows
        report = NormReport(float(value), "quadrature")
    elif mode == "sampled":
        rng = np.random.default_rng(seed)
        per = []
        for start in range(0, n_samples, _SIGN_CHUNK):
            rows = rng.choice([-1.0, 1.0], size=(min(_SIGN_CHUNK, n_samples - start), n))
            per.append(np.abs(rows @ vals).mean(axis=1))
        per = np.concatenate(per)
        value = per.mean()
        report = NormReport(
            float(value), "monte_carlo", float(per.std(ddof=1) / np.sqrt(per.size)), n_samples, seed
        )
    else:
        raise ValueError(f"mode must be 'exhaustive' or 'sampled', got {mode!r}")
    return report, float(value / denom)
