"""Analysis on the truncated Cantor group ``{0,1}^m``.

A point ``x = (x_1, ..., x_m)`` is stored as the array index ``sum x_k 2**(k-1)``,
so bit ``k-1`` of the index is the coordinate ``x_k``.  Walsh characters are
indexed the same way: the mask ``A`` has bit ``k-1`` set iff ``k`` is in ``A``,
and ``w_A(x) = (-1)**popcount(A & x)``.  Inner products use the uniform
probability measure, ``<f, g> = 2**-m sum f g``.

``max`` of the empty mask is 0; ``min`` of the empty mask (or of the point
``x = 0``) is reported as the sentinel ``m + 1`` standing in for infinity.
"""

from dataclasses import dataclass
from typing import Sequence

import numpy as np

from ._validation import (
    MAX_RESOLUTION,
    check_level,
    check_resolution,
    resolution_of,
)
from .reports import NormReport

__all__ = [
    "DyadicFunction",
    "VectorDyadicFunction",
    "BlockSpec",
    "walsh_max",
    "walsh_min",
    "walsh_function",
    "rademacher",
    "fwht",
    "walsh_transform",
    "inverse_walsh_transform",
    "cond_exp",
    "martingale_diff",
    "martingale_diffs",
    "square_function",
    "square_function_walsh",
    "h1_norm",
    "kappa",
    "kappa_walsh_sum",
    "walsh_convolve",
    "dilation",
    "extend_resolution",
    "block_projection",
    "embed_ind_blocks",
    "iota",
    "truncated_pv",
    "trunc_remainder",
    "trunc_bound",
]


@dataclass(frozen=True, eq=False)
class DyadicFunction:
    """Real or vector valued function on ``{0,1}^m``.

    ``values`` has shape ``(2**m,)`` for scalar functions and ``(2**m, K)`` for
    functions with ``K`` real components.
    """

    values: np.ndarray

    def __post_init__(self):
        v = np.array(self.values, dtype=float)
        if v.ndim not in (1, 2):
            raise ValueError("values must be 1-d (scalar) or 2-d (vector valued)")
        resolution_of(v.shape[0])
        v.setflags(write=False)
        object.__setattr__(self, "values", v)

    @property
    def resolution(self):
        return resolution_of(self.values.shape[0])

    @property
    def is_scalar(self):
        return self.values.ndim == 1

    def __len__(self):
        return self.values.shape[0]

    def __add__(self, other):
        _same_resolution(self, other)
        return DyadicFunction(self.values + other.values)

    def __sub__(self, other):
        _same_resolution(self, other)
        return DyadicFunction(self.values - other.values)

    def __mul__(self, c):
        if isinstance(c, DyadicFunction):
            _same_resolution(self, c)
            return DyadicFunction(self.values * c.values)
        return DyadicFunction(self.values * c)

    __rmul__ = __mul__

    def mean(self):
        return self.values.mean(axis=0)

    def allclose(self, other, atol=1e-12):
        return self.values.shape == other.values.shape and np.allclose(
            self.values, other.values, rtol=0, atol=atol
        )

    @classmethod
    def constant(cls, c, m):
        return cls(np.full(2 ** check_resolution(m), float(c)))

    @classmethod
    def from_function(cls, func, m):
        """Tabulate ``func(x)`` where ``x`` is the 0/1 coordinate array of shape (2**m, m)."""
        return cls(func(coordinates(m)))


@dataclass(frozen=True, eq=False)
class VectorDyadicFunction:
    """Finite sequence ``(f_0, ..., f_K)`` of scalar functions at one resolution.

    Stored structure-of-arrays: ``data[n]`` holds the values of ``f_n``.
    """

    data: np.ndarray

    def __post_init__(self):
        d = np.array(self.data, dtype=float)
        if d.ndim != 2:
            raise ValueError("data must have shape (n_components, 2**m)")
        resolution_of(d.shape[1])
        d.setflags(write=False)
        object.__setattr__(self, "data", d)

    @classmethod
    def from_components(cls, components: Sequence[DyadicFunction]):
        comps = list(components)
        if not comps:
            raise ValueError("need at least one component")
        m = comps[0].resolution
        for c in comps:
            if not c.is_scalar or c.resolution != m:
                raise ValueError("components must be scalar and share one resolution")
        return cls(np.stack([c.values for c in comps]))

    @property
    def resolution(self):
        return resolution_of(self.data.shape[1])

    @property
    def n_components(self):
        return self.data.shape[0]

    @property
    def components(self):
        return [DyadicFunction(row) for row in self.data]

    def pointwise_norm(self):
        return np.sqrt(np.sum(self.data**2, axis=0))

    def l1_l2_norm(self):
        return float(self.pointwise_norm().mean())

    def l2_l2_norm(self):
        return float(np.sqrt(np.mean(np.sum(self.data**2, axis=0))))


@dataclass(frozen=True)
class BlockSpec:
    """Strictly increasing disjoint integer intervals ``I_n = [a_n, b_n]``."""

    intervals: tuple

    def __post_init__(self):
        ivs = tuple((int(a), int(b)) for a, b in self.intervals)
        for a, b in ivs:
            if a < 1 or b < a:
                raise ValueError(f"bad interval [{a}, {b}]")
        for (_, b0), (a1, _) in zip(ivs, ivs[1:]):
            if not b0 < a1:
                raise ValueError("intervals must satisfy max I_n < min I_{n+1}")
        object.__setattr__(self, "intervals", ivs)

    @classmethod
    def from_lengths(cls, lengths, start=1):
        ivs, a = [], start
        for c in lengths:
            ivs.append((a, a + int(c) - 1))
            a += int(c)
        return cls(tuple(ivs))

    @property
    def max_index(self):
        return self.intervals[-1][1] if self.intervals else 0

    def masks(self):
        return [((1 << b) - 1) ^ ((1 << (a - 1)) - 1) for a, b in self.intervals]

    def block_of(self, k):
        for n, (a, b) in enumerate(self.intervals):
            if a <= k <= b:
                return n
        return None


def _same_resolution(f, g):
    if f.resolution != g.resolution:
        raise ValueError(f"resolution mismatch: {f.resolution} != {g.resolution}")


def _as_dyadic(f):
    return f if isinstance(f, DyadicFunction) else DyadicFunction(f)


def _require_scalar(f, op):
    if not f.is_scalar:
        raise ValueError(f"{op} needs a scalar-valued function")


def coordinates(m):
    """0/1 array of shape (2**m, m) whose column ``k-1`` is ``x_k``."""
    idx = np.arange(2 ** check_resolution(m))
    return (idx[:, None] >> np.arange(m)) & 1


def walsh_max(masks):
    """``max A`` for each mask (0 for the empty set)."""
    a = np.asarray(masks, dtype=np.int64)
    return np.frexp(a.astype(float))[1].astype(np.int64)


def walsh_min(masks, m):
    """``min A`` for each mask, with ``m + 1`` standing in for ``min(empty) = inf``."""
    a = np.asarray(masks, dtype=np.int64)
    low = a & -a
    out = walsh_max(low)
    return np.where(a == 0, m + 1, out)


def _popcount_parity(a):
    a = np.asarray(a, dtype=np.int64).copy()
    parity = np.zeros_like(a)
    while np.any(a):
        parity ^= a & 1
        a >>= 1
    return parity


def walsh_function(mask, m):
    """The character ``w_A`` at resolution ``m``."""
    check_resolution(m)
    if mask >> m:
        raise ValueError(f"mask {mask:#b} uses coordinates beyond {m}")
    x = np.arange(2**m)
    return DyadicFunction(1.0 - 2.0 * _popcount_parity(x & mask))


def rademacher(k, m):
    """``r_k = w_{{k}}``."""
    check_level(k, m, "k")
    if k == 0:
        raise ValueError("Rademacher functions are indexed from 1")
    return walsh_function(1 << (k - 1), m)


def fwht(a, axis=0):
    """Unnormalised fast Walsh-Hadamard transform along ``axis``.

    Computes ``sum_x a[x] (-1)**popcount(A & x)`` for every ``A``.
    """
    a = np.moveaxis(np.array(a, dtype=float), axis, 0)
    n = a.shape[0]
    m = resolution_of(n)
    rest = a.shape[1:]
    h = 1
    for _ in range(m):
        a = a.reshape((n // (2 * h), 2, h) + rest)
        lo, hi = a[:, 0], a[:, 1]
        a = np.stack((lo + hi, lo - hi), axis=1)
        h *= 2
    return np.moveaxis(a.reshape((n,) + rest), 0, axis)


def walsh_transform(f):
    """Walsh coefficients ``<f, w_A>`` of a scalar function, indexed by mask."""
    f = _as_dyadic(f)
    _require_scalar(f, "walsh_transform")
    check_resolution(f.resolution, MAX_RESOLUTION)
    return fwht(f.values) / len(f)


def inverse_walsh_transform(coeffs):
    """Rebuild ``sum_A c_A w_A`` from a coefficient table."""
    c = np.asarray(coeffs, dtype=float)
    check_resolution(resolution_of(c.shape[0]))
    return DyadicFunction(fwht(c))


def _blocks(values, n):
    # rows: coordinates n+1..m (high bits); columns: coordinates 1..n (low bits)
    m = resolution_of(values.shape[0])
    return values.reshape((2 ** (m - n), 2**n) + values.shape[1:])


def cond_exp(f, n, kind="F"):
    """Conditional expectation onto ``F_n`` (``kind='F'``) or ``F*_n`` (``kind='F*'``).

    ``E_n`` averages over the coordinates ``n+1..m``; ``E*_n`` averages over
    the coordinates ``1..n``.
    """
    f = _as_dyadic(f)
    m = f.resolution
    n = check_level(n, m)
    b = _blocks(f.values, n)
    if kind == "F":
        avg = b.mean(axis=0, keepdims=True)
    elif kind in ("F*", "F_star", "star"):
        avg = b.mean(axis=1, keepdims=True)
    else:
        raise ValueError(f"kind must be 'F' or 'F*', got {kind!r}")
    return DyadicFunction(np.broadcast_to(avg, b.shape).reshape(f.values.shape))


def martingale_diff(f, k):
    """``Delta_k f`` with ``Delta_0 = E_0`` and ``Delta_k = E_k - E_{k-1}``."""
    f = _as_dyadic(f)
    k = check_level(k, f.resolution)
    if k == 0:
        return cond_exp(f, 0)
    return cond_exp(f, k) - cond_exp(f, k - 1)


def martingale_diffs(f):
    """All martingale differences, shape ``(m+1, 2**m)`` (scalar ``f``)."""
    f = _as_dyadic(f)
    _require_scalar(f, "martingale_diffs")
    m = f.resolution
    cond = np.stack([cond_exp(f, n).values for n in range(m + 1)])
    out = cond.copy()
    out[1:] -= cond[:-1]
    return out


def square_function(f):
    """``S(f) = (sum_k |Delta_k f|^2)^(1/2)``."""
    return DyadicFunction(np.sqrt(np.sum(martingale_diffs(f) ** 2, axis=0)))


def square_function_walsh(f):
    """Square function computed from Walsh coefficients grouped by ``max A``."""
    f = _as_dyadic(f)
    _require_scalar(f, "square_function_walsh")
    m = f.resolution
    coef = walsh_transform(f)
    top = walsh_max(np.arange(2**m))
    total = np.zeros(2**m)
    for n in range(m + 1):
        part = fwht(np.where(top == n, coef, 0.0))
        total += part**2
    return DyadicFunction(np.sqrt(total))


def h1_norm(f):
    """Dyadic Hardy norm ``E S(f)``."""
    return NormReport(float(square_function(f).values.mean()), "exact")


def kappa(n, m):
    """Kernel of ``Delta_n`` in closed form.

    1 if n = 0; ``2**(n-1)`` if ``n < min x``; ``-2**(n-1)`` if ``n = min x``;
    0 if ``n > min x``.
    """
    m = check_resolution(m)
    n = check_level(n, m)
    if n == 0:
        return DyadicFunction(np.ones(2**m))
    mins = walsh_min(np.arange(2**m), m)
    half = 2.0 ** (n - 1)
    vals = np.where(n < mins, half, np.where(n == mins, -half, 0.0))
    return DyadicFunction(vals)


def kappa_walsh_sum(n, m):
    """``sum_{max A = n} w_A`` evaluated through the inverse Walsh transform."""
    m = check_resolution(m)
    n = check_level(n, m)
    coef = (walsh_max(np.arange(2**m)) == n).astype(float)
    return inverse_walsh_transform(coef)


def walsh_convolve(f, g):
    """Group convolution ``(f*g)(x) = E_y f(y) g(x + y)`` (addition is XOR)."""
    f, g = _as_dyadic(f), _as_dyadic(g)
    _same_resolution(f, g)
    _require_scalar(f, "walsh_convolve")
    _require_scalar(g, "walsh_convolve")
    return inverse_walsh_transform(walsh_transform(f) * walsh_transform(g))


def dilation(f):
    """``Tf(x_1, x_2, ...) = f(x_2, x_3, ...)``, raising the resolution by one."""
    f = _as_dyadic(f)
    check_resolution(f.resolution + 1)
    return DyadicFunction(np.repeat(f.values, 2, axis=0))


def extend_resolution(f, m):
    """View ``f`` as a function of the first ``f.resolution`` of ``m`` coordinates."""
    f = _as_dyadic(f)
    m = check_resolution(m)
    if m < f.resolution:
        raise ValueError("cannot lower the resolution")
    reps = 2 ** (m - f.resolution)
    return DyadicFunction(np.tile(f.values, (reps,) + (1,) * (f.values.ndim - 1)))


def block_projection(f, spec):
    """Keep ``<f, w_A>`` only for ``A`` contained in one of the blocks (``A`` empty included)."""
    f = _as_dyadic(f)
    _require_scalar(f, "block_projection")
    if not isinstance(spec, BlockSpec):
        spec = BlockSpec(tuple(spec))
    m = f.resolution
    if spec.max_index > m:
        raise ValueError(f"blocks reach coordinate {spec.max_index} > resolution {m}")
    masks = np.arange(2**m)
    keep = masks == 0
    for bm in spec.masks():
        keep |= (masks & ~bm) == 0
    coef = walsh_transform(f)
    return inverse_walsh_transform(np.where(keep, coef, 0.0))


def embed_ind_blocks(fs, spec):
    """``sum_n T^(a_n - 1) f_n`` at resolution ``max b_n``.

    ``f_n`` must have resolution ``|I_n|``.  The H^1 norm of the result equals
    the independent-sum norm of ``(iota f_n)`` when at most one ``f_n`` has a
    nonzero mean (the means all land in the same ``Delta_0`` term).
    """
    fs = [_as_dyadic(f) for f in fs]
    if not isinstance(spec, BlockSpec):
        spec = BlockSpec(tuple(spec))
    if len(fs) != len(spec.intervals):
        raise ValueError("one function per block is required")
    m = spec.max_index
    check_resolution(m)
    total = np.zeros(2**m)
    for f, (a, b) in zip(fs, spec.intervals):
        _require_scalar(f, "embed_ind_blocks")
        if f.resolution != b - a + 1:
            raise ValueError(
                f"block [{a}, {b}] has length {b - a + 1} but f has resolution {f.resolution}"
            )
        # T^(a-1) moves coordinate j to j + a - 1
        shifted = np.repeat(f.values, 2 ** (a - 1))
        total += extend_resolution(DyadicFunction(shifted), m).values
    return DyadicFunction(total)


def iota(f):
    """Canonical isometry ``H^1(delta) -> L^1(l^2)``, ``f -> (Delta_n f)_n``."""
    return VectorDyadicFunction(martingale_diffs(f))


def _as_vector(fs):
    if isinstance(fs, VectorDyadicFunction):
        return fs
    if isinstance(fs, (list, tuple)) and fs and isinstance(fs[0], DyadicFunction):
        return VectorDyadicFunction.from_components(fs)
    return VectorDyadicFunction(fs)


def truncated_pv(fs, m_cut, kind="vector"):
    """Truncated convolution ``K_m * f`` (vector) or ``k_m * f`` (scalar).

    The vector kind returns ``(Delta_0 f_0, ..., Delta_m f_m, 0, ...)`` with the
    same number of components as ``fs``; the scalar kind returns
    ``sum_{n <= m_cut} Delta_n f_n``.  Missing components count as zero.
    """
    fs = _as_vector(fs)
    m = fs.resolution
    m_cut = check_level(m_cut, m, "m_cut")
    out = np.zeros_like(fs.data)
    for n in range(min(m_cut, fs.n_components - 1) + 1):
        out[n] = martingale_diff(DyadicFunction(fs.data[n]), n).values
    if kind == "vector":
        return VectorDyadicFunction(out)
    if kind == "scalar":
        return DyadicFunction(out.sum(axis=0))
    raise ValueError(f"kind must be 'vector' or 'scalar', got {kind!r}")


def trunc_remainder(fs, m_cut):
    """Scalar kernel remainder ``int_{B(0, 2^-m)} k_m(y) f(x - y) dmu(y)``.

    The ball ``B(0, 2^-m)`` is the set of ``y`` with ``y_1 = ... = y_m = 0``.
    """
    fs = _as_vector(fs)
    m = fs.resolution
    m_cut = check_level(m_cut, m, "m_cut")
    total = np.zeros(2**m)
    ball_indicator = np.zeros(2**m)
    ball_indicator[:: 2**m_cut] = 1.0
    for n in range(min(m_cut, fs.n_components - 1) + 1):
        kern = kappa(n, m).values * ball_indicator
        total += walsh_convolve(DyadicFunction(kern), DyadicFunction(fs.data[n])).values
    return DyadicFunction(total)


def trunc_bound(fs, m_cut, exact_kappa0=True):
    """Pointwise bound ``1/2 <u_m, E_m |f|(x)>`` with ``u_m = (2^-m, ..., 1, 0, ...)``.

    On the ball ``|kappa_0| = 1`` while ``|kappa_n| = 2^(n-1)`` for ``n >= 1``,
    so the ``n = 0`` weight ``2^(-m-1)`` underestimates the kernel by a factor
    of two.  With ``exact_kappa0`` (default) the ``n = 0`` weight is ``2^-m``,
    which makes the bound valid for every input; pass ``False`` for the
    uncorrected form.
    """
    fs = _as_vector(fs)
    m = fs.resolution
    m_cut = check_level(m_cut, m, "m_cut")
    total = np.zeros(2**m)
    for n in range(min(m_cut, fs.n_components - 1) + 1):
        weight = 2.0 ** (n - m_cut - 1)
        if n == 0 and exact_kappa0:
            weight = 2.0**-m_cut
        total += weight * cond_exp(DyadicFunction(np.abs(fs.data[n])), m_cut).values
    return DyadicFunction(total)
