"""Input validation helpers shared by the operators and estimators."""

import numbers

import numpy as np

#: Largest supported resolution for scalar dyadic transforms (2**24 doubles).
MAX_RESOLUTION = 24


def check_resolution(m, cap=MAX_RESOLUTION):
    if not isinstance(m, numbers.Integral) or m < 0:
        raise ValueError(f"resolution must be a non-negative integer, got {m!r}")
    if m > cap:
        raise ValueError(f"resolution {m} exceeds the cap of {cap}")
    return int(m)


def resolution_of(n_points):
    """Return m such that ``n_points == 2**m`` or raise ``ValueError``."""
    n_points = int(n_points)
    if n_points < 1 or n_points & (n_points - 1):
        raise ValueError(f"length {n_points} is not a power of two")
    return n_points.bit_length() - 1


def check_level(n, m, name="level"):
    if not isinstance(n, numbers.Integral) or not 0 <= n <= m:
        raise ValueError(f"{name} must lie in [0, {m}], got {n!r}")
    return int(n)


def check_positive_int(value, name):
    if not isinstance(value, numbers.Integral) or value < 1:
        raise ValueError(f"{name} must be a positive integer, got {value!r}")
    return int(value)


def check_probability_weights(weights, n_atoms=None, total=1.0, atol=1e-9):
    w = np.asarray(weights, dtype=float)
    if w.ndim != 1:
        raise ValueError("weights must be one-dimensional")
    if n_atoms is not None and w.shape[0] != n_atoms:
        raise ValueError(f"expected {n_atoms} weights, got {w.shape[0]}")
    if np.any(w <= 0):
        raise ValueError("weights must be strictly positive")
    if total is not None and abs(w.sum() - total) > atol:
        raise ValueError(f"weights sum to {w.sum()!r}, expected {total}")
    return w


def pointwise_norm(values):
    """Absolute value of scalars, Euclidean norm along the last axis of vectors."""
    v = np.asarray(values)
    if v.ndim <= 1:
        return np.abs(v)
    return np.sqrt(np.sum(np.abs(v) ** 2, axis=-1))


def check_increasing(seq, name, strict=True):
    seq = [int(s) for s in seq]
    for a, b in zip(seq, seq[1:]):
        if (b <= a) if strict else (b < a):
            raise ValueError(f"{name} must be {'strictly ' if strict else ''}increasing")
    return seq


def is_lacunary(seq):
    seq = [int(s) for s in seq]
    if any(s <= 0 for s in seq):
        return False
    return all(b > a for a, b in zip(seq, seq[1:]))


def lacunarity(seq):
    """``inf seq[k+1]/seq[k]`` over the finite sequence (``inf`` if it has one term)."""
    seq = [int(s) for s in seq]
    if len(seq) < 2:
        return float("inf")
    return min(b / a for a, b in zip(seq, seq[1:]))
