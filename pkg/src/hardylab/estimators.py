"""scikit-learn style transformers over batches of dyadic functions.

Each row of ``X`` holds the ``2**m`` values of one function on the Cantor
group, in the index convention of :mod:`hardylab.dyadic`.  ``fit`` records
the resolution; ``transform`` rejects inputs of any other length.  The
operators are fixed linear (or sublinear) maps, so fitting learns nothing
beyond the input shape.
"""

import numpy as np
from sklearn.base import BaseEstimator, TransformerMixin
from sklearn.utils.validation import check_array, check_is_fitted

from . import dyadic
from ._validation import MAX_RESOLUTION, check_level, resolution_of

__all__ = [
    "WalshTransformer",
    "ConditionalExpectation",
    "SquareFunction",
    "BlockProjector",
    "Dilation",
    "Periodizer",
]


class _DyadicTransformer(TransformerMixin, BaseEstimator):
    def _validate(self, X, reset):
        X = check_array(X, dtype=np.float64)
        m = resolution_of(X.shape[1])
        if m > MAX_RESOLUTION:
            raise ValueError(f"resolution {m} exceeds the cap of {MAX_RESOLUTION}")
        if reset:
            self.resolution_ = m
            self.n_features_in_ = X.shape[1]
        elif m != self.resolution_:
            raise ValueError(f"X has {X.shape[1]} columns; the transformer was fitted with {self.n_features_in_}")
        return X

    def fit(self, X, y=None):
        self._validate(X, reset=True)
        self._check_params()
        return self

    def _check_params(self):
        pass

    def transform(self, X):
        check_is_fitted(self, "resolution_")
        X = self._validate(X, reset=False)
        return self._apply(X)


class WalshTransformer(_DyadicTransformer):
    """Rows to Walsh coefficients ``<f, w_A>`` (probability-normalised).

    ``inverse_transform`` synthesises ``sum_A c_A w_A``.
    """

    def _apply(self, X):
        return dyadic.fwht(X, axis=1) / X.shape[1]

    def inverse_transform(self, X):
        check_is_fitted(self, "resolution_")
        X = self._validate(X, reset=False)
        return dyadic.fwht(X, axis=1)


class ConditionalExpectation(_DyadicTransformer):
    """``E_level`` (``kind='F'``) or ``E*_level`` (``kind='F*'``) applied to each row.

    Parameters
    ----------
    level : int
        Number of coordinates kept (``F``) or averaged out (``F*``).
    kind : {'F', 'F*'}
    """

    def __init__(self, level=1, kind="F"):
        self.level = level
        self.kind = kind

    def _check_params(self):
        check_level(self.level, self.resolution_, "level")
        if self.kind not in ("F", "F*"):
            raise ValueError(f"kind must be 'F' or 'F*', got {self.kind!r}")

    def _apply(self, X):
        self._check_params()
        return np.stack([dyadic.cond_exp(dyadic.DyadicFunction(x), self.level, self.kind).values for x in X])


class SquareFunction(_DyadicTransformer):
    """Pointwise martingale square function ``S f``; ``h1_norms`` averages it per row."""

    def _apply(self, X):
        return np.stack([dyadic.square_function(dyadic.DyadicFunction(x)).values for x in X])

    def h1_norms(self, X):
        return self.transform(X).mean(axis=1)


class BlockProjector(_DyadicTransformer):
    """Keep the Walsh coefficients whose index set fits inside one block.

    Parameters
    ----------
    blocks : sequence of (a, b)
        Disjoint increasing coordinate intervals ``[a, b]`` within ``1..m``.
    """

    def __init__(self, blocks=((1, 1),)):
        self.blocks = blocks

    def _check_params(self):
        spec = dyadic.BlockSpec(tuple(tuple(b) for b in self.blocks))
        if spec.max_index > self.resolution_:
            raise ValueError(f"blocks reach coordinate {spec.max_index} > resolution {self.resolution_}")
        return spec

    def _apply(self, X):
        spec = self._check_params()
        return np.stack([dyadic.block_projection(dyadic.DyadicFunction(x), spec).values for x in X])


class Dilation(_DyadicTransformer):
    """Coordinate shift ``T^power``; output rows have ``2**(m + power)`` entries."""

    def __init__(self, power=1):
        self.power = power

    def _check_params(self):
        if not isinstance(self.power, (int, np.integer)) or self.power < 0:
            raise ValueError("power must be a non-negative integer")
        if self.resolution_ + self.power > MAX_RESOLUTION:
            raise ValueError("dilated resolution exceeds the cap")

    def _apply(self, X):
        self._check_params()
        return np.repeat(X, 2**self.power, axis=1)


class Periodizer(_DyadicTransformer):
    """``E*_level``: average over the first ``level`` coordinates (alias with a fixed kind)."""

    def __init__(self, level=1):
        self.level = level

    def _check_params(self):
        check_level(self.level, self.resolution_, "level")

    def _apply(self, X):
        self._check_params()
        return np.stack([dyadic.cond_exp(dyadic.DyadicFunction(x), self.level, "F*").values for x in X])
