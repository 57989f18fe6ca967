"""Numerical toolkit for independent sums of Hardy spaces.

Dyadic (Walsh) analysis lives in :mod:`hardylab.dyadic`, trigonometric
polynomials in :mod:`hardylab.trig`, vector-valued norms and K-functionals in
:mod:`hardylab.norms`, finite-filtration extremal problems in
:mod:`hardylab.extremal`, valued trees in :mod:`hardylab.trees` and the
end-to-end experiments in :mod:`hardylab.experiments`.
"""

from .reports import NormReport

__version__ = "0.1.0"
__all__ = ["NormReport", "__version__"]
