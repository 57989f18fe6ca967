"""Uniform return type for norm computations."""

import json
from dataclasses import asdict, dataclass
from typing import Optional

METHODS = ("exact", "quadrature", "monte_carlo")


@dataclass(frozen=True)
class NormReport:
    """A computed norm together with how it was obtained.

    ``error`` is an absolute error bound for ``exact``/``quadrature`` results
    and the standard error of the mean for ``monte_carlo`` ones.
    """

    value: float
    method: str
    error: float = 0.0
    samples: Optional[int] = None
    seed: Optional[int] = None
    lower_bound: Optional[float] = None

    def __post_init__(self):
        if self.method not in METHODS:
            raise ValueError(f"unknown method {self.method!r}")
        if not self.error >= 0:
            raise ValueError("error must be non-negative")
        if self.method == "monte_carlo" and (self.samples is None or self.seed is None):
            raise ValueError("monte carlo reports must record samples and seed")

    def __float__(self):
        return float(self.value)

    def to_dict(self):
        d = asdict(self)
        if d["lower_bound"] is None:
            del d["lower_bound"]
        return d

    def to_json(self):
        return json.dumps(self.to_dict(), sort_keys=True)

    @classmethod
    def from_json(cls, text):
        return cls(**json.loads(text))
