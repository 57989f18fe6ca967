"""The fourteen acceptance criteria, one test each, at their stated tolerances."""

import pytest

from hardylab import verification

RESULTS = []


@pytest.mark.parametrize("criterion", verification.CRITERIA, ids=lambda c: f"{c.number:02d}-{c.__name__}")
def test_criterion(criterion):
    result = criterion(seed=0)
    RESULTS.append(result)
    print(result.line())
    assert result.passed, result.details
