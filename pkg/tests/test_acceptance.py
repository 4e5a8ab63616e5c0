"""Every acceptance criterion at its stated tolerance, one pass/fail line each.

Oracle values are frozen from mpmath (30 digits) so that the checks do not
grade the package's special functions with themselves.
"""

import pytest

from stochop.verify import CHECKS

from .conftest import ACCEPTANCE_LINES

AIRY_ZEROS = [2.3381074104597670385, 4.0879494441309706166, 5.5205598280955510591]  # -airyaizero(k)
J0_1 = 2.4048255576957727686  # besseljzero(0, 1)
J1_1 = 3.8317059702075123156  # besseljzero(1, 1)

ORACLES = {
    1: dict(airy_oracle=AIRY_ZEROS),
    2: dict(j0=J0_1, j1=J1_1),
    6: dict(airy1=AIRY_ZEROS[0], j0=J0_1),
}

SLOW = {5, 7, 8, 9, 10}


def _param(c):
    marks = [pytest.mark.slow] if c in SLOW else []
    return pytest.param(c, marks=marks, id=f"criterion-{c}")


@pytest.mark.parametrize("criterion", [_param(c) for c in sorted(CHECKS)])
def test_criterion(criterion):
    result = CHECKS[criterion](**ORACLES.get(criterion, {}))
    line = result.line()
    ACCEPTANCE_LINES.append(line)
    print(line)
    assert result.passed, line
