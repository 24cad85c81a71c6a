"""Acceptance criteria, each at its stated tolerance.

Every test prints a single ``criterion N [PASS|FAIL] ...`` line; the lines are
also collected into an "acceptance criteria" section of the terminal summary.
"""

import pytest

from roughheston.validation import CHECKS, Tolerances

SLOW = {7}


@pytest.mark.parametrize(
    "number",
    [pytest.param(n, marks=pytest.mark.slow) if n in SLOW else n for n in sorted(CHECKS)],
    ids=lambda n: f"criterion_{n}",
)
def test_criterion(number, criterion_log):
    result = CHECKS[number](Tolerances())
    print(result.line())
    criterion_log.append(result.line())
    assert result.passed, result.line()
