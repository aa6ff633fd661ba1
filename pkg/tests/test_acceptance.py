"""The ten acceptance criteria, each at its stated tolerance.

One pass/fail line per criterion is printed as the test runs and repeated
in the terminal summary.
"""

import pytest

from bctrs.verification import CHECKS, run_check

from conftest import ACCEPTANCE_LINES


@pytest.mark.parametrize("number", [n for n, _ in CHECKS], ids=[f"criterion_{n}" for n, _ in CHECKS])
def test_criterion(number):
    result = run_check(number)
    line = result.line()
    print(line)
    ACCEPTANCE_LINES.append(line)
    assert result.passed, f"{line}\ncounterexample: {result.counterexample}"


def test_injected_fault_is_reported():
    result = run_check(2, faults=["bounds"])
    assert not result.passed
    assert result.counterexample is not None
