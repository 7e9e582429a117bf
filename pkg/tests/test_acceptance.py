"""Acceptance gate: all twelve primary claims at their stated tolerances.

Each test runs one numbered check from rbmlab.acceptance and prints its
one-line verdict (run with -s to watch them land; a failure carries the
same line in its assertion message).  The sampling-heavy checks draw
five- and six-figure sample counts, so expect the module to take tens of
minutes on one core; set RBMLAB_WORKERS to spread the load.
"""

import os

import pytest

from rbmlab import acceptance

_WORKERS = int(os.environ.get("RBMLAB_WORKERS", "1"))

_IDS = {
    index: fn.__name__.replace("check_", "", 1)
    for index, fn in acceptance.CHECKS.items()
}


@pytest.mark.parametrize(
    "index", sorted(acceptance.CHECKS),
    ids=[f"{i:02d}-{_IDS[i]}" for i in sorted(acceptance.CHECKS)])
def test_criterion(index):
    result = acceptance.CHECKS[index](workers=_WORKERS)
    line = (f"{'PASS' if result.passed else 'FAIL'} {result.index:2d} "
            f"{result.name}: {result.detail}")
    print(line)
    assert result.passed, line
