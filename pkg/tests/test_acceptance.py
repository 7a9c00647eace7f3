"""The eleven acceptance criteria, one test each.

Each test records a PASS/FAIL line, collected in the terminal summary.
"""

import pytest

from heegner_lab import checks

TIME_LIMITS = {"1 eigen-distribution law": 60.0, "7 class groups": 10.0}


@pytest.mark.parametrize("name,fn", checks.ACCEPTANCE, ids=[n for n, _ in checks.ACCEPTANCE])
def test_acceptance(name, fn, record_property):
    result = checks._timed(name, fn)
    limit = TIME_LIMITS.get(name)
    in_time = limit is None or result.elapsed < limit
    ok = result.ok and in_time
    suffix = "" if in_time else f" over the {limit:.0f}s limit"
    line = f"[{'PASS' if ok else 'FAIL'}] criterion {name} ({result.elapsed:.2f}s){suffix}"
    record_property("acceptance", line)
    print("\n" + line)
    assert result.ok, result.details
    assert in_time, f"took {result.elapsed:.1f}s, limit {limit}s"
