"""Acceptance suite: one check per criterion, each printing a PASS/FAIL line.

Tolerances live in ``relsosc.verify``; the wall-clock budgets are pinned here.
Run directly (``python3 tests/test_acceptance.py``) for the summary table alone.
"""
import sys

import pytest

from relsosc import verify

# criterion number -> (check, runtime budget in seconds)
CRITERIA = {
    1: (verify.check_orthonormality, 30.0),
    2: (verify.check_eigen_residual, 10.0),
    3: (verify.check_algebra, 1.0),
    4: (verify.check_ladder, 30.0),
    5: (verify.check_cs_cross_form, 10.0),
    6: (verify.check_overlap_propagator, 10.0),
    7: (verify.check_completeness, 60.0),
    8: (verify.check_partition, 1.0),
    9: (verify.check_path_integral, 300.0),
    10: (verify.check_classical, 5.0),
    11: (verify.check_bohr_sommerfeld, 10.0),
    12: (verify.check_alpha_nu_sweep, 5.0),
    13: (verify.check_nonrel_limit, 5.0),
}

PINNED_TOL = {1: 1e-8, 2: 1e-9, 3: 1e-12, 4: 1e-7, 5: 1e-10, 6: 1e-10, 7: 1e-10, 8: 1e-14, 9: 3.0,
              10: 1e-9, 11: 1e-14, 12: 1e-12, 13: 0.3}


def _run(number):
    check, budget = CRITERIA[number]
    result = verify.timed(check)
    within = result.elapsed < budget
    line = result.line() + ("" if within else f" [over budget {budget:.0f} s]")
    return result, within, line


@pytest.mark.parametrize("number", sorted(CRITERIA), ids=lambda n: f"criterion_{n:02d}")
def test_criterion(number, capsys):
    result, within, line = _run(number)
    with capsys.disabled():
        print("\n" + line)
        if result.detail:
            print(f"      detail: {result.detail}")
    assert result.number == number
    assert result.tol == PINNED_TOL[number]
    assert result.passed, line
    assert within, line


if __name__ == "__main__":
    failed = 0
    for n in sorted(CRITERIA):
        result, within, line = _run(n)
        print(line, flush=True)
        failed += not (result.passed and within)
    print(f"{len(CRITERIA) - failed}/{len(CRITERIA)} criteria pass")
    sys.exit(1 if failed else 0)
