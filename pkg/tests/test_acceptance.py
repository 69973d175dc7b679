"""Acceptance gate: the ten standard verification checks, one test each.

The whole suite runs once per session through verify.run_all with the default
seed; each test prints a single PASS/FAIL line for its check and asserts the
recorded outcome, so a red test points directly at the failing check's
measured values.
"""

import pytest

from greenpot import verify


@pytest.fixture(scope="session")
def suite():
    results = verify.run_all(seed=0)
    return {r.cid: r for r in results}


def _gate(suite, cid):
    res = suite[cid]
    verdict = "PASS" if res.passed else "FAIL"
    print(f"criterion {cid} ({res.title}): {verdict} "
          f"[{res.runtime_s:.2f} s] {res.measured}")
    assert res.passed, (
        f"criterion {cid} failed; threshold: {verify.THRESHOLDS[cid]}; "
        f"measured: {res.measured}")


def test_criterion_01_two_point_instance_exact(suite):
    _gate(suite, "1")


def test_criterion_02_representation_matches_solver(suite):
    _gate(suite, "2")


def test_criterion_03_optimality_characterization(suite):
    _gate(suite, "3")


def test_criterion_04_primal_dual_agreement(suite):
    _gate(suite, "4")


def test_criterion_05_capacity_and_kernel_closed_forms(suite):
    _gate(suite, "5")


def test_criterion_06_monotone_truncation_values(suite):
    _gate(suite, "6")


def test_criterion_07_mass_escape_tracking_freezing(suite):
    _gate(suite, "7")


def test_criterion_08_support_location_by_kernel_order(suite):
    _gate(suite, "8")


def test_criterion_09_sweep_operator_algebra(suite):
    _gate(suite, "9")


def test_criterion_10_reproducible_outputs(suite):
    _gate(suite, "10")
