"""Acceptance gate: every criterion at its stated tolerance.

Each test prints one pass/fail line (visible with ``pytest -s`` or in the
CLI ``selftest``, which runs the same suite).
"""

import pytest

from kbmlab import acceptance


@pytest.fixture(scope="module")
def suite_data():
    return acceptance.build_suite_data()


def _report(result):
    print(f"criterion {result.cid:02d} {'PASS' if result.passed else 'FAIL'}: "
          f"{result.title} | {result.detail}")
    assert result.passed, f"criterion {result.cid}: {result.detail}"


def test_criterion_01_closed_form_branch():
    _report(acceptance.criterion_1())


def test_criterion_02_convergence_at_desk_scale(suite_data):
    _report(acceptance.criterion_2(suite_data))


def test_criterion_03_perturbation_coefficients():
    _report(acceptance.criterion_3())


def test_criterion_04_zero_mode_norm_bound():
    _report(acceptance.criterion_4())


def test_criterion_05_riesz_projection():
    _report(acceptance.criterion_5())


def test_criterion_06_algebraic_identities():
    _report(acceptance.criterion_6())


def test_criterion_07_accretivity():
    _report(acceptance.criterion_7())


def test_criterion_08_collision_diagnostics():
    _report(acceptance.criterion_8())


def test_criterion_09_truncation_certificate(suite_data):
    _report(acceptance.criterion_9(suite_data))


def test_criterion_10_oracle_equivalence():
    _report(acceptance.criterion_10())
