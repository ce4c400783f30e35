"""Acceptance suite: one test per numbered criterion, at the stated tolerances.

Each test prints the criterion's one-line pass/fail summary (visible with
``pytest -v -s`` and in the failure report) and asserts it passed.

Criterion 8 is marked as an expected failure: its slope clause cannot hold on
weighted projective models.  The time-tau0 flow element itself fixes the
chart center, commutes with the smoothed kernel, and acts as -1 on the
normal directions, so the diagonal is exactly even in the displacement and
the odd part is identically zero — there is no odd/even ratio to fit a slope
to.  The u = 0 vanishing clause does hold and is asserted separately below.
"""

import numpy as np
import pytest

from tracelab import verify


@pytest.fixture(scope="module")
def shared():
    return verify._Shared(seed=0)


def _check(result):
    print()
    print(result.line())
    assert result.passed, result.line() + ("; " + result.detail if result.detail else "")


def test_criterion_01_spectral_structure(shared):
    _check(verify.crit_01_spectral_structure(shared))


def test_criterion_02_normalization_anchors(shared):
    _check(verify.crit_02_normalization_anchors(shared))


def test_criterion_03_negative_lambda(shared):
    _check(verify.crit_03_negative_lambda(shared))


def test_criterion_04_global_trace_trivial_period(shared):
    _check(verify.crit_04_global_trace_trivial_period(shared))


def test_criterion_05_global_trace_pi_period(shared):
    _check(verify.crit_05_global_trace_pi_period(shared))


def test_criterion_06_local_scaling(shared):
    _check(verify.crit_06_local_scaling(shared))


def test_criterion_07_offlocus_decay(shared):
    _check(verify.crit_07_offlocus_decay(shared))


@pytest.mark.xfail(
    strict=True,
    reason="odd part is identically zero on torus-symmetric models; "
    "the odd/even slope clause has nothing to fit (see module docstring)",
)
def test_criterion_08_parity(shared):
    _check(verify.crit_08_parity(shared))


def test_criterion_08_parity_vanishing_clause(shared):
    """The attainable half of criterion 8: odd part vanishes at u = 0 exactly,
    and in fact for every displacement on these models."""
    res = verify.crit_08_parity(shared)
    print()
    print(res.line())
    assert res.measured["odd_at_0"] == 0.0
    assert res.measured["max_odd_over_even"] == 0.0


def test_criterion_09_gaussian_integral(shared):
    _check(verify.crit_09_gaussian_integral(shared))


def test_criterion_10_stationary_phase(shared):
    _check(verify.crit_10_stationary_phase(shared))


def test_criterion_11_local_global_consistency(shared):
    _check(verify.crit_11_local_global_consistency(shared))


def test_manifest_and_exit_code(tmp_path, shared):
    """The aggregate runner reports 10/11 and a nonzero exit code honestly."""
    results, manifest, code = verify.run_all(out_dir=tmp_path, echo=lambda s: None)
    assert manifest["n_passed"] == 10
    assert code == 1
    failed = [c for c in manifest["criteria"] if not c["passed"]]
    assert len(failed) == 1 and failed[0]["index"] == 8
    assert (tmp_path / "verify_manifest.json").exists()
