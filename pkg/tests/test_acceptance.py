"""Acceptance gate: every criterion at its stated sample size and tolerance.

Each test prints one PASS/FAIL line (visible with `pytest -s` or in captured
output) and asserts the criterion outcome.  Criterion 6 is a known red: with
beams fixed to reference-port CSI, physical off-reference ports lose the
array gain, so FAMA selection cannot track the identical-marginal
Beta-prime benchmark the bounds and proximity targets are built from.  The
test still runs the stated check and reports the measured margins.
"""

from fama_lab.acceptance import (
    SUITE_SEED,
    criterion_01_cross_form_identity,
    criterion_02_marginal_goodness_of_fit,
    criterion_03_physical_model_fidelity,
    criterion_04_zf_nulling_and_gains,
    criterion_05_correlation_model,
    criterion_06_outage_sandwich,
    criterion_07_small_gamma_asymptote,
    criterion_08_large_sir_tail,
    criterion_09_large_n_regime,
    criterion_10_reproducibility,
)


def _report(result):
    status = "PASS" if result.passed else "FAIL"
    print(f"[acceptance {result.index:2d}] {status} {result.name}: "
          f"{result.detail}")
    assert result.passed, f"criterion {result.index} failed: {result.detail}"


def test_criterion_01_cross_form_identity():
    _report(criterion_01_cross_form_identity(SUITE_SEED))


def test_criterion_02_marginal_goodness_of_fit():
    _report(criterion_02_marginal_goodness_of_fit(SUITE_SEED))


def test_criterion_03_physical_model_fidelity():
    _report(criterion_03_physical_model_fidelity(SUITE_SEED))


def test_criterion_04_zf_nulling_and_gains():
    _report(criterion_04_zf_nulling_and_gains(SUITE_SEED))


def test_criterion_05_correlation_model():
    _report(criterion_05_correlation_model(SUITE_SEED))


def test_criterion_06_outage_sandwich():
    _report(criterion_06_outage_sandwich(SUITE_SEED))


def test_criterion_07_small_gamma_asymptote():
    _report(criterion_07_small_gamma_asymptote(SUITE_SEED))


def test_criterion_08_large_sir_tail():
    _report(criterion_08_large_sir_tail(SUITE_SEED))


def test_criterion_09_large_n_regime():
    _report(criterion_09_large_n_regime(SUITE_SEED))


def test_criterion_10_reproducibility():
    _report(criterion_10_reproducibility(SUITE_SEED))
