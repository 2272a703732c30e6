import logging

from dualgrass.selftest import SUITES, run_selftest

EXPECTED = {"expm_inverse", "group_membership", "frechet_vs_differences", "decompose_orthogonality",
            "triple_bracket_formula", "fiber_identity", "conformality", "classifier_vs_closure",
            "k_brackets", "su11_bracket_preservation"}


def test_suite_names():
    assert {name for name, _, _ in SUITES} == EXPECTED


def test_default_run_passes():
    results = run_selftest(0, 100)
    assert all(r.passed for r in results), [r for r in results if not r.passed]
    assert all(r.trials == 100 for r in results)


def test_other_seed_passes():
    assert all(r.passed for r in run_selftest(2 ** 63 + 12345, 30))


def test_deterministic():
    assert run_selftest(7, 20) == run_selftest(7, 20)


def test_zero_trials_warns(caplog):
    with caplog.at_level(logging.WARNING):
        results = run_selftest(0, 0)
    assert all(r.passed and r.trials == 0 for r in results)
    assert "vacuous" in caplog.text
