"""Engine-versus-oracle cross-check suite."""

from cvcluster.validate import VALIDATION_TOLERANCE, run_validation_suite


def test_every_check_passes_at_default_cutoffs():
    results = run_validation_suite(doubling=False)
    assert len(results) == 7
    assert len({result.name for result in results}) == 7
    for result in results:
        assert result.passed, f"{result.name}: {result.detail}"
        assert result.worst <= result.tolerance
        assert result.tolerance == VALIDATION_TOLERANCE
        assert "max deviation" in result.detail


def test_a_tight_tolerance_is_reported_as_failure():
    results = run_validation_suite(tolerance=1e-12, doubling=False)
    assert any(not result.passed for result in results)
    for result in results:
        assert result.passed == (result.worst <= 1e-12)
