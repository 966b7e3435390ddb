import pytest

from fairdiv.fixtures import FIXTURES, run_fixtures


@pytest.mark.parametrize("check", FIXTURES, ids=lambda f: f.__name__)
def test_fixture_passes(check):
    result = check()
    assert result.passed, result.detail


def test_run_fixtures_is_deterministic():
    assert run_fixtures() == run_fixtures()
