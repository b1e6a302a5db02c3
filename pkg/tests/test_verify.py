"""Structure and behavior of the verification suites."""

import pytest

from bhspectra import DomainError, UsageError
from bhspectra.verify import SUITES, run_suites, suite_cascade, suite_typicality


def test_fast_suites_pass_with_default_seed():
    for report in (suite_cascade(seed=0), suite_typicality(seed=0)):
        assert report.all_passed, [c.name for c in report.checks if not c.passed]
        assert report.wall_time_s > 0.0


def test_report_serialization():
    report = suite_cascade(seed=0)
    payload = report.to_json_dict()
    assert payload["suite"] == "cascade"
    assert {c["name"] for c in payload["checks"]} == {c.name for c in report.checks}
    for check in payload["checks"]:
        assert set(check) == {"name", "passed", "measured", "tolerance", "detail"}


def test_all_runs_every_suite():
    assert set(SUITES) == {"identities", "typicality", "cascade", "info"}


def test_unknown_suite_rejected():
    with pytest.raises(UsageError):
        run_suites("bogus")


def test_corrupted_alpha_rejected_before_running():
    with pytest.raises(DomainError):
        run_suites("cascade", alpha=float("nan"))
