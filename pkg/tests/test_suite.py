"""The acceptance run end to end."""

import pytest

from cychern.config import TOLERANCES
from cychern.report import Report
from cychern.suite import MAX_IDENTITY_DEGREE, check_cochain_identities, run_suite


@pytest.mark.unit
@pytest.mark.parametrize("name", ["pt", "dual", "nil"])
def test_cochain_identities_from_degree_zero(request, rng, name):
    cat = request.getfixturevalue(name)
    report = Report(command="suite")
    check_cochain_identities(report, cat, rng, TOLERANCES)
    names = [record.name for record in report.records]
    assert f"{cat.name}.b^2.deg0" in names
    assert f"{cat.name}.B0b+b'B0.deg0" in names
    assert f"{cat.name}.bB+Bb.deg{MAX_IDENTITY_DEGREE}" in names
    assert report.passed, [r.name for r in report.records if not r.passed]


@pytest.mark.slow
@pytest.mark.integration
def test_suite_passes():
    report = run_suite(TOLERANCES, seed=0)
    failed = [record.name for record in report.records if not record.passed]
    failed += [golden.name for golden in report.goldens if not golden.passed]
    assert report.passed, failed
    assert any(r.name.startswith("FIX_PT.S_on_B") for r in report.records)


@pytest.mark.slow
@pytest.mark.integration
def test_suite_threads_agree():
    serial = run_suite(TOLERANCES, seed=7)
    threaded = run_suite(TOLERANCES, seed=7, threads=2)
    assert [r.name for r in serial.records] == [r.name for r in threaded.records]
    assert serial.passed == threaded.passed
