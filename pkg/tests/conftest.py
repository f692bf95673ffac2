import sys
from pathlib import Path

import pytest

sys.path.insert(0, str(Path(__file__).parent))

_criteria: dict[str, dict] = {}


def pytest_addoption(parser):
    parser.addoption("--runslow", action="store_true", default=False, help="run full-scale slow tests")


def pytest_collection_modifyitems(config, items):
    if config.getoption("--runslow"):
        return
    skip = pytest.mark.skip(reason="full-scale run; pass --runslow to enable")
    for item in items:
        if "slow" in item.keywords:
            item.add_marker(skip)


@pytest.fixture
def record(request):
    """Attach a one-line measurement to the acceptance summary of this test."""
    def _record(text: str) -> None:
        _criteria.setdefault(request.node.nodeid, {})["detail"] = text
        print(text)
    return _record


def pytest_runtest_logreport(report):
    if "test_acceptance" not in report.nodeid:
        return
    entry = _criteria.setdefault(report.nodeid, {})
    if report.when == "call" or (report.when == "setup" and report.outcome != "passed"):
        entry["outcome"] = {"passed": "PASS", "failed": "FAIL", "skipped": "SKIP"}[report.outcome]


def pytest_terminal_summary(terminalreporter):
    if not _criteria:
        return
    terminalreporter.section("acceptance criteria")
    for nodeid, entry in sorted(_criteria.items()):
        name = nodeid.split("::")[-1]
        detail = entry.get("detail", "")
        terminalreporter.write_line(f"{entry.get('outcome', '????')}  {name}  {detail}".rstrip())
