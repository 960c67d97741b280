import sys
from pathlib import Path

sys.path.insert(0, str(Path(__file__).parent))

# criterion number -> {test name: passed}
_ACCEPTANCE: dict[int, dict[str, bool]] = {}


def pytest_runtest_logreport(report):
    if "test_acceptance.py" not in report.nodeid:
        return
    name = report.nodeid.split("::")[-1]
    if not name.startswith("test_criterion_"):
        return
    if report.when != "call" and report.outcome == "passed":
        return
    tests = _ACCEPTANCE.setdefault(int(name.split("_")[2]), {})
    tests[name] = tests.get(name, True) and report.outcome == "passed"


def pytest_terminal_summary(terminalreporter):
    if not _ACCEPTANCE:
        return
    terminalreporter.section("acceptance criteria")
    for number in sorted(_ACCEPTANCE):
        tests = _ACCEPTANCE[number]
        status = "PASS" if all(tests.values()) else "FAIL"
        terminalreporter.write_line(f"criterion {number:2d}: {status}  {', '.join(tests)}")
