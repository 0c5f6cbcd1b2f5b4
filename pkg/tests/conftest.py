import sys
from pathlib import Path

import pytest

sys.path.insert(0, str(Path(__file__).parent))

_results: dict[int, tuple[str, str, str]] = {}
_RANK = {"SKIP": 0, "PASS": 1, "FAIL": 2}


def pytest_configure(config):
    config.addinivalue_line("markers", "criterion(number, title): acceptance criterion id")


@pytest.hookimpl(hookwrapper=True)
def pytest_runtest_makereport(item, call):
    outcome = yield
    rep = outcome.get_result()
    mark = item.get_closest_marker("criterion")
    if mark is None:
        return
    number, title = mark.args
    if rep.when == "call" or (rep.when == "setup" and not rep.passed):
        if rep.skipped:
            reason = rep.longrepr[2] if isinstance(rep.longrepr, tuple) else str(rep.longrepr)
            new = ("SKIP", title, reason.replace("Skipped: ", ""))
        elif rep.failed:
            msg = str(rep.longrepr).strip().splitlines()[-1] if rep.longrepr else ""
            new = ("FAIL", title, msg[:160])
        else:
            new = ("PASS", title, "")
        # parametrized criteria: any failure wins, then any pass
        old = _results.get(number)
        if old is None or _RANK[new[0]] > _RANK[old[0]]:
            _results[number] = new


def pytest_terminal_summary(terminalreporter):
    if not _results:
        return
    tr = terminalreporter
    tr.section("acceptance criteria")
    for number in sorted(_results):
        status, title, note = _results[number]
        line = f"criterion {number:>2}: {status}  {title}"
        if note:
            line += f"  ({note})"
        tr.write_line(line)
