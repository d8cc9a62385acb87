import sys
from collections import defaultdict
from pathlib import Path

sys.path.insert(0, str(Path(__file__).parent))

# acceptance bookkeeping: criterion number -> title, nodeid -> criterion number
_TITLES = {}
_NODE_CRITERION = {}
_OUTCOMES = defaultdict(list)


def pytest_configure(config):
    config.addinivalue_line("markers", "criterion(n, title, limit_seconds=None): acceptance criterion a test belongs to")


def pytest_collection_modifyitems(items):
    for item in items:
        m = item.get_closest_marker("criterion")
        if m is not None:
            n, title, *limit = m.args
            _TITLES[n] = (title, limit[0] if limit else None)
            _NODE_CRITERION[item.nodeid] = n


def pytest_runtest_logreport(report):
    n = _NODE_CRITERION.get(report.nodeid)
    if n is None:
        return
    _OUTCOMES[n].append((report.outcome, report.duration))


def pytest_terminal_summary(terminalreporter):
    if not _OUTCOMES:
        return
    tr = terminalreporter
    tr.section("acceptance criteria")
    for n in sorted(_TITLES):
        res = _OUTCOMES.get(n, [])
        outcomes = {o for o, _ in res}
        if not res:
            status = "NOT RUN"
        elif "failed" in outcomes:
            status = "FAIL"
        elif "skipped" in outcomes:
            status = "SKIP"
        else:
            status = "PASS"
        title, limit = _TITLES[n]
        seconds = sum(d for _, d in res)
        timing = f"{seconds:.1f}s"
        if limit is not None:
            timing += f" of {limit:g}s"
            if status == "PASS" and seconds > limit:
                status = "FAIL"
                timing += ", over the time limit"
        tr.write_line(f"criterion {n}: {status:<7} {title} ({timing})")
