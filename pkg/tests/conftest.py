from __future__ import annotations

import time

CRITERIA = {
    1: "law axioms",
    2: "inversion identity",
    3: "index formula",
    4: "filtration congruence",
    5: "main theorem, heisenberg",
    6: "main theorem, additive",
    7: "non-analytic witness",
    8: "chart invariance",
    9: "analytic spectrum",
    10: "exactness and determinism",
}
SUITE_LIMIT = 120.0

_criterion_of: dict[str, int] = {}
_outcomes: dict[int, list[tuple[str, str]]] = {}
_started = [0.0]


def pytest_configure(config):
    config.addinivalue_line("markers", "acceptance(k): test belongs to acceptance criterion k")


def pytest_sessionstart(session):
    _started[0] = time.perf_counter()


def pytest_collection_modifyitems(session, config, items):
    for item in items:
        mark = item.get_closest_marker("acceptance")
        if mark is not None:
            _criterion_of[item.nodeid] = mark.args[0]


def pytest_runtest_logreport(report):
    k = _criterion_of.get(report.nodeid)
    if k is None:
        return
    if report.when == "call" or report.outcome != "passed":
        _outcomes.setdefault(k, []).append((report.nodeid, report.outcome))


def pytest_terminal_summary(terminalreporter, exitstatus, config):
    if not _outcomes:
        return
    elapsed = time.perf_counter() - _started[0]
    tr = terminalreporter
    tr.section("acceptance criteria")
    for k, title in CRITERIA.items():
        results = _outcomes.get(k)
        if not results:
            tr.write_line(f"ACCEPTANCE {k} {title}: NOT RUN")
            continue
        ok = all(outcome == "passed" for _, outcome in results)
        note = f"{len(results)} checks"
        if k == 10:
            # the wall-clock bound covers the whole session, so it is judged here
            ok = ok and elapsed < SUITE_LIMIT
            note += f", session {elapsed:.1f}s (limit {SUITE_LIMIT:.0f}s)"
        tr.write_line(f"ACCEPTANCE {k} {title}: {'PASS' if ok else 'FAIL'} ({note})")
        for nodeid, outcome in results:
            if outcome != "passed":
                tr.write_line(f"    {outcome}: {nodeid}")
