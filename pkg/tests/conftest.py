import pytest

from fasrecon import construction

CRITERIA = {
    1: "interval FAS golden (eps, gamma, margins)",
    2: "fiber cardinality over 1/2, 0, 1/5",
    3: "X_n^* goldens",
    4: "unnested example and nestify",
    5: "ultrametric reconstruction (3-adic 81 pts, Cantor depth 5)",
    6: "countable reconstruction on gen_convergent(64)",
    7: "property suites (>= 200 cases each)",
    8: "homology probe (interval, circle, Euler identity)",
    9: "brute-force oracle equivalence",
}

_outcomes: dict[int, list[tuple[str, str]]] = {}


def pytest_configure(config):
    config.addinivalue_line("markers", "criterion(n): acceptance criterion exercised by the test")


def pytest_runtest_logreport(report):
    marker = report.__dict__.get("criterion")
    if marker is None:
        return
    if report.when == "call" or report.outcome != "passed":
        _outcomes.setdefault(marker, []).append((report.nodeid, report.outcome))


@pytest.hookimpl(hookwrapper=True)
def pytest_runtest_makereport(item, call):
    outcome = yield
    report = outcome.get_result()
    m = item.get_closest_marker("criterion")
    if m is not None:
        report.criterion = m.args[0]


def pytest_terminal_summary(terminalreporter):
    if not _outcomes:
        return
    tr = terminalreporter
    tr.section("acceptance criteria")
    for n in sorted(CRITERIA):
        results = _outcomes.get(n)
        if not results:
            tr.write_line(f"criterion {n}: NOT RUN  {CRITERIA[n]}")
            continue
        ok = all(outcome == "passed" for _, outcome in results)
        tr.write_line(f"criterion {n}: {'PASS' if ok else 'FAIL'}  {CRITERIA[n]}  ({len(results)} checks)")


@pytest.fixture(scope="session")
def interval4():
    return construction.paper_interval_fas(4)


@pytest.fixture(scope="session")
def interval5():
    return construction.paper_interval_fas(5)


@pytest.fixture(scope="session")
def unnested3():
    return construction.paper_unnested_fas(3)
