import math

import pytest

from wandering.families import FamilySpec, PRule, build

E = math.e

SPECS = {
    "baker1976": lambda: FamilySpec("baker1976", 1 / (4 * E), N=2, r1=11.0, k_max=84),
    "uniform": lambda: FamilySpec("theorem4", 1.0, N=2, p_rule=PRule("harmonic", c=1 / (4 * E)),
                                  r1=100.0, k_max=84),
    "vanishing": lambda: FamilySpec("theorem4", 1.0, N=2, p_rule=PRule("power", c=1 / (2 * E), s=-2),
                                    r1=100.0, k_max=64),
    "oscillating": lambda: FamilySpec("theorem4", 1.0, N=2,
                                      p_rule=PRule("harmonic_cycle", values=(1 / E, 1 / (8 * E))),
                                      r1=100.0, k_max=84),
    "tower": lambda: FamilySpec("theorem2", 1.0, N=2, q0=100),
    "baker1988": lambda: FamilySpec("baker1988", 0.03, N=0, r1=2.0, k_max=56),
}

_cache = {}


def family(name):
    if name not in _cache:
        _cache[name] = build(SPECS[name]())
    return _cache[name]


@pytest.fixture(scope="session")
def seed():
    return family("baker1976")


@pytest.fixture(scope="session")
def uniform():
    return family("uniform")


@pytest.fixture(scope="session")
def tower():
    return family("tower")


@pytest.fixture(scope="session")
def dbl():
    return family("baker1988")


# acceptance summary ---------------------------------------------------------

_results = {}


def pytest_configure(config):
    config.addinivalue_line("markers", "criterion(n, title): acceptance criterion number")


@pytest.hookimpl(hookwrapper=True)
def pytest_runtest_makereport(item, call):
    outcome = yield
    rep = outcome.get_result()
    mark = item.get_closest_marker("criterion")
    if mark is None:
        return
    n, title = mark.args
    if rep.when == "call" or (rep.when == "setup" and not rep.passed):
        ok = rep.passed
        prev = _results.get(n, (title, True))
        _results[n] = (title, prev[1] and ok)


def pytest_terminal_summary(terminalreporter):
    if not _results:
        return
    tr = terminalreporter
    tr.section("acceptance criteria")
    for n in sorted(_results):
        title, ok = _results[n]
        tr.write_line(f"criterion {n:2d}: {'PASS' if ok else 'FAIL'}  {title}")
