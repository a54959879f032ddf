import numpy as np
import pytest

from rflp.core import Instance
from rflp.instgen import GenParams, generate_instance

_criteria: dict[int, tuple[str, str, str]] = {}


def make_tiny3(failure_prob=0.05):
    return Instance(
        coords=[(0.0, 0.0), (1.0, 0.0), (0.0, 1.0)],
        demands=[100, 0, 200],
        fixed_costs=[500, 600, 700],
        failure_prob=failure_prob,
    )


@pytest.fixture
def tiny3():
    return make_tiny3()


def random_instance(seed, n, failure_prob=0.05):
    return generate_instance(GenParams(n=n, seed=seed, failure_prob=failure_prob))


def random_feasible(rng, n, min_count=2):
    while True:
        g = rng.integers(0, 2, n).astype(np.uint8)
        if g.sum() >= min_count:
            return g


@pytest.hookimpl(hookwrapper=True)
def pytest_runtest_makereport(item, call):
    outcome = yield
    rep = outcome.get_result()
    marker = item.get_closest_marker("criterion")
    if marker is None or rep.when != "call":
        return
    number, title = marker.args
    detail = dict(item.user_properties).get("detail", "")
    _criteria[number] = (title, "PASS" if rep.passed else "FAIL", detail)


def pytest_terminal_summary(terminalreporter):
    if not _criteria:
        return
    terminalreporter.section("acceptance criteria")
    for number in sorted(_criteria):
        title, status, detail = _criteria[number]
        line = f"[{status}] criterion {number:>2}: {title}"
        if detail:
            line += f" -- {detail}"
        terminalreporter.write_line(line)
