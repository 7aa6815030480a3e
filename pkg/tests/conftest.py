import sys
from pathlib import Path

import pytest

sys.path.insert(0, str(Path(__file__).parent))

from roomanc.rir import Position, RoomModel  # noqa: E402

REFERENCE_BETAS = (0.8, 0.7, 0.6, 0.5, 0.4, 0.5)

_criteria = {}  # number -> [title, outcomes, seconds]

def pytest_configure(config):
    config.addinivalue_line("markers", "criterion(number, title): acceptance criterion")


@pytest.fixture
def room():
    return RoomModel((6.0, 4.0, 3.0), REFERENCE_BETAS, 343.0, 2000.0)


@pytest.fixture
def anechoic_room():
    return RoomModel((6.0, 4.0, 3.0), (0.0,) * 6, 343.0, 2000.0)


@pytest.fixture
def noise_source():
    return Position(3.0, 2.0, 1.5)


@pytest.fixture
def microphone():
    return Position(1.0, 3.0, 1.5)


@pytest.hookimpl(hookwrapper=True)
def pytest_runtest_makereport(item, call):
    outcome = yield
    report = outcome.get_result()
    marker = item.get_closest_marker("criterion")
    if marker is None or report.when == "teardown":
        return
    number, title = marker.args
    entry = _criteria.setdefault(number, [title, [], 0.0])
    entry[2] += report.duration
    if report.when == "call" or report.outcome != "passed":
        entry[1].append(report.outcome)


def pytest_terminal_summary(terminalreporter):
    if not _criteria:
        return
    terminalreporter.section("acceptance criteria")
    for number, (title, outcomes, seconds) in sorted(_criteria.items()):
        bad = [o for o in outcomes if o != "passed"]
        verdict = "PASS" if not bad else bad[0].upper()
        terminalreporter.write_line(f"[{verdict}] criterion {number:2d}: {title} ({seconds:.1f} s)")
