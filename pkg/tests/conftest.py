import math
import os
import sys

import numpy as np
import pytest
from hypothesis import HealthCheck, settings

sys.path.insert(0, os.path.dirname(__file__))

from qdarwin.qstate import PureState  # noqa: E402

settings.register_profile("default", max_examples=60, deadline=None,
                          suppress_health_check=[HealthCheck.too_slow])
settings.load_profile("default")


@pytest.fixture
def bell():
    return PureState(np.array([1, 0, 0, 1]) / math.sqrt(2), [2, 2])


def two_thirds_state():
    """sqrt(2/3)|0>|+> + sqrt(1/3)|2>|2> with S and E both three dimensional."""
    amps = np.zeros((3, 3))
    amps[0, 0] = amps[0, 1] = math.sqrt(2 / 3) / math.sqrt(2)
    amps[2, 2] = math.sqrt(1 / 3)
    return PureState(amps.reshape(-1), [3, 3])


@pytest.fixture
def two_thirds():
    return two_thirds_state()


def record_state(cos_angle=math.cos(math.pi / 8)):
    """(|up><up| (x) |A0><A0| + |ne><ne| (x) |A1><A1|) / 2 with orthogonal records."""
    from qdarwin.qstate import DensityMatrix
    up = np.array([1.0, 0.0])
    ne = np.array([cos_angle, math.sqrt(1 - cos_angle**2)])
    m = 0.5 * (np.kron(np.outer(up, up), np.diag([1.0, 0.0])) + np.kron(np.outer(ne, ne), np.diag([0.0, 1.0])))
    return DensityMatrix(m, [2, 2])


_CRITERIA: dict[int, tuple[str, str, float, str]] = {}


def pytest_configure(config):
    config.addinivalue_line("markers", "criterion(number, title): acceptance criterion")


@pytest.hookimpl(hookwrapper=True)
def pytest_runtest_makereport(item, call):
    outcome = yield
    rep = outcome.get_result()
    mark = item.get_closest_marker("criterion")
    if mark is None:
        return
    if rep.when == "call" or (rep.when == "setup" and rep.outcome != "passed"):
        num, title = mark.args
        detail = dict(rep.user_properties).get("detail", "")
        _CRITERIA[num] = (title, rep.outcome, rep.duration, detail)


def pytest_terminal_summary(terminalreporter):
    if not _CRITERIA:
        return
    terminalreporter.section("acceptance criteria")
    for num in sorted(_CRITERIA):
        title, outcome, dur, detail = _CRITERIA[num]
        status = "PASS" if outcome == "passed" else "FAIL"
        line = f"criterion {num:2d} {status}  {title} ({dur:.2f} s)"
        if detail:
            line += f"  [{detail}]"
        terminalreporter.write_line(line)
