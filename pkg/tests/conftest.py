import os

import pytest
from hypothesis import HealthCheck, settings

from segre_lines.exactalg import BinaryForm
from segre_lines.jet import JetCurve

settings.register_profile(
    "default", max_examples=60, deadline=None, suppress_health_check=[HealthCheck.too_slow]
)
settings.load_profile(os.environ.get("HYPOTHESIS_PROFILE", "default"))


def bf(*coeffs):
    return BinaryForm.from_coeffs(coeffs)


@pytest.fixture
def cstar():
    # 2uv(u^2+v^2), u^4-v^4, 2uv(u^2-v^2)
    return JetCurve.from_coeffs([[0, 2, 0, 2, 0], [1, 0, 0, 0, -1], [0, 2, 0, -2, 0]])


@pytest.fixture
def syz_curve():
    # p1 = u^2(u-v)(u-2v), p2 = u^2(u-v)(u-3v), p3 = v^4
    u2 = BinaryForm.monomial(2, 0)
    a = BinaryForm.linear(1, -1)
    p1 = u2 * a * BinaryForm.linear(1, -2)
    p2 = u2 * a * BinaryForm.linear(1, -3)
    return JetCurve(3, (p1, p2, BinaryForm.monomial(0, 4)))


ACCEPTANCE_LINES = []
# nodeid -> "passed" / "failed" / "skipped" for every test run in this session
OUTCOMES = {}


def pytest_collection_modifyitems(config, items):
    # acceptance last, so criterion 9 can read the outcomes of everything else
    items.sort(key=lambda it: "test_acceptance.py" in it.nodeid)


def pytest_runtest_logreport(report):
    if report.failed:
        OUTCOMES[report.nodeid] = "failed"
    elif report.when == "call":
        OUTCOMES.setdefault(report.nodeid, report.outcome)
    elif report.skipped:
        OUTCOMES.setdefault(report.nodeid, "skipped")


def pytest_terminal_summary(terminalreporter):
    if ACCEPTANCE_LINES:
        terminalreporter.section("acceptance criteria")
        for line in ACCEPTANCE_LINES:
            terminalreporter.write_line(line)
