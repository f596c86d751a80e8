import pytest

from dudesim.geometry import NetworkLayout, Point
from dudesim.linkbudget import CellRadioConfig, PowerControlConfig


@pytest.fixture
def line_layout():
    """Macro at the origin, small cell 1 km east, 2 km Macro coverage."""
    return NetworkLayout(
        macro_pos=Point(0.0, 0.0),
        macro_radio=CellRadioConfig(40.0, 2000.0),
        small_pos=Point(1000.0, 0.0),
        small_radio=CellRadioConfig(20.0, 35.0),
    )


@pytest.fixture
def pc1():
    """Single resource block, so both formula modes agree."""
    return PowerControlConfig(p0_dbm=-80.0, alpha=0.7, pmax_dbm=23.0, num_rbs=1, noise_dbm=-102.0)


def pytest_terminal_summary(terminalreporter):
    lines = []
    for outcome in ("passed", "failed", "error"):
        for rep in terminalreporter.stats.get(outcome, []):
            if "test_acceptance.py" in rep.nodeid and (rep.when == "call" or outcome == "error"):
                doc = getattr(rep, "acceptance_title", None) or rep.nodeid.split("::")[-1]
                lines.append((rep.nodeid, f"{'PASS' if outcome == 'passed' else 'FAIL'}  {doc}"))
    if lines:
        terminalreporter.section("acceptance criteria")
        for _, line in sorted(lines):
            terminalreporter.write_line(line)


@pytest.hookimpl(hookwrapper=True)
def pytest_runtest_makereport(item, call):
    outcome = yield
    rep = outcome.get_result()
    title = getattr(item.function, "__doc__", None)
    if title:
        rep.acceptance_title = title.strip().splitlines()[0]
