import numpy as np
import pytest

from lifecd.graph import FailureGraph, parse_graph

FIG3B = "1,2,0.05\n2,3,0.20\n2,4,0.20\n4,5,0.30\n"
FIG2A = FIG3B + "3,5,0.60\n"


@pytest.fixture
def fig3b() -> FailureGraph:
    return parse_graph(FIG3B)


@pytest.fixture
def fig2a() -> FailureGraph:
    return parse_graph(FIG2A)


@pytest.fixture
def rng():
    return np.random.default_rng(12345)


def pytest_terminal_summary(terminalreporter):
    lines = []
    for outcome in ("passed", "failed"):
        for rep in terminalreporter.stats.get(outcome, []):
            if getattr(rep, "when", None) != "call" or "test_acceptance" not in rep.nodeid:
                continue
            label = dict(rep.user_properties).get("criterion", rep.nodeid.split("::")[-1])
            lines.append((label, "PASS" if outcome == "passed" else "FAIL"))
    if lines:
        terminalreporter.section("acceptance criteria")
        for label, status in sorted(lines):
            terminalreporter.write_line(f"{status}  {label}")
