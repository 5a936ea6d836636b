import os

import pytest
from hypothesis import HealthCheck, settings

from bnctrl.cnf import build_clauses
from bnctrl.network import make_network

settings.register_profile("default", max_examples=60, deadline=None,
                          suppress_health_check=[HealthCheck.too_slow])
settings.register_profile("thorough", max_examples=400, deadline=None,
                          suppress_health_check=[HealthCheck.too_slow])
settings.load_profile(os.environ.get("HYPOTHESIS_PROFILE", "default"))

TOY = {"x1": "(!x1 | !x2) & x3", "x2": "x1 & x3", "x3": "x1 | x2 | x3"}
TOY_BNET = """targets, factors
x1, (!x1 | !x2) & x3
x2, x1 & x3
x3, x1 | x2 | x3
# phenotype: x2 & x3
"""


@pytest.fixture
def toy():
    return make_network(TOY, "x2 & x3")


@pytest.fixture
def toy_clauses(toy):
    return build_clauses(toy)


@pytest.fixture
def xnor_pair():
    return make_network({"x1": "x1", "x2": "(!x1 | x2) & (x1 | !x2)"}, "!x2")


@pytest.fixture
def negation():
    return make_network({"x1": "!x1"}, "x1")


@pytest.fixture
def toy_file(tmp_path):
    path = tmp_path / "toy.bnet"
    path.write_text(TOY_BNET)
    return path


# one line per acceptance criterion, printed at the end of the run
ACCEPTANCE_LINES: dict[int, str] = {}


def pytest_terminal_summary(terminalreporter):
    if ACCEPTANCE_LINES:
        terminalreporter.section("acceptance criteria")
        for k in sorted(ACCEPTANCE_LINES):
            terminalreporter.write_line(ACCEPTANCE_LINES[k])
