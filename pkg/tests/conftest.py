import json

import pytest

from fqdyn.dynamics import ModelDynamics
from fqdyn.geometry import VarietySpec, build_abstract_model, build_model
from fqdyn.verify import group_of

X16 = {
    "kind": "variety", "field": {"p": 2, "e": 2}, "working_degree": 2, "variables": ["x"],
    "equations": ["x^16 + x"],
    "generators": [{"name": "t1", "map": ["x + 1"]}, {"name": "ta", "map": ["x + a"]}],
    "endomorphism": ["x^4"], "n_values": [1, 2, 3, 4], "n_max": 8,
}

A1_F4 = {
    "kind": "variety", "field": {"p": 2, "e": 2}, "working_degree": 1, "variables": ["x"],
    "equations": [],
    "generators": [{"name": "t1", "map": ["x + 1"]}, {"name": "ta", "map": ["x + a"]}],
    "endomorphism": ["x^4"],
}

CHAIN = {"kind": "abstract", "points": 3, "frobenius": [0, 1, 2], "generators": [], "endomorphism": [1, 2, 2], "complete": True}


def variety(data, **changes):
    return VarietySpec.from_json({**data, **changes})


@pytest.fixture(scope="session")
def x16_model():
    return build_model(variety(X16))


@pytest.fixture(scope="session")
def x16_dyn(x16_model):
    return ModelDynamics(x16_model, group_of(x16_model))


@pytest.fixture(scope="session")
def a1_model():
    return build_model(variety(A1_F4))


@pytest.fixture
def chain_dyn():
    m = build_abstract_model(CHAIN)
    return ModelDynamics(m, group_of(m))


@pytest.fixture
def write_json(tmp_path):
    def write(name, data):
        path = tmp_path / name
        path.write_text(json.dumps(data))
        return str(path)

    return write


# one pass/fail line per acceptance criterion, printed after the run
ACCEPTANCE_RESULTS = {}


def pytest_runtest_logreport(report):
    if report.when == "call" and "test_acceptance.py" in report.nodeid:
        for name, value in report.user_properties:
            if name == "criterion":
                ACCEPTANCE_RESULTS[value] = report.outcome


def pytest_terminal_summary(terminalreporter):
    if not ACCEPTANCE_RESULTS:
        return
    terminalreporter.section("acceptance criteria")
    for crit in sorted(ACCEPTANCE_RESULTS, key=lambda c: int(c.split()[0])):
        outcome = ACCEPTANCE_RESULTS[crit]
        terminalreporter.write_line(f"{'PASS' if outcome == 'passed' else 'FAIL'}  criterion {crit}")
