from fractions import Fraction

import pytest

from losrcert.certify import solve_feasibility
from losrcert.constraints import build_structure, compile_system
from losrcert.inflation import lp_inflations
from losrcert.network import canonical_scenario
from losrcert.quantum import ghz_behavior, ghz_parties


@pytest.fixture(scope="session")
def ghz3_scenario():
    return canonical_scenario(3, ghz_parties(3))


@pytest.fixture(scope="session")
def ghz3_k2(ghz3_scenario):
    infs = lp_inflations(ghz3_scenario, 2)
    structure = build_structure(ghz3_scenario, [(i, i.party_copies) for i in infs])
    return infs, structure


@pytest.fixture(scope="session")
def ghz3_ideal_solution(ghz3_scenario, ghz3_k2):
    infs, structure = ghz3_k2
    system = compile_system(ghz3_scenario, ghz_behavior(3, 1), infs, structure=structure)
    return system, solve_feasibility(system)


@pytest.fixture(scope="session")
def ghz3_half_solution(ghz3_scenario, ghz3_k2):
    infs, structure = ghz3_k2
    system = compile_system(ghz3_scenario, ghz_behavior(3, Fraction(1, 2)), infs, structure=structure)
    return system, solve_feasibility(system)


ACCEPTANCE_LINES = {}


@pytest.fixture
def report():
    """Record one pass/fail line per acceptance criterion."""
    def record(criterion, ok, detail):
        line = f"criterion {criterion}: {'PASS' if ok else 'FAIL'}  {detail}"
        ACCEPTANCE_LINES[criterion] = line
        print(line)
        return ok
    return record


def pytest_terminal_summary(terminalreporter):
    if ACCEPTANCE_LINES:
        terminalreporter.section("acceptance criteria")
        for key in sorted(ACCEPTANCE_LINES):
            terminalreporter.write_line(ACCEPTANCE_LINES[key])
