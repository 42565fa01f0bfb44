import itertools
import sys
from fractions import Fraction
from pathlib import Path

import pytest
from hypothesis import strategies as st

from secretdist.dist_core import Party, VariableDef, build_distribution, paper_distribution

sys.path.insert(0, str(Path(__file__).parent))


@pytest.fixture
def initial_table():
    return paper_distribution("initial")


@pytest.fixture
def mid_table():
    return paper_distribution("after_alice_cnot")


@pytest.fixture
def final_table():
    return paper_distribution("final")


def bit(name, owner=Party.ALICE):
    return VariableDef(name, ("0", "1"), owner)


@st.composite
def distributions(draw, names=("A", "B", "C", "E"), max_size=3):
    """Small exact distributions with integer weights over random alphabets."""
    owners = [Party.ALICE, Party.BOB, Party.ALICE, Party.EVE, Party.CHARLIE]
    variables = []
    for i, n in enumerate(names):
        size = draw(st.integers(1, max_size))
        variables.append(VariableDef(n, [f"s{j}" for j in range(size)], owners[i % len(owners)]))
    outcomes = list(itertools.product(*(v.alphabet for v in variables)))
    weights = draw(st.lists(st.integers(0, 6), min_size=len(outcomes), max_size=len(outcomes)))
    if sum(weights) == 0:
        weights[0] = 1
    total = sum(weights)
    return build_distribution(variables, [(o, Fraction(w, total)) for o, w in zip(outcomes, weights) if w])


# one line per acceptance criterion, echoed in the terminal summary
ACCEPTANCE_LINES: list[str] = []


def record(label, ok, detail=""):
    line = f"criterion {label}: {'PASS' if ok else 'FAIL'}  {detail}".rstrip()
    ACCEPTANCE_LINES.append(line)
    print(line)
    return ok


def pytest_terminal_summary(terminalreporter):
    if ACCEPTANCE_LINES:
        terminalreporter.section("acceptance criteria")
        for line in ACCEPTANCE_LINES:
            terminalreporter.write_line(line)
