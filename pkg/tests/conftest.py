import math
import sys
from pathlib import Path

import numpy as np
import pytest

sys.path.insert(0, str(Path(__file__).parent))

from constrained_bsc.constraint import FiniteTypeConstraint
from constrained_bsc.rll import RLLParams, rll_constraint
from constrained_bsc.spectral import parry_chain

LAMBDA = (1.0 + math.sqrt(5.0)) / 2.0


@pytest.fixture(scope="session")
def golden():
    return FiniteTypeConstraint(["11"])


@pytest.fixture(scope="session")
def golden_parry(golden):
    return parry_chain(golden)


@pytest.fixture(scope="session")
def s13():
    return rll_constraint(RLLParams(1, 3))


@pytest.fixture
def rng():
    return np.random.default_rng(12345)


ACCEPTANCE_LINES: list[str] = []


def pytest_terminal_summary(terminalreporter):
    if ACCEPTANCE_LINES:
        terminalreporter.section("acceptance criteria")
        for line in sorted(ACCEPTANCE_LINES, key=lambda s: int(s.split()[1].rstrip(":"))):
            terminalreporter.write_line(line)
