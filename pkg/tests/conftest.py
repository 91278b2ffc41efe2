import os
from pathlib import Path

import numpy as np
import pytest

from tspbn.dataset import DiscreteTable

ROOT = Path(__file__).resolve().parent.parent
DATA_DIR = Path(os.environ.get("TSPBN_DATA", ROOT / "data"))


@pytest.fixture
def rng():
    return np.random.default_rng(12345)


@pytest.fixture
def toy_table():
    # rows (P, X): (0,0), (0,1), (1,1)
    return DiscreteTable(np.array([[0, 0], [0, 1], [1, 1]]), (2, 2), ("P", "X"))


ACCEPTANCE_RESULTS: list[str] = []


def pytest_terminal_summary(terminalreporter):
    if ACCEPTANCE_RESULTS:
        terminalreporter.section("acceptance criteria")
        for line in ACCEPTANCE_RESULTS:
            terminalreporter.write_line(line)
