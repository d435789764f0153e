import itertools
from collections import Counter

import numpy as np
import pytest

from irsa_flpa.model import DegreeDistribution

_ACCEPTANCE_LINES = []


@pytest.fixture
def acceptance_log():
    """Record one PASS/FAIL line per acceptance criterion."""

    def record(name, ok, detail=""):
        _ACCEPTANCE_LINES.append(f"{'PASS' if ok else 'FAIL'}  {name}  {detail}".rstrip())
        return ok

    return record


def pytest_terminal_summary(terminalreporter):
    if _ACCEPTANCE_LINES:
        terminalreporter.section("acceptance criteria")
        for line in _ACCEPTANCE_LINES:
            terminalreporter.write_line(line)


# shared brute-force helpers --------------------------------------------------


def all_matrices(d, t):
    """Every k x t 0/1 matrix with row sums d, as numpy arrays."""
    row_sets = []
    for di in d:
        rows = []
        for combo in itertools.combinations(range(t), di):
            r = np.zeros(t, dtype=np.uint8)
            r[list(combo)] = 1
            rows.append(r)
        row_sets.append(rows)
    for rows in itertools.product(*row_sets):
        yield np.vstack(rows)


def occupancy_key(M):
    cols = Counter()
    for j in range(M.shape[1]):
        c = 0
        for i in range(M.shape[0]):
            if M[i, j]:
                c |= 1 << i
        cols[c] += 1
    return frozenset(cols.items())


@pytest.fixture
def ref_dist():
    return DegreeDistribution.parse("2:0.25,3:0.75")


@pytest.fixture
def mixed_dist():
    return DegreeDistribution.parse("1:0.2,2:0.5,4:0.3")
