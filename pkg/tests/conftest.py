import numpy as np
import pytest

from petz_tur import generators as G
from petz_tur.states import random_density, random_observable


@pytest.fixture
def rng():
    return np.random.default_rng(20240611)


def random_pair(rng, dim):
    return random_density(dim, rng), random_density(dim, rng)


def random_triple_states(rng, dim):
    return random_density(dim, rng), random_density(dim, rng), random_observable(dim, rng)


CATALOG = G.expanded_catalog((0.25, 0.5, 0.75))
CATALOG_IDS = [g.name for g in CATALOG]


# one line per acceptance criterion, filled by test_acceptance.py
ACCEPTANCE_LINES = []


def pytest_terminal_summary(terminalreporter):
    if ACCEPTANCE_LINES:
        terminalreporter.section("acceptance criteria")
        for line in ACCEPTANCE_LINES:
            terminalreporter.write_line(line)
