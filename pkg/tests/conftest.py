from fractions import Fraction as F

import pytest

from mopchains.gaussborel import build_family
from mopchains.stochastic import pair_for_family
from mopchains.weights import UNIFORM_TUPLE, WeightSystem

RECURRENT = (F(-1, 4), F(-1, 2), F(-1, 2))
TRANSIENT = (F(-1, 4), F(-1, 2), F(1, 2))

# criterion lines collected by tests/test_acceptance.py
ACCEPTANCE_LINES = []


@pytest.fixture(scope="session")
def jp_rec():
    return WeightSystem.jacobi_pineiro(*RECURRENT)


@pytest.fixture(scope="session")
def jp_tr():
    return WeightSystem.jacobi_pineiro(*TRANSIENT)


@pytest.fixture(scope="session")
def uniform():
    return WeightSystem.hypergeometric(*UNIFORM_TUPLE)


@pytest.fixture(scope="session")
def fam_rec(jp_rec):
    return build_family(jp_rec, 20, "exact")


@pytest.fixture(scope="session")
def fam_tr(jp_tr):
    return build_family(jp_tr, 20, "exact")


@pytest.fixture(scope="session")
def fam_uniform(uniform):
    return build_family(uniform, 20, "exact")


@pytest.fixture(scope="session")
def pair_rec(fam_rec):
    return pair_for_family(fam_rec)


@pytest.fixture(scope="session")
def pair_tr(fam_tr):
    return pair_for_family(fam_tr)


@pytest.fixture(scope="session")
def pair_uniform(fam_uniform):
    return pair_for_family(fam_uniform)


def pytest_terminal_summary(terminalreporter):
    if ACCEPTANCE_LINES:
        terminalreporter.section("acceptance criteria")
        for line in sorted(ACCEPTANCE_LINES, key=_order):
            terminalreporter.write_line(line)


def _order(line):
    head = line.split(":")[0].split()[-1]
    num = "".join(ch for ch in head if ch.isdigit())
    return (int(num) if num else 99, head)
