import sys

import pytest

from blindbench.qbf import parse_qbf, random_qbf, brute_force_truth


@pytest.fixture
def exists_x():
    return parse_qbf("e 1 0\n1 0\n")


@pytest.fixture
def forall_x():
    return parse_qbf("a 1 0\n1 0\n")


@pytest.fixture
def xor_true():
    # forall x1 exists x2 . x1 xor x2
    return parse_qbf("p qbf 2\na 1 0\ne 2 0\n(or (and 1 (not 2)) (and (not 1) 2))\n")


def find_instances(n, size, truth, count, start=0):
    out = []
    s = start
    while len(out) < count:
        q = random_qbf(n, size, s)
        if q not in out and brute_force_truth(q) == truth:
            out.append(q)
        s += 1
    return out


def pytest_terminal_summary(terminalreporter):
    mod = sys.modules.get("test_acceptance")
    lines = getattr(mod, "RESULTS", None)
    if lines:
        terminalreporter.section("acceptance criteria")
        for line in lines:
            terminalreporter.write_line(line)
