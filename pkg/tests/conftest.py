import random

import pytest
from hypothesis import settings

from pakelab.groups import EC23, EC65519, MODP23, safe_prime_group
from pakelab.oracles import OracleSuite

settings.register_profile("default", max_examples=60, deadline=None)
settings.load_profile("default")

ALL_GROUPS = [MODP23, safe_prime_group(64), EC23, EC65519]


@pytest.fixture
def suite():
    return OracleSuite(1234)


@pytest.fixture
def rng():
    return random.Random(99)


@pytest.fixture(params=ALL_GROUPS, ids=lambda g: g.name)
def group(request):
    return request.param


# One summary line per acceptance criterion, printed at the end of the run.
ACCEPTANCE_LINES = []


@pytest.fixture
def criterion():
    def record(number, ok, detail):
        line = f"criterion {number:>2}: {'PASS' if ok else 'FAIL'}  {detail}"
        ACCEPTANCE_LINES.append(line)
        print(line)
        return ok
    return record


def pytest_terminal_summary(terminalreporter):
    if ACCEPTANCE_LINES:
        terminalreporter.section("acceptance criteria")
        for line in sorted(ACCEPTANCE_LINES, key=lambda s: int(s.split()[1].rstrip(":"))):
            terminalreporter.write_line(line)
