import functools
import os
import sys

import pytest
from hypothesis import settings

sys.path.insert(0, os.path.dirname(__file__))

settings.register_profile("default", max_examples=60, deadline=None)
settings.load_profile("default")


@functools.lru_cache(maxsize=None)
def model(selector, cutoff):
    from voalab.models import build_model
    return build_model(selector, cutoff)


@pytest.fixture(scope="session")
def heisenberg():
    return model("heisenberg", 6)


@pytest.fixture(scope="session")
def ising():
    return model("ising", 8)


@pytest.fixture(scope="session")
def toy():
    from voalab.extension import build_extension, heisenberg_toy
    inp, P, tops = heisenberg_toy(4)
    return inp, P, tops, build_extension(inp)


ACCEPTANCE_LINES = []


def pytest_terminal_summary(terminalreporter):
    if ACCEPTANCE_LINES:
        terminalreporter.section("acceptance criteria")
        for line in sorted(ACCEPTANCE_LINES, key=lambda s: int(s.split()[1].rstrip(":"))):
            terminalreporter.write_line(line)
