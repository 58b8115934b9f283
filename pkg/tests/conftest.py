import math

import numpy as np
import pytest

from pscone.fixtures import half_plane, octant, quadrant, translated_cone
from pscone.geometry import sphere_grid

_ACCEPTANCE: list[str] = []


@pytest.fixture(scope="session")
def C2():
    return quadrant()


@pytest.fixture(scope="session")
def C3():
    return octant()


@pytest.fixture(scope="session")
def grid2(C2):
    return sphere_grid(C2, 100_000)


@pytest.fixture(scope="session")
def grid2_small(C2):
    return sphere_grid(C2, 10_000)


@pytest.fixture(scope="session")
def grid3(C3):
    return sphere_grid(C3, 200_000)


@pytest.fixture(scope="session")
def half(C2):
    return half_plane(C2)


@pytest.fixture(scope="session")
def shifted(C2):
    return translated_cone(C2, [1.0, 1.0])


@pytest.fixture
def rng():
    return np.random.default_rng(20240611)


@pytest.fixture
def criterion():
    """Record one pass/fail line per acceptance criterion; returns ``ok``."""

    def record(number: int, title: str, ok: bool, detail: str) -> bool:
        line = f"acceptance {number}: {'PASS' if ok else 'FAIL'}  {title}  [{detail}]"
        _ACCEPTANCE.append(line)
        print(line)
        return ok

    return record


def pytest_terminal_summary(terminalreporter):
    if _ACCEPTANCE:
        terminalreporter.section("acceptance criteria")
        for line in sorted(_ACCEPTANCE):
            terminalreporter.write_line(line)


SQRT2 = math.sqrt(2.0)
