import numpy as np
import pytest
from hypothesis import assume
from hypothesis import strategies as st

from taupcd.errors import DegenerateTriangle
from taupcd.geometry import STANDARD_EQUILATERAL, Triangle

SQRT3 = np.sqrt(3.0)


@pytest.fixture
def eq():
    return STANDARD_EQUILATERAL


@pytest.fixture
def rng():
    return np.random.default_rng(20240611)


def random_triangle(rng, scale=10.0, min_quality=0.05):
    """Random triangle whose smallest angle is not absurdly thin."""
    while True:
        v = rng.uniform(-scale, scale, size=(3, 2))
        try:
            t = Triangle.from_array(v)
        except DegenerateTriangle:
            continue
        edges = np.linalg.norm(v - np.roll(v, 1, axis=0), axis=1)
        if t.area / edges.max() ** 2 > min_quality:
            return t


def random_interior(rng, t, n):
    """Uniform points via a flat Dirichlet on the weights (independent of the package sampler)."""
    w = rng.dirichlet(np.ones(3), size=n)
    return w @ t.vertices


coords = st.floats(min_value=-50, max_value=50, allow_nan=False, allow_infinity=False)


@st.composite
def triangles(draw):
    pts = draw(st.lists(st.tuples(coords, coords), min_size=3, max_size=3))
    v = np.array(pts, dtype=float)
    edges = np.linalg.norm(v - np.roll(v, 1, axis=0), axis=1)
    area2 = abs((v[1, 0] - v[0, 0]) * (v[2, 1] - v[0, 1]) - (v[1, 1] - v[0, 1]) * (v[2, 0] - v[0, 0]))
    assume(edges.max() > 1e-3 and area2 > 0.02 * edges.max() ** 2)
    return Triangle.from_array(v)


@st.composite
def barycentrics(draw, interior=True):
    a = draw(st.floats(min_value=0, max_value=1))
    b = draw(st.floats(min_value=0, max_value=1))
    if a + b > 1:
        a, b = 1 - a, 1 - b
    w = np.array([a, b, 1 - a - b])
    if interior:
        assume(w.min() > 1e-6)
    return w


ACCEPTANCE_KEY = pytest.StashKey[list]()


@pytest.fixture
def acceptance_log(request):
    """Collects one summary line per acceptance criterion for the terminal report."""
    return request.config.stash.setdefault(ACCEPTANCE_KEY, [])


def pytest_terminal_summary(terminalreporter, exitstatus, config):
    lines = config.stash.get(ACCEPTANCE_KEY, [])
    if lines:
        terminalreporter.section("acceptance criteria")
        for line in sorted(lines, key=lambda s: int(s.split()[1].rstrip(":"))):
            terminalreporter.write_line(line)
