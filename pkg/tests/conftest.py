from fractions import Fraction

import pytest
from hypothesis import HealthCheck, settings
from hypothesis import strategies as st

from moebiuslab.qspace import FiniteQSpace, extend_with_infinity, line_space

settings.register_profile("default", max_examples=60, deadline=None,
                          suppress_health_check=[HealthCheck.too_slow])
settings.load_profile("default")

rationals = st.builds(Fraction, st.integers(1, 40), st.sampled_from([1, 2, 3, 4, 5]))


@st.composite
def line_spaces(draw, min_size=3, max_size=7):
    vals = draw(st.lists(st.builds(Fraction, st.integers(0, 60), st.sampled_from([1, 2, 4])),
                         min_size=min_size, max_size=max_size, unique=True))
    return line_space(sorted(vals))


@st.composite
def quasi_spaces(draw, min_size=3, max_size=6):
    """Arbitrary symmetric positive matrices; every such matrix is a K-quasi-metric."""
    n = draw(st.integers(min_size, max_size))
    dist = [[Fraction(0)] * n for _ in range(n)]
    for i in range(n):
        for j in range(i + 1, n):
            dist[i][j] = dist[j][i] = draw(rationals)
    return FiniteQSpace.from_matrix([f"p{i}" for i in range(n)], dist)


@st.composite
def any_spaces(draw, min_size=3, max_size=6):
    S = draw(st.one_of(line_spaces(min_size, max_size), quasi_spaces(min_size, max_size)))
    if draw(st.booleans()):
        S = extend_with_infinity(S)
    return S


@pytest.fixture
def s0124():
    return line_space([0, 1, 2, 4])


# one line per acceptance criterion, repeated after the run
ACCEPTANCE: list[str] = []


def pytest_terminal_summary(terminalreporter):
    if ACCEPTANCE:
        terminalreporter.section("acceptance criteria")
        for line in ACCEPTANCE:
            terminalreporter.write_line(line)
