import pytest

from subdiff_lab import AffinePiece, Box, MaxAffine, PLFunction

ACCEPTANCE_LINES = []


def pl(*components, domain=None):
    """``pl([(g, b), ...], [(g, b), ...])``: min over the given max-affine lists."""
    comps = tuple(MaxAffine(tuple(AffinePiece(g, b) for g, b in c)) for c in components)
    return PLFunction(comps, domain)


@pytest.fixture
def absf():
    return pl([((1,), 0), ((-1,), 0)])


@pytest.fixture
def twin_valleys():
    # min(|x - 1|, |x + 1|)
    return pl([((1,), -1), ((-1,), 1)], [((1,), 1), ((-1,), -1)])


@pytest.fixture
def kinked():
    # max(2x + 1, -x), kink at -1/3
    return pl([((2,), 1), ((-1,), 0)])


@pytest.fixture
def max2():
    return pl([((1, 0), 0), ((0, 1), 0)])


@pytest.fixture
def unit_box():
    return Box((-1,), (1,))


def pytest_terminal_summary(terminalreporter):
    if ACCEPTANCE_LINES:
        terminalreporter.section("acceptance criteria")
        for line in ACCEPTANCE_LINES:
            terminalreporter.write_line(line)
