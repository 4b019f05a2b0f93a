import pytest

from flinthills.precision import make_context
from flinthills.series import SeriesId, partial_sums

TABLE_LEVELS = (10_000, 50_000, 100_000, 200_000, 500_000)

_acceptance_lines = []


def record_acceptance(line: str) -> None:
    print(line)
    _acceptance_lines.append(line)


def pytest_terminal_summary(terminalreporter):
    if _acceptance_lines:
        terminalreporter.section("acceptance criteria")
        for line in _acceptance_lines:
            terminalreporter.write_line(line)


@pytest.fixture(scope="session")
def ctx30():
    return make_context(30)


@pytest.fixture(scope="session")
def ctx40():
    return make_context(40)


@pytest.fixture(scope="session")
def table_states(ctx30):
    """R1*, S and H3 partial sums at every table level, summed once per session."""
    ids = [SeriesId.R1STAR, SeriesId.S, SeriesId.H3]
    out = {}
    states = None
    for N in TABLE_LEVELS:
        states = partial_sums(ids, N, ctx30, resume_from=states)
        out[N] = states
    return out


@pytest.fixture(scope="session")
def lerch_states(ctx40):
    ids = [SeriesId.R1STAR, SeriesId.H3, SeriesId.A, SeriesId.B, SeriesId.C, SeriesId.D,
           SeriesId.F_COT, SeriesId.F_TAN, SeriesId.G_COT, SeriesId.G_TAN]
    return partial_sums(ids, 50_000, ctx40)
