import numpy as np
import pytest

from cwe.models import Dataset

LINE_PAIRS = [(1.0, 0.8), (2.0, 2.5), (3.0, 2.9)]


@pytest.fixture
def line_data():
    return Dataset.of(LINE_PAIRS)


@pytest.fixture
def line_csv(tmp_path):
    path = tmp_path / "line_data.csv"
    path.write_text("x,y\n1,.8\n2,2.5\n3,2.9\n")
    return path


@pytest.fixture(scope="session")
def line_alpha_grid():
    from cwe.multivariate import alpha_grid_linfit

    return alpha_grid_linfit(Dataset.of(LINE_PAIRS))


def v_field(a, b):
    return (1.0 + np.abs(b)) ** 2


_ACCEPTANCE_LINES: list[str] = []


@pytest.fixture
def acceptance():
    """Record one PASS/FAIL line per acceptance criterion for the terminal summary."""

    def record(criterion: str, ok: bool, detail: str) -> bool:
        _ACCEPTANCE_LINES.append(f"{'PASS' if ok else 'FAIL'}  {criterion}: {detail}")
        return ok

    return record


def pytest_terminal_summary(terminalreporter):
    if _ACCEPTANCE_LINES:
        terminalreporter.section("acceptance criteria")
        for line in _ACCEPTANCE_LINES:
            terminalreporter.write_line(line)
