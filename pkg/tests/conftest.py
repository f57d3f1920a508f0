import pytest

from budgetsvm.trainer import default_grid

ACCEPTANCE_LINES: list[str] = []


@pytest.fixture(scope="session")
def grid400():
    return default_grid(400, 1e-10)


@pytest.fixture
def acceptance_line():
    def record(label: str, ok: bool, detail: str) -> None:
        line = f"[{'PASS' if ok else 'FAIL'}] {label}: {detail}"
        ACCEPTANCE_LINES.append(line)
        print(line)
        assert ok, line

    return record


def pytest_terminal_summary(terminalreporter):
    if ACCEPTANCE_LINES:
        terminalreporter.section("acceptance criteria")
        for line in ACCEPTANCE_LINES:
            terminalreporter.write_line(line)
