import pytest

from heegner_lab.padic import PadicContext


@pytest.fixture
def Q5():
    return PadicContext(5, precision=10)


@pytest.fixture
def Q13():
    return PadicContext(13, precision=10)


def pytest_terminal_summary(terminalreporter):
    lines = []
    for key in ("passed", "failed"):
        for rep in terminalreporter.stats.get(key, []):
            if rep.when == "call":
                lines += [v for k, v in getattr(rep, "user_properties", []) if k == "acceptance"]
    if lines:
        terminalreporter.section("acceptance criteria")
        for line in sorted(lines, key=lambda s: int(s.split("criterion ")[1].split()[0])):
            terminalreporter.write_line(line)
