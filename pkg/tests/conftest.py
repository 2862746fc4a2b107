import pytest

from gradband.a3c import TrainConfig, train
from gradband.gridmap import GridMap, generate_random_map


@pytest.fixture(scope="session")
def empty5():
    grid = GridMap(5, frozenset(), (0, 0), (4, 4))
    agent = train(grid, TrainConfig(seed=11))
    return grid, agent


@pytest.fixture(scope="session")
def trained10():
    grid = generate_random_map(10, 0.15, seed=1)
    cfg = TrainConfig(seed=1)
    return grid, cfg, train(grid, cfg)


ACCEPTANCE_LINES: list[str] = []


@pytest.fixture(scope="session")
def acceptance_lines():
    return ACCEPTANCE_LINES


def pytest_terminal_summary(terminalreporter):
    if ACCEPTANCE_LINES:
        terminalreporter.section("acceptance")
        for line in sorted(ACCEPTANCE_LINES, key=lambda s: int(s.split()[1].rstrip(":"))):
            terminalreporter.write_line(line)
